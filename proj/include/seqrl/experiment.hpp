#pragma once

// Experiment orchestration: the config document (strict schema, unknown
// keys are errors), run manifests with content digests, and the command
// implementations behind the CLI (train, sample, evaluate, make-landscape,
// verify-manifest). One directory per run holds the config copy, manifest,
// checkpoints, logs and reports; a config plus a seed fixes every output
// byte except the manifest timestamps.

#include <seqrl/envs.hpp>
#include <seqrl/eval.hpp>
#include <seqrl/rewards.hpp>
#include <seqrl/sha256.hpp>
#include <seqrl/train.hpp>

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <memory>
#include <thread>

namespace seqrl {

inline constexpr const char* kToolVersion = "seqrl 0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ------------------------------------------------------------- schema

namespace cfg_detail {

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    require<InvalidConfig>(obj.is_object(), path + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        require<InvalidConfig>(known, "unknown key '" + path + "." + it.key() + "'");
    }
}

template <class T>
T get_req(const json& obj, const std::string& path, const char* key) {
    require<InvalidConfig>(obj.contains(key), "missing required key '" + path + "." + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidConfig("wrong type for '" + path + "." + key + "'");
    }
}

template <class T>
T get_or(const json& obj, const std::string& path, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidConfig("wrong type for '" + path + "." + key + "'");
    }
}

} // namespace cfg_detail

enum class TaskKind { generation, mutation };

struct PolicySpec {
    PolicyFamily family = PolicyFamily::position_categorical;
    int length = 4;
    std::string alphabet = "ACDEFGHIKLMNPQRSTVWY";
    double position_weight = 0.5;
};

/// A concrete (non-wrapped) landscape: variant table file, NK synthetic, or
/// the deterministic phoq_like generator.
struct BaseLandscapeSpec {
    std::string kind; // table | nk | phoq_like
    // table
    std::string path;
    std::vector<int> sites;
    std::string wild_type;
    // nk
    int nk_n = 6;
    int nk_k = 1;
    uint64_t nk_seed = 0;
    // phoq_like
    PhoqLikeParams phoq;
    uint64_t phoq_seed = 0;
};

struct LandscapeSpec {
    BaseLandscapeSpec base;
    bool threshold_wrap = false; // R = 2 (f / scale - lambda)
    double lambda = 0.4;
    double scale = 1.0;
};

struct NoiseSpec {
    bool enabled = false;
    double noise_sd = 0.0;
    double corruption_rate = 0.0;
    double flip_threshold = 0.0;
    uint64_t seed = 0;
};

struct AlgoSpec {
    Algo name = Algo::ppo;
    int steps = 100;
    RLConfig rl;
};

struct SamplingSpec {
    double temperature = 1.0;
    double top_p = 1.0;
    int samples_per_context = 64;
    int k_max = 32;
    int contexts = 64;
};

struct SuccessSpec {
    double threshold = 0.0;
    bool strict = true; // reward > threshold; false means >=
};

struct PoolSpec {
    std::string source = "bins"; // bins | list
    int per_bin = 100;
    std::vector<std::string> sequences;
};

struct EnvSpec {
    int max_steps = 4;
    std::string mask; // '1'/'0' per position
    RewardMode reward_mode = RewardMode::per_step;
    bool terminate_on_improvement = false;
    double position_threshold = 0.5;
    AnnealSchedule anneal;
    PoolSpec pool;
};

struct EvalSpec {
    std::string reference_path;
    std::string native;
    int diversity_max_samples = 256;
    std::vector<int> entropy_positions; // empty -> all positions
};

struct ExperimentConfig {
    std::string name;
    uint64_t seed = 0;
    TaskKind task = TaskKind::generation;
    PolicySpec policy;
    LandscapeSpec landscape;
    NoiseSpec noise;
    AlgoSpec algorithm;
    SamplingSpec sampling;
    SuccessSpec success;
    EnvSpec env;
    bool has_env = false;
    EvalSpec evaluation;
    std::string output_dir;
    std::string raw_text; // original document, copied into the run dir
};

namespace cfg_detail {

inline BaseLandscapeSpec parse_base_landscape(const json& j, const std::string& path) {
    BaseLandscapeSpec out;
    out.kind = get_req<std::string>(j, path, "kind");
    if (out.kind == "table") {
        check_keys(j, path, {"kind", "path", "sites", "wild_type"});
        out.path = get_req<std::string>(j, path, "path");
        out.sites = get_req<std::vector<int>>(j, path, "sites");
        out.wild_type = get_req<std::string>(j, path, "wild_type");
    } else if (out.kind == "nk") {
        check_keys(j, path, {"kind", "n", "k", "seed"});
        out.nk_n = get_req<int>(j, path, "n");
        out.nk_k = get_req<int>(j, path, "k");
        out.nk_seed = get_req<uint64_t>(j, path, "seed");
    } else if (out.kind == "phoq_like") {
        check_keys(j, path, {"kind", "seed", "sites", "sequence_length", "high_fraction",
                             "mid_fraction", "low_fraction", "coverage"});
        out.phoq_seed = get_req<uint64_t>(j, path, "seed");
        out.phoq.num_sites = get_or<int>(j, path, "sites", 4);
        out.phoq.sequence_length = get_or<int>(j, path, "sequence_length", out.phoq.num_sites);
        out.phoq.high_fraction = get_or<double>(j, path, "high_fraction", 0.01);
        out.phoq.mid_fraction = get_or<double>(j, path, "mid_fraction", 0.20);
        out.phoq.low_fraction = get_or<double>(j, path, "low_fraction", 0.30);
        out.phoq.coverage = get_or<double>(j, path, "coverage", 1.0);
    } else {
        throw InvalidConfig("unknown landscape kind '" + out.kind + "' at " + path + ".kind");
    }
    return out;
}

inline LandscapeSpec parse_landscape(const json& j, const std::string& path) {
    LandscapeSpec out;
    const std::string kind = get_req<std::string>(j, path, "kind");
    if (kind == "threshold") {
        check_keys(j, path, {"kind", "lambda", "scale", "base"});
        out.threshold_wrap = true;
        out.lambda = get_or<double>(j, path, "lambda", 0.4);
        out.scale = get_or<double>(j, path, "scale", 1.0);
        require<InvalidConfig>(j.contains("base"), "missing required key '" + path + ".base'");
        out.base = parse_base_landscape(j.at("base"), path + ".base");
    } else {
        out.base = parse_base_landscape(j, path);
    }
    return out;
}

inline RLConfig parse_rl(const json& j, const std::string& path) {
    RLConfig rl;
    rl.clip_eps = get_or<double>(j, path, "clip_eps", rl.clip_eps);
    rl.kl_coeff = get_or<double>(j, path, "kl_coeff", rl.kl_coeff);
    rl.value_coeff = get_or<double>(j, path, "value_coeff", rl.value_coeff);
    rl.entropy_coeff = get_or<double>(j, path, "entropy_coeff", rl.entropy_coeff);
    rl.entropy_is_bonus = get_or<bool>(j, path, "entropy_is_bonus", rl.entropy_is_bonus);
    rl.kl_clamp = get_or<double>(j, path, "kl_clamp", rl.kl_clamp);
    const std::string anchor = get_or<std::string>(j, path, "kl_anchor", "reference");
    if (anchor == "reference") rl.kl_anchor = KlAnchor::reference;
    else if (anchor == "old_policy") rl.kl_anchor = KlAnchor::old_policy;
    else throw InvalidConfig("unknown kl_anchor '" + anchor + "' at " + path + ".kl_anchor");
    rl.gamma = get_or<double>(j, path, "gamma", rl.gamma);
    rl.gae_lambda = get_or<double>(j, path, "gae_lambda", rl.gae_lambda);
    rl.standardize_returns = get_or<bool>(j, path, "standardize_returns", rl.standardize_returns);
    rl.rank_normalize = get_or<bool>(j, path, "rank_normalize", rl.rank_normalize);
    rl.group_size = get_or<int>(j, path, "group_size", rl.group_size);
    rl.dpo_beta = get_or<double>(j, path, "dpo_beta", rl.dpo_beta);
    rl.dpo_reg_lambda = get_or<double>(j, path, "dpo_reg_lambda", rl.dpo_reg_lambda);
    rl.dpo_quantile = get_or<double>(j, path, "dpo_quantile", rl.dpo_quantile);
    rl.dpo_samples_per_round = get_or<int>(j, path, "dpo_samples_per_round",
                                           rl.dpo_samples_per_round);
    rl.dpo_steps_per_round = get_or<int>(j, path, "dpo_steps_per_round", rl.dpo_steps_per_round);
    rl.learning_rate = get_or<double>(j, path, "learning_rate", rl.learning_rate);
    const std::string opt = get_or<std::string>(j, path, "optimizer", "adam");
    if (opt == "adam") rl.optimizer = Optimizer::adam;
    else if (opt == "sgd") rl.optimizer = Optimizer::sgd;
    else throw InvalidConfig("unknown optimizer '" + opt + "' at " + path + ".optimizer");
    rl.batch_size = get_or<int>(j, path, "batch_size", rl.batch_size);
    rl.ppo_epochs = get_or<int>(j, path, "ppo_epochs", rl.ppo_epochs);
    rl.sample_temperature = get_or<double>(j, path, "sample_temperature", rl.sample_temperature);
    rl.sample_top_p = get_or<double>(j, path, "sample_top_p", rl.sample_top_p);
    return rl;
}

} // namespace cfg_detail

inline ExperimentConfig parse_config(const std::string& text) {
    using namespace cfg_detail;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }

    check_keys(j, "config",
               {"schema_version", "experiment", "seed", "task", "policy", "landscape", "noise",
                "algorithm", "sampling", "success", "env", "evaluation", "output_dir"});

    ExperimentConfig out;
    out.raw_text = text;
    const int version = get_req<int>(j, "config", "schema_version");
    require<InvalidConfig>(version == kConfigSchemaVersion,
                           "unsupported schema_version " + std::to_string(version));
    out.name = get_req<std::string>(j, "config", "experiment");
    out.seed = get_req<uint64_t>(j, "config", "seed");
    const std::string task = get_req<std::string>(j, "config", "task");
    if (task == "generation") out.task = TaskKind::generation;
    else if (task == "mutation") out.task = TaskKind::mutation;
    else throw InvalidConfig("unknown task '" + task + "'");
    out.output_dir = get_or<std::string>(j, "config", "output_dir", std::string{});

    {
        const json& p = j.at("policy");
        check_keys(p, "policy", {"family", "length", "alphabet", "position_weight"});
        out.policy.family =
            policy_family_from_string(get_req<std::string>(p, "policy", "family"));
        out.policy.length = get_req<int>(p, "policy", "length");
        out.policy.alphabet = get_or<std::string>(p, "policy", "alphabet",
                                                  Alphabet::amino_acids().symbols());
        out.policy.position_weight = get_or<double>(p, "policy", "position_weight", 0.5);
    }

    require<InvalidConfig>(j.contains("landscape"), "missing required key 'config.landscape'");
    out.landscape = parse_landscape(j.at("landscape"), "landscape");

    if (j.contains("noise")) {
        const json& n = j.at("noise");
        check_keys(n, "noise", {"noise_sd", "corruption_rate", "flip_threshold", "seed"});
        out.noise.enabled = true;
        out.noise.noise_sd = get_or<double>(n, "noise", "noise_sd", 0.0);
        out.noise.corruption_rate = get_or<double>(n, "noise", "corruption_rate", 0.0);
        out.noise.flip_threshold = get_or<double>(n, "noise", "flip_threshold", 0.0);
        out.noise.seed = get_or<uint64_t>(n, "noise", "seed", 0);
    }

    {
        require<InvalidConfig>(j.contains("algorithm"), "missing required key 'config.algorithm'");
        const json& a = j.at("algorithm");
        check_keys(a, "algorithm",
                   {"name", "steps", "clip_eps", "kl_coeff", "value_coeff", "entropy_coeff",
                    "entropy_is_bonus", "kl_clamp", "kl_anchor", "gamma", "gae_lambda",
                    "standardize_returns", "rank_normalize", "group_size", "dpo_beta",
                    "dpo_reg_lambda", "dpo_quantile", "dpo_samples_per_round",
                    "dpo_steps_per_round", "learning_rate", "optimizer", "batch_size",
                    "ppo_epochs", "sample_temperature", "sample_top_p"});
        out.algorithm.name = algo_from_string(get_req<std::string>(a, "algorithm", "name"));
        out.algorithm.steps = get_req<int>(a, "algorithm", "steps");
        require<InvalidConfig>(out.algorithm.steps >= 0, "algorithm.steps must be >= 0");
        out.algorithm.rl = parse_rl(a, "algorithm");
        out.algorithm.rl.validate();
    }

    {
        require<InvalidConfig>(j.contains("sampling"), "missing required key 'config.sampling'");
        const json& s = j.at("sampling");
        check_keys(s, "sampling",
                   {"temperature", "top_p", "samples_per_context", "k_max", "contexts"});
        out.sampling.temperature = get_or<double>(s, "sampling", "temperature", 1.0);
        out.sampling.top_p = get_or<double>(s, "sampling", "top_p", 1.0);
        out.sampling.samples_per_context = get_req<int>(s, "sampling", "samples_per_context");
        out.sampling.k_max = get_req<int>(s, "sampling", "k_max");
        out.sampling.contexts = get_or<int>(s, "sampling", "contexts", 64);
        require<InvalidConfig>(out.sampling.temperature > 0.0, "sampling.temperature must be > 0");
        require<InvalidConfig>(out.sampling.top_p > 0.0 && out.sampling.top_p <= 1.0,
                               "sampling.top_p must lie in (0, 1]");
        require<InvalidConfig>(out.sampling.samples_per_context >= 1,
                               "sampling.samples_per_context must be >= 1");
        require<InvalidConfig>(out.sampling.k_max >= 1 &&
                                   out.sampling.k_max <= out.sampling.samples_per_context,
                               "sampling.k_max must lie in [1, samples_per_context]");
        require<InvalidConfig>(out.sampling.contexts >= 1, "sampling.contexts must be >= 1");
    }

    {
        require<InvalidConfig>(j.contains("success"), "missing required key 'config.success'");
        const json& s = j.at("success");
        check_keys(s, "success", {"threshold", "strict"});
        out.success.threshold = get_req<double>(s, "success", "threshold");
        out.success.strict = get_or<bool>(s, "success", "strict", true);
    }

    if (j.contains("env")) {
        const json& e = j.at("env");
        check_keys(e, "env",
                   {"max_steps", "mask", "reward_mode", "terminate_on_improvement",
                    "position_threshold", "anneal", "pool"});
        out.has_env = true;
        out.env.max_steps = get_or<int>(e, "env", "max_steps", 4);
        out.env.mask = get_req<std::string>(e, "env", "mask");
        const std::string mode = get_or<std::string>(e, "env", "reward_mode", "per_step");
        if (mode == "per_step") out.env.reward_mode = RewardMode::per_step;
        else if (mode == "terminal_only") out.env.reward_mode = RewardMode::terminal_only;
        else throw InvalidConfig("unknown reward_mode '" + mode + "' at env.reward_mode");
        out.env.terminate_on_improvement =
            get_or<bool>(e, "env", "terminate_on_improvement", false);
        out.env.position_threshold = get_or<double>(e, "env", "position_threshold", 0.5);
        if (e.contains("anneal")) {
            const json& an = e.at("anneal");
            check_keys(an, "env.anneal", {"start", "end", "horizon_steps"});
            out.env.anneal.start = get_or<double>(an, "env.anneal", "start", 1.0);
            out.env.anneal.end = get_or<double>(an, "env.anneal", "end", 0.5);
            out.env.anneal.horizon_steps = get_or<int>(an, "env.anneal", "horizon_steps", 1000);
        }
        require<InvalidConfig>(e.contains("pool"), "missing required key 'env.pool'");
        const json& p = e.at("pool");
        check_keys(p, "env.pool", {"source", "per_bin", "sequences"});
        out.env.pool.source = get_req<std::string>(p, "env.pool", "source");
        if (out.env.pool.source == "bins") {
            out.env.pool.per_bin = get_or<int>(p, "env.pool", "per_bin", 100);
        } else if (out.env.pool.source == "list") {
            out.env.pool.sequences =
                get_req<std::vector<std::string>>(p, "env.pool", "sequences");
            require<InvalidConfig>(!out.env.pool.sequences.empty(),
                                   "env.pool.sequences must not be empty");
        } else {
            throw InvalidConfig("unknown pool source '" + out.env.pool.source + "'");
        }
    }
    require<InvalidConfig>(out.task != TaskKind::mutation || out.has_env,
                           "mutation task requires an env section");
    require<InvalidConfig>(out.task != TaskKind::generation || !out.has_env,
                           "generation task must not carry an env section");

    if (j.contains("evaluation")) {
        const json& e = j.at("evaluation");
        check_keys(e, "evaluation",
                   {"reference_path", "native", "diversity_max_samples", "entropy_positions"});
        out.evaluation.reference_path = get_or<std::string>(e, "evaluation", "reference_path", "");
        out.evaluation.native = get_or<std::string>(e, "evaluation", "native", "");
        out.evaluation.diversity_max_samples =
            get_or<int>(e, "evaluation", "diversity_max_samples", 256);
        out.evaluation.entropy_positions =
            get_or<std::vector<int>>(e, "evaluation", "entropy_positions", {});
        require<InvalidConfig>(out.evaluation.diversity_max_samples >= 2,
                               "evaluation.diversity_max_samples must be >= 2");
    }

    return out;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path));
}

// ----------------------------------------------------- built landscape

/// The concrete oracle chain built from a config: the base landscape kept
/// alive by shared ownership inside the reward closures.
struct BuiltOracle {
    RewardFn true_reward;     // evaluation and success predicates
    RewardFn training_reward; // noise-wrapped when configured
    std::shared_ptr<TableLandscape> table; // set for table-backed landscapes
};

inline BuiltOracle build_oracle(const ExperimentConfig& cfg, const Alphabet& alphabet) {
    BuiltOracle out;
    const BaseLandscapeSpec& base = cfg.landscape.base;

    RewardFn base_fn;
    if (base.kind == "table") {
        std::vector<int> sites = base.sites;
        auto land = std::make_shared<TableLandscape>(load_landscape_csv(
            base.path, sites, encode(alphabet, base.wild_type), alphabet));
        base_fn = [land](const Sequence& s) { return land->fitness(s); };
        out.table = land;
    } else if (base.kind == "nk") {
        auto land = std::make_shared<NKLandscape>(base.nk_n, base.nk_k, alphabet.size(),
                                                  base.nk_seed);
        base_fn = [land](const Sequence& s) { return land->fitness(s); };
    } else if (base.kind == "phoq_like") {
        auto land = std::make_shared<TableLandscape>(
            make_phoq_like(base.phoq, alphabet, base.phoq_seed));
        base_fn = [land](const Sequence& s) { return land->fitness(s); };
        out.table = land;
    } else {
        throw InvalidConfig("unknown landscape kind '" + base.kind + "'");
    }

    if (cfg.landscape.threshold_wrap) {
        const double lambda = cfg.landscape.lambda;
        const double scale = cfg.landscape.scale;
        require<InvalidConfig>(scale > 0.0, "landscape.scale must be positive");
        out.true_reward = [base_fn, lambda, scale](const Sequence& s) {
            return 2.0 * (base_fn(s) / scale - lambda);
        };
    } else {
        out.true_reward = base_fn;
    }

    if (cfg.noise.enabled) {
        auto noisy = std::make_shared<NoisyOracle>(out.true_reward, cfg.noise.noise_sd,
                                                   cfg.noise.corruption_rate,
                                                   cfg.noise.flip_threshold, cfg.noise.seed);
        out.training_reward = [noisy](const Sequence& s) { return noisy->reward(s); };
    } else {
        out.training_reward = out.true_reward;
    }
    return out;
}

inline SuccessPredicate success_predicate(const ExperimentConfig& cfg, const RewardFn& reward) {
    const double threshold = cfg.success.threshold;
    const bool strict = cfg.success.strict;
    return [reward, threshold, strict](const Sequence& s) {
        const double r = reward(s);
        return strict ? r > threshold : r >= threshold;
    };
}

inline BoolMask parse_mask(const std::string& text, int length) {
    require<InvalidConfig>(static_cast<int>(text.size()) == length,
                           "env.mask length must equal the policy length");
    BoolMask mask(text.size());
    int ones = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        require<InvalidConfig>(text[i] == '0' || text[i] == '1',
                               "env.mask must contain only '0' and '1'");
        mask[i] = text[i] == '1';
        ones += mask[i] ? 1 : 0;
    }
    require<InvalidConfig>(ones >= 1, "env.mask must enable at least one position");
    return mask;
}

inline std::vector<Sequence> build_pool(const ExperimentConfig& cfg, const BuiltOracle& oracle,
                                        const Alphabet& alphabet) {
    if (cfg.env.pool.source == "list") {
        std::vector<Sequence> pool;
        for (const auto& text : cfg.env.pool.sequences) {
            Sequence s = encode(alphabet, text);
            require<InvalidConfig>(s.length() == cfg.policy.length,
                                   "pool sequence '" + text + "' length mismatch");
            pool.push_back(std::move(s));
        }
        return pool;
    }
    require<InvalidConfig>(oracle.table != nullptr,
                           "env.pool.source 'bins' requires a table-backed landscape");
    RngStream rng(cfg.seed, 0xB1A5ull);
    return stratified_seed_pool(*oracle.table, cfg.env.pool.per_bin, rng);
}

inline MutationEnv build_env(const ExperimentConfig& cfg, const BuiltOracle& oracle,
                             const Alphabet& alphabet, bool training) {
    return MutationEnv(build_pool(cfg, oracle, alphabet),
                       parse_mask(cfg.env.mask, cfg.policy.length), cfg.env.max_steps,
                       training ? oracle.training_reward : oracle.true_reward,
                       cfg.env.reward_mode, cfg.env.terminate_on_improvement,
                       cfg.env.position_threshold);
}

inline AnyPolicy init_policy(const ExperimentConfig& cfg) {
    const int L = cfg.policy.length;
    const int A = static_cast<int>(cfg.policy.alphabet.size());
    switch (cfg.policy.family) {
        case PolicyFamily::position_categorical: return PositionCategoricalPolicy(L, A);
        case PolicyFamily::markov: return MarkovPolicy(L, A);
        case PolicyFamily::mutation: return MutationPolicy(L, A, cfg.policy.position_weight);
    }
    throw InvalidConfig("unknown policy family");
}

// ------------------------------------------------------------ manifest

struct ManifestEntry {
    std::string path;
    std::string sha256;
    uint64_t bytes = 0;
};

struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string config_sha256;
    std::string started_at;
    std::string finished_at;
    std::vector<ManifestEntry> files;
};

namespace detail {

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace detail

inline std::string manifest_to_json(const RunManifest& manifest) {
    ordered_json j;
    j["tool_version"] = manifest.tool_version;
    j["config_sha256"] = manifest.config_sha256;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["files"] = ordered_json::array();
    for (const auto& f : manifest.files) {
        ordered_json entry;
        entry["path"] = f.path;
        entry["sha256"] = f.sha256;
        entry["bytes"] = f.bytes;
        j["files"].push_back(entry);
    }
    return j.dump(2) + "\n";
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
    }
    RunManifest out;
    out.tool_version = j.at("tool_version").get<std::string>();
    out.config_sha256 = j.at("config_sha256").get<std::string>();
    out.started_at = j.at("started_at").get<std::string>();
    out.finished_at = j.at("finished_at").get<std::string>();
    for (const auto& f : j.at("files")) {
        out.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                             f.at("bytes").get<uint64_t>()});
    }
    return out;
}

/// Emits files into a run directory and records their digests; everything
/// is written atomically and inventoried for verify-manifest.
class RunWriter {
public:
    RunWriter(std::filesystem::path dir, const std::string& config_text)
        : dir_(std::move(dir)) {
        manifest_.config_sha256 = sha256_hex(config_text);
        manifest_.started_at = detail::utc_timestamp();
        std::filesystem::create_directories(dir_);
        write("config.json", config_text);
    }

    const std::filesystem::path& dir() const { return dir_; }

    void write(const std::string& relative, std::string_view content) {
        atomic_write_file(dir_ / relative, content);
        for (auto& f : manifest_.files) {
            if (f.path == relative) { // overwrite refreshes the inventory
                f.sha256 = sha256_hex(content);
                f.bytes = content.size();
                return;
            }
        }
        manifest_.files.push_back({relative, sha256_hex(content), content.size()});
    }

    std::filesystem::path finalize() {
        manifest_.finished_at = detail::utc_timestamp();
        std::sort(manifest_.files.begin(), manifest_.files.end(),
                  [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
        atomic_write_file(dir_ / "manifest.json", manifest_to_json(manifest_));
        return dir_ / "manifest.json";
    }

private:
    std::filesystem::path dir_;
    RunManifest manifest_;
};

struct VerifyResult {
    bool ok = true;
    std::vector<std::string> problems;
};

inline VerifyResult verify_manifest(const std::filesystem::path& target) {
    namespace fs = std::filesystem;
    fs::path manifest_path = fs::is_directory(target) ? target / "manifest.json" : target;
    const fs::path dir = manifest_path.parent_path();
    RunManifest manifest = load_manifest(manifest_path);

    VerifyResult out;
    for (const auto& entry : manifest.files) {
        const fs::path p = dir / entry.path;
        if (!fs::exists(p)) {
            out.ok = false;
            out.problems.push_back(entry.path + ": missing");
            continue;
        }
        const std::string content = read_file(p);
        if (content.size() != entry.bytes) {
            out.ok = false;
            out.problems.push_back(entry.path + ": size mismatch");
            continue;
        }
        if (sha256_hex(content) != entry.sha256) {
            out.ok = false;
            out.problems.push_back(entry.path + ": digest mismatch");
        }
    }
    return out;
}

// ------------------------------------------------------------ commands

struct CliOverrides {
    std::optional<uint64_t> seed;
    std::optional<std::string> out_dir;
    int workers = 1;
    std::optional<std::string> model_tag;
};

namespace detail {

inline ExperimentConfig apply_overrides(ExperimentConfig cfg, const CliOverrides& overrides) {
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.out_dir) cfg.output_dir = *overrides.out_dir;
    require<InvalidConfig>(!cfg.output_dir.empty(),
                           "no output directory (set output_dir in the config or pass --out)");
    require<InvalidConfig>(overrides.workers >= 1, "--workers must be >= 1");
    return cfg;
}

/// config.seed overrides serialized into the copied config document, so a
/// run directory is self-describing even when --seed was passed.
inline std::string effective_config_text(const ExperimentConfig& cfg) {
    ordered_json j = ordered_json::parse(cfg.raw_text);
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

template <class Fn>
void parallel_for(int count, int workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    const int n_threads = std::min(workers, count);
    threads.reserve(static_cast<size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
        threads.emplace_back([&fn, w, count, n_threads] {
            for (int i = w; i < count; i += n_threads) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

} // namespace detail

struct TrainOutcome {
    std::filesystem::path run_dir;
    std::filesystem::path checkpoint_init;
    std::filesystem::path checkpoint_final;
    std::filesystem::path report_csv;
    TrainingReport report;
};

inline TrainOutcome cmd_train(const ExperimentConfig& base_cfg, const CliOverrides& overrides) {
    const ExperimentConfig cfg = detail::apply_overrides(base_cfg, overrides);
    const Alphabet alphabet(cfg.policy.alphabet);
    require<InvalidConfig>(cfg.policy.family != PolicyFamily::mutation ||
                               cfg.task == TaskKind::mutation,
                           "mutation policies require the mutation task");
    require<InvalidConfig>(cfg.task != TaskKind::mutation ||
                               cfg.policy.family == PolicyFamily::mutation,
                           "the mutation task requires a mutation policy");

    BuiltOracle oracle = build_oracle(cfg, alphabet);
    AnyPolicy policy = init_policy(cfg);

    RunWriter writer(cfg.output_dir, detail::effective_config_text(cfg));
    writer.write("checkpoint_init.txt", checkpoint_to_string(policy, alphabet));

    TrainOutcome outcome;
    outcome.run_dir = writer.dir();
    outcome.checkpoint_init = writer.dir() / "checkpoint_init.txt";

    RngStream rng(cfg.seed, 0);
    try {
        if (cfg.task == TaskKind::generation) {
            if (auto* pc = std::get_if<PositionCategoricalPolicy>(&policy)) {
                outcome.report = train_sequence(*pc, cfg.algorithm.name, oracle.training_reward,
                                                cfg.algorithm.rl, cfg.algorithm.steps, rng);
            } else {
                auto& mk = std::get<MarkovPolicy>(policy);
                outcome.report = train_sequence(mk, cfg.algorithm.name, oracle.training_reward,
                                                cfg.algorithm.rl, cfg.algorithm.steps, rng);
            }
        } else {
            auto& mp = std::get<MutationPolicy>(policy);
            MutationEnv env = build_env(cfg, oracle, alphabet, /*training=*/true);
            outcome.report = train_mutation(mp, cfg.algorithm.name, env, cfg.algorithm.rl,
                                            cfg.env.anneal, cfg.algorithm.steps, rng);
        }
    } catch (const DivergedError&) {
        // The trainer restored the last good parameters; persist them so
        // the run is resumable, then surface the divergence.
        writer.write("checkpoint_last_good.txt", checkpoint_to_string(policy, alphabet));
        writer.finalize();
        throw;
    }

    writer.write("checkpoint_final.txt", checkpoint_to_string(policy, alphabet));
    writer.write("training_report.csv", training_report_to_csv(outcome.report));
    writer.finalize();

    outcome.checkpoint_final = writer.dir() / "checkpoint_final.txt";
    outcome.report_csv = writer.dir() / "training_report.csv";
    return outcome;
}

struct SampleOutcome {
    std::filesystem::path run_dir;
    std::filesystem::path log_path;
    SampleLog log;
};

inline SampleOutcome cmd_sample(const std::filesystem::path& checkpoint_path,
                                const ExperimentConfig& base_cfg,
                                const CliOverrides& overrides) {
    const ExperimentConfig cfg = detail::apply_overrides(base_cfg, overrides);
    const Alphabet alphabet(cfg.policy.alphabet);

    LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    require<InvalidConfig>(loaded.alphabet == cfg.policy.alphabet,
                           "checkpoint alphabet differs from the config");
    require<InvalidConfig>(family_of(loaded.policy) == cfg.policy.family,
                           "checkpoint policy family differs from the config");
    std::visit(
        [&](const auto& p) {
            require<InvalidConfig>(p.length() == cfg.policy.length,
                                   "checkpoint length differs from the config");
        },
        loaded.policy);

    BuiltOracle oracle = build_oracle(cfg, alphabet);

    SampleLog log;
    log.model_tag = overrides.model_tag.value_or(checkpoint_path.stem().string());
    log.k_max = cfg.sampling.k_max;

    const int n = cfg.sampling.samples_per_context;
    if (cfg.task == TaskKind::generation) {
        const int contexts = cfg.sampling.contexts;
        std::vector<std::vector<SampleRecord>> rows(static_cast<size_t>(contexts));
        detail::parallel_for(contexts, overrides.workers, [&](int c) {
            RngStream rng = RngStream(cfg.seed, 1).split(static_cast<uint64_t>(c));
            std::vector<SampleRecord> samples;
            samples.reserve(static_cast<size_t>(n));
            std::visit(
                [&](const auto& p) {
                    using T = std::decay_t<decltype(p)>;
                    if constexpr (!std::is_same_v<T, MutationPolicy>) {
                        for (int i = 0; i < n; ++i) {
                            Sequence s = p.sample(cfg.sampling.temperature, cfg.sampling.top_p,
                                                  rng);
                            samples.push_back({s, p.log_prob(s)});
                        }
                    } else {
                        throw InvalidConfig(
                            "mutation checkpoints sample through the mutation task");
                    }
                },
                loaded.policy);
            rows[static_cast<size_t>(c)] = std::move(samples);
        });
        char id[16];
        for (int c = 0; c < contexts; ++c) {
            std::snprintf(id, sizeof(id), "ctx%04d", c);
            log.contexts.emplace_back(id, std::move(rows[static_cast<size_t>(c)]));
        }
        log.validate();
        RunWriter writer(cfg.output_dir, detail::effective_config_text(cfg));
        writer.write("samples.csv", sample_log_to_csv(log, alphabet));
        writer.finalize();
        return {writer.dir(), writer.dir() / "samples.csv", std::move(log)};
    }

    const auto& policy = std::get<MutationPolicy>(loaded.policy);
    std::vector<Sequence> pool = build_pool(cfg, oracle, alphabet);
    const int contexts = static_cast<int>(pool.size());
    // Sampling-time temperatures are fixed, not annealed.
    const AnnealSchedule fixed{cfg.sampling.temperature, cfg.sampling.temperature, 1};
    std::vector<std::vector<SampleRecord>> rows(static_cast<size_t>(contexts));
    std::vector<std::vector<Trajectory>> episodes(static_cast<size_t>(contexts));
    detail::parallel_for(contexts, overrides.workers, [&](int c) {
        RngStream rng = RngStream(cfg.seed, 1).split(static_cast<uint64_t>(c));
        MutationEnv env({pool[static_cast<size_t>(c)]},
                        parse_mask(cfg.env.mask, cfg.policy.length), cfg.env.max_steps,
                        oracle.true_reward, cfg.env.reward_mode,
                        cfg.env.terminate_on_improvement, cfg.env.position_threshold);
        std::vector<SampleRecord> samples;
        samples.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            Trajectory traj = rollout(env, policy, fixed, 0, rng);
            double lp = 0.0;
            for (double v : traj.log_probs_old) lp += v;
            samples.push_back({traj.final_state, lp});
            episodes[static_cast<size_t>(c)].push_back(std::move(traj));
        }
        rows[static_cast<size_t>(c)] = std::move(samples);
    });
    char id[16];
    std::vector<Trajectory> all_episodes;
    for (int c = 0; c < contexts; ++c) {
        std::snprintf(id, sizeof(id), "wt%04d", c);
        log.contexts.emplace_back(id, std::move(rows[static_cast<size_t>(c)]));
        for (auto& t : episodes[static_cast<size_t>(c)]) all_episodes.push_back(std::move(t));
    }
    log.validate();

    RunWriter writer(cfg.output_dir, detail::effective_config_text(cfg));
    writer.write("samples.csv", sample_log_to_csv(log, alphabet));
    writer.write("trajectories.csv", trajectory_log_to_csv(all_episodes, alphabet));
    writer.finalize();

    return {writer.dir(), writer.dir() / "samples.csv", std::move(log)};
}

struct EvaluateOutcome {
    std::filesystem::path run_dir;
    SupportReport support;
    std::vector<int> ks;
};

namespace detail {

inline std::vector<int> pass_at_k_grid(int k_max) {
    std::vector<int> ks;
    for (int k = 1; k <= k_max; k *= 2) ks.push_back(k);
    if (ks.back() != k_max) ks.push_back(k_max);
    return ks;
}

inline std::vector<std::vector<bool>> success_flags(const SampleLog& log,
                                                    const SuccessPredicate& success) {
    std::vector<std::vector<bool>> flags;
    flags.reserve(log.contexts.size());
    for (const auto& [id, samples] : log.contexts) {
        std::vector<bool> row;
        row.reserve(samples.size());
        for (const auto& rec : samples) row.push_back(success(rec.sequence));
        flags.push_back(std::move(row));
    }
    return flags;
}

struct ModelMetrics {
    double mean_reward = 0.0;
    double perplexity_value = 0.0;
    double diversity = 0.0;
    std::vector<double> entropy; // per requested position
    std::optional<double> novelty_value;
    std::optional<double> recovery;
};

inline ModelMetrics model_metrics(const SampleLog& log, const ExperimentConfig& cfg,
                                  const RewardFn& reward,
                                  const std::vector<Sequence>& reference,
                                  const std::vector<Sequence>& natives,
                                  const std::vector<int>& entropy_positions) {
    ModelMetrics out;

    std::vector<double> log_probs;
    std::vector<int> token_counts;
    std::vector<Sequence> all_samples;
    long total = 0;
    for (const auto& [id, samples] : log.contexts) {
        for (const auto& rec : samples) {
            out.mean_reward += reward(rec.sequence);
            ++total;
            log_probs.push_back(rec.log_prob);
            token_counts.push_back(rec.sequence.length());
            all_samples.push_back(rec.sequence);
        }
    }
    out.mean_reward /= static_cast<double>(total);
    out.perplexity_value = perplexity(log_probs, token_counts);

    double diversity_sum = 0.0;
    for (const auto& [id, samples] : log.contexts) {
        const size_t cap = std::min<size_t>(
            samples.size(), static_cast<size_t>(cfg.evaluation.diversity_max_samples));
        std::vector<Sequence> subset;
        subset.reserve(cap);
        for (size_t i = 0; i < cap; ++i) subset.push_back(samples[i].sequence);
        diversity_sum += subset.size() >= 2 ? pairwise_diversity(subset) : 0.0;
    }
    out.diversity = diversity_sum / static_cast<double>(log.contexts.size());

    out.entropy = positional_entropy(all_samples, entropy_positions);

    if (!reference.empty()) out.novelty_value = novelty(all_samples, reference);

    if (!natives.empty()) {
        require(natives.size() == 1 || natives.size() == log.contexts.size(),
                "native sequences must be one per context or a single sequence");
        double sum = 0.0;
        long count = 0;
        for (size_t c = 0; c < log.contexts.size(); ++c) {
            const Sequence& native = natives.size() == 1 ? natives[0] : natives[c];
            for (const auto& rec : log.contexts[c].second) {
                sum += recovery_rate(rec.sequence, native);
                ++count;
            }
        }
        out.recovery = sum / static_cast<double>(count);
    }
    return out;
}

} // namespace detail

inline EvaluateOutcome cmd_evaluate(const std::filesystem::path& base_log_path,
                                    const std::filesystem::path& tuned_log_path,
                                    const ExperimentConfig& base_cfg,
                                    const CliOverrides& overrides) {
    const ExperimentConfig cfg = detail::apply_overrides(base_cfg, overrides);
    const Alphabet alphabet(cfg.policy.alphabet);

    SampleLog base = load_sample_log(base_log_path, alphabet);
    SampleLog tuned = load_sample_log(tuned_log_path, alphabet);
    require(base.k_max >= cfg.sampling.k_max && tuned.k_max >= cfg.sampling.k_max,
            "sample logs carry fewer samples per context than sampling.k_max");

    BuiltOracle oracle = build_oracle(cfg, alphabet);
    SuccessPredicate success = success_predicate(cfg, oracle.true_reward);

    const auto base_flags = detail::success_flags(base, success);
    const auto tuned_flags = detail::success_flags(tuned, success);
    const auto ks = detail::pass_at_k_grid(cfg.sampling.k_max);

    std::ostringstream pass_csv;
    pass_csv << "k,base_plugin,base_unbiased,tuned_plugin,tuned_unbiased\n";
    ordered_json pass_json = ordered_json::array();
    for (int k : ks) {
        const double bp = pass_at_k(base_flags, k, PassAtKEstimator::plugin).mean;
        const double bu = pass_at_k(base_flags, k, PassAtKEstimator::unbiased).mean;
        const double tp = pass_at_k(tuned_flags, k, PassAtKEstimator::plugin).mean;
        const double tu = pass_at_k(tuned_flags, k, PassAtKEstimator::unbiased).mean;
        pass_csv << k << ',' << format_double(bp) << ',' << format_double(bu) << ','
                 << format_double(tp) << ',' << format_double(tu) << '\n';
        ordered_json row;
        row["k"] = k;
        row["base_plugin"] = bp;
        row["base_unbiased"] = bu;
        row["tuned_plugin"] = tp;
        row["tuned_unbiased"] = tu;
        pass_json.push_back(row);
    }

    SupportReport support = support_partition(base, tuned, success, cfg.sampling.k_max);

    std::ostringstream support_csv;
    support_csv << "k,preservation,expansion,shrinkage,out_of_support,esr,esr_reciprocal\n";
    support_csv << cfg.sampling.k_max << ',' << support.preservation << ',' << support.expansion
                << ',' << support.shrinkage << ',' << support.out_of_support << ','
                << format_double(support.esr) << ',' << format_double(esr_reciprocal(support))
                << '\n';

    std::vector<Sequence> reference;
    if (!cfg.evaluation.reference_path.empty()) {
        std::istringstream in(read_file(cfg.evaluation.reference_path));
        std::string line;
        while (std::getline(in, line)) {
            auto t = trim(line);
            if (t.empty() || t.front() == '#') continue;
            reference.push_back(encode(alphabet, t));
        }
        require<InvalidConfig>(!reference.empty(), "reference file has no sequences");
    }
    std::vector<Sequence> natives;
    if (!cfg.evaluation.native.empty()) {
        natives.push_back(encode(alphabet, cfg.evaluation.native));
    } else if (cfg.task == TaskKind::mutation) {
        natives = build_pool(cfg, oracle, alphabet); // per-context wild types
        require(natives.size() == base.contexts.size(),
                "pool size does not match the sample log contexts");
        if (reference.empty()) reference = natives;
    }

    std::vector<int> entropy_positions = cfg.evaluation.entropy_positions;
    if (entropy_positions.empty()) {
        entropy_positions.resize(static_cast<size_t>(cfg.policy.length));
        std::iota(entropy_positions.begin(), entropy_positions.end(), 0);
    }

    const auto base_metrics =
        detail::model_metrics(base, cfg, oracle.true_reward, reference, natives,
                              entropy_positions);
    const auto tuned_metrics =
        detail::model_metrics(tuned, cfg, oracle.true_reward, reference, natives,
                              entropy_positions);

    std::ostringstream metrics_csv;
    metrics_csv << "model,mean_reward,perplexity,diversity,novelty,recovery\n";
    auto metrics_row = [&](const std::string& tag, const detail::ModelMetrics& m) {
        metrics_csv << tag << ',' << format_double(m.mean_reward) << ','
                    << format_double(m.perplexity_value) << ',' << format_double(m.diversity)
                    << ',' << (m.novelty_value ? format_double(*m.novelty_value) : "nan") << ','
                    << (m.recovery ? format_double(*m.recovery) : "nan") << '\n';
    };
    metrics_row(base.model_tag, base_metrics);
    metrics_row(tuned.model_tag, tuned_metrics);

    std::ostringstream entropy_csv;
    entropy_csv << "model,position,entropy_nats\n";
    for (size_t i = 0; i < entropy_positions.size(); ++i)
        entropy_csv << base.model_tag << ',' << entropy_positions[i] << ','
                    << format_double(base_metrics.entropy[i]) << '\n';
    for (size_t i = 0; i < entropy_positions.size(); ++i)
        entropy_csv << tuned.model_tag << ',' << entropy_positions[i] << ','
                    << format_double(tuned_metrics.entropy[i]) << '\n';

    // Reward histogram over both models' samples, 20 equal-width bins.
    std::vector<double> base_rewards, tuned_rewards;
    for (const auto& [id, samples] : base.contexts)
        for (const auto& rec : samples) base_rewards.push_back(oracle.true_reward(rec.sequence));
    for (const auto& [id, samples] : tuned.contexts)
        for (const auto& rec : samples) tuned_rewards.push_back(oracle.true_reward(rec.sequence));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double r : base_rewards) { lo = std::min(lo, r); hi = std::max(hi, r); }
    for (double r : tuned_rewards) { lo = std::min(lo, r); hi = std::max(hi, r); }
    if (hi <= lo) hi = lo + 1.0;
    const int n_bins = 20;
    const double width = (hi - lo) / n_bins;
    auto histogram = [&](const std::vector<double>& rewards) {
        std::vector<long> counts(n_bins, 0);
        for (double r : rewards) {
            int b = std::min(n_bins - 1, static_cast<int>((r - lo) / width));
            counts[static_cast<size_t>(b)]++;
        }
        return counts;
    };
    std::ostringstream hist_csv;
    hist_csv << "model,bin_low,bin_high,count\n";
    auto hist_rows = [&](const std::string& tag, const std::vector<long>& counts) {
        for (int b = 0; b < n_bins; ++b)
            hist_csv << tag << ',' << format_double(lo + b * width) << ','
                     << format_double(lo + (b + 1) * width) << ','
                     << counts[static_cast<size_t>(b)] << '\n';
    };
    hist_rows(base.model_tag, histogram(base_rewards));
    hist_rows(tuned.model_tag, histogram(tuned_rewards));

    ordered_json summary;
    summary["base_model"] = base.model_tag;
    summary["tuned_model"] = tuned.model_tag;
    summary["contexts"] = base.context_count();
    summary["k_max"] = cfg.sampling.k_max;
    summary["pass_at_k"] = pass_json;
    ordered_json support_json;
    support_json["k"] = cfg.sampling.k_max;
    support_json["preservation"] = support.preservation;
    support_json["expansion"] = support.expansion;
    support_json["shrinkage"] = support.shrinkage;
    support_json["out_of_support"] = support.out_of_support;
    support_json["esr"] = format_double(support.esr);
    support_json["esr_reciprocal"] = format_double(esr_reciprocal(support));
    support_json["note"] =
        "esr = expansion / shrinkage; esr_reciprocal is shrinkage / expansion, reported to "
        "flag a transposed ratio";
    summary["support"] = support_json;
    auto metrics_json = [&](const detail::ModelMetrics& m) {
        ordered_json o;
        o["mean_reward"] = m.mean_reward;
        o["perplexity"] = m.perplexity_value;
        o["diversity"] = m.diversity;
        if (m.novelty_value) o["novelty"] = *m.novelty_value;
        if (m.recovery) o["recovery"] = *m.recovery;
        ordered_json ent = ordered_json::array();
        for (size_t i = 0; i < entropy_positions.size(); ++i) {
            ordered_json e;
            e["position"] = entropy_positions[i];
            e["entropy_nats"] = m.entropy[i];
            ent.push_back(e);
        }
        o["positional_entropy"] = ent;
        return o;
    };
    summary["metrics"] = ordered_json::object();
    summary["metrics"][base.model_tag] = metrics_json(base_metrics);
    summary["metrics"][tuned.model_tag] = metrics_json(tuned_metrics);

    RunWriter writer(cfg.output_dir, detail::effective_config_text(cfg));
    writer.write("pass_at_k.csv", pass_csv.str());
    writer.write("support.csv", support_csv.str());
    writer.write("metrics.csv", metrics_csv.str());
    writer.write("positional_entropy.csv", entropy_csv.str());
    writer.write("reward_histogram.csv", hist_csv.str());
    writer.write("summary.json", summary.dump(2) + "\n");
    writer.finalize();

    return {writer.dir(), support, ks};
}

struct MakeLandscapeParams {
    std::string kind = "phoq_like"; // phoq_like | nk
    std::string alphabet = "ACDEFGHIKLMNPQRSTVWY";
    PhoqLikeParams phoq;
    int nk_n = 6;
    int nk_k = 1;
};

inline std::filesystem::path cmd_make_landscape(const MakeLandscapeParams& params, uint64_t seed,
                                                const std::filesystem::path& out_path) {
    const Alphabet alphabet(params.alphabet);
    if (params.kind == "phoq_like") {
        save_landscape_csv(make_phoq_like(params.phoq, alphabet, seed), alphabet, out_path);
        return out_path;
    }
    if (params.kind == "nk") {
        // Exhaustive variant table over the full space of the NK landscape.
        NKLandscape land(params.nk_n, params.nk_k, alphabet.size(), seed);
        double total_d = std::pow(static_cast<double>(alphabet.size()), params.nk_n);
        require<InvalidConfig>(total_d <= 1e6, "nk table too large to materialize");
        const uint64_t total = static_cast<uint64_t>(total_d);

        std::vector<int> sites(static_cast<size_t>(params.nk_n));
        std::iota(sites.begin(), sites.end(), 0);
        Sequence wild_type{std::vector<int>(static_cast<size_t>(params.nk_n), 0)};
        TableLandscape table(sites, wild_type, alphabet.size());
        for (uint64_t v = 0; v < total; ++v) {
            std::vector<int> residues(static_cast<size_t>(params.nk_n));
            uint64_t rem = v;
            for (size_t i = residues.size(); i-- > 0;) {
                residues[i] = static_cast<int>(rem % static_cast<uint64_t>(alphabet.size()));
                rem /= static_cast<uint64_t>(alphabet.size());
            }
            Sequence s = wild_type;
            for (size_t i = 0; i < residues.size(); ++i) s[static_cast<int>(i)] = residues[i];
            table.insert(residues, land.fitness(s));
        }
        save_landscape_csv(table, alphabet, out_path);
        return out_path;
    }
    throw InvalidConfig("unknown landscape kind '" + params.kind + "'");
}

} // namespace seqrl
