#include <doctest.h>

#include <seqrl/experiment.hpp>

#include "test_util.hpp"

#include <chrono>
#include <filesystem>

using namespace seqrl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "seqrl_test_experiment" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Three-armed bandit over a one-site table landscape: A -> 0, C -> 1, D -> 0.
std::string bandit_config(const fs::path& table_csv, const std::string& out_dir) {
    return std::string(R"({
  "schema_version": 1,
  "experiment": "bandit-smoke",
  "seed": 42,
  "task": "generation",
  "policy": { "family": "position_categorical", "length": 1, "alphabet": "ACD" },
  "landscape": { "kind": "table", "path": ")") +
           table_csv.string() + R"(", "sites": [0], "wild_type": "A" },
  "algorithm": { "name": "ppo", "steps": 500, "learning_rate": 0.005, "kl_coeff": 0.0,
                 "value_coeff": 0.25, "entropy_coeff": 0.0, "batch_size": 64,
                 "ppo_epochs": 2 },
  "sampling": { "samples_per_context": 8, "k_max": 4, "contexts": 6 },
  "success": { "threshold": 0.5 },
  "output_dir": ")" + out_dir + R"("
})";
}

std::string read_bytes(const fs::path& p) { return read_file(p); }

} // namespace

TEST_CASE("sha256 matches the reference vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // Multi-block input (> 64 bytes).
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("config parsing rejects unknown keys with field paths") {
    auto dir = temp_dir("cfg");
    auto table = dir / "t.csv";
    atomic_write_file(table, "A,0\nC,1\nD,0\n");
    auto good = parse_config(bandit_config(table, (dir / "run").string()));
    CHECK(good.name == "bandit-smoke");
    CHECK(good.task == TaskKind::generation);
    CHECK(good.algorithm.rl.batch_size == 64);

    try {
        parse_config(R"({"schema_version": 1, "experiment": "x", "seed": 1,
                         "task": "generation", "typo_key": 3})");
        FAIL("expected InvalidConfig");
    } catch (const InvalidConfig& e) {
        CHECK(std::string(e.what()).find("config.typo_key") != std::string::npos);
    }

    try {
        auto text = bandit_config(table, (dir / "run").string());
        auto j = nlohmann::json::parse(text);
        j["algorithm"]["clip_epsilon"] = 0.3; // misspelled hyperparameter
        parse_config(j.dump());
        FAIL("expected InvalidConfig");
    } catch (const InvalidConfig& e) {
        CHECK(std::string(e.what()).find("algorithm.clip_epsilon") != std::string::npos);
    }

    // Mutation task requires an env section; generation must not carry one.
    try {
        auto j = nlohmann::json::parse(bandit_config(table, (dir / "run").string()));
        j["task"] = "mutation";
        parse_config(j.dump());
        FAIL("expected InvalidConfig");
    } catch (const InvalidConfig& e) {
        CHECK(std::string(e.what()).find("env") != std::string::npos);
    }
}

TEST_CASE("zero-step training writes a final checkpoint equal to the initial one") {
    auto dir = temp_dir("zerostep");
    auto table = dir / "t.csv";
    atomic_write_file(table, "A,0\nC,1\nD,0\n");
    auto j = nlohmann::json::parse(bandit_config(table, (dir / "run").string()));
    j["algorithm"]["steps"] = 0;
    auto cfg = parse_config(j.dump());

    auto outcome = cmd_train(cfg, {});
    CHECK(read_bytes(outcome.checkpoint_init) == read_bytes(outcome.checkpoint_final));
    CHECK(outcome.report.steps.empty());
}

TEST_CASE("training runs are deterministic and their manifests verify") {
    auto dir = temp_dir("determinism");
    auto table = dir / "t.csv";
    atomic_write_file(table, "A,0\nC,1\nD,0\n");

    auto j = nlohmann::json::parse(bandit_config(table, ""));
    j["algorithm"]["steps"] = 40;

    CliOverrides first;
    first.out_dir = (dir / "run_a").string();
    auto a = cmd_train(parse_config(j.dump()), first);

    CliOverrides second;
    second.out_dir = (dir / "run_b").string();
    auto b = cmd_train(parse_config(j.dump()), second);

    CHECK(read_bytes(a.report_csv) == read_bytes(b.report_csv));
    CHECK(read_bytes(a.checkpoint_final) == read_bytes(b.checkpoint_final));
    CHECK(read_bytes(a.run_dir / "config.json") == read_bytes(b.run_dir / "config.json"));

    auto verify = verify_manifest(a.run_dir);
    CHECK(verify.ok);

    // A seed override changes the outputs and is recorded in the config copy.
    CliOverrides reseeded;
    reseeded.out_dir = (dir / "run_c").string();
    reseeded.seed = 43;
    auto c = cmd_train(parse_config(j.dump()), reseeded);
    CHECK(read_bytes(a.report_csv) != read_bytes(c.report_csv));
    CHECK(read_bytes(c.run_dir / "config.json").find("43") != std::string::npos);
}

TEST_CASE("bandit training shows a monotone reward trend") {
    auto dir = temp_dir("smoke");
    auto table = dir / "t.csv";
    atomic_write_file(table, "A,0\nC,1\nD,0\n");
    auto cfg = parse_config(bandit_config(table, (dir / "run").string()));

    auto outcome = cmd_train(cfg, {});
    REQUIRE(outcome.report.steps.size() == 500);
    std::vector<double> steps, rewards;
    for (const auto& m : outcome.report.steps) {
        steps.push_back(m.step);
        rewards.push_back(m.mean_reward);
    }
    CHECK(testutil::spearman_rho(steps, rewards) > 0.8);
    CHECK(outcome.report.final_mean_reward() > 0.9);
}

TEST_CASE("manifest verification detects tampering") {
    auto dir = temp_dir("tamper");
    auto table = dir / "t.csv";
    atomic_write_file(table, "A,0\nC,1\nD,0\n");
    auto j = nlohmann::json::parse(bandit_config(table, (dir / "run").string()));
    j["algorithm"]["steps"] = 2;
    auto outcome = cmd_train(parse_config(j.dump()), {});

    CHECK(verify_manifest(outcome.run_dir).ok);
    atomic_write_file(outcome.run_dir / "training_report.csv", "corrupted\n");
    auto result = verify_manifest(outcome.run_dir);
    CHECK(!result.ok);
    REQUIRE(!result.problems.empty());
    CHECK(result.problems.front().find("training_report.csv") != std::string::npos);
}

TEST_CASE("sampling emits one record per context per draw, deterministically") {
    auto dir = temp_dir("sampling");
    auto table = dir / "t.csv";
    atomic_write_file(table, "A,0\nC,1\nD,0\n");
    auto j = nlohmann::json::parse(bandit_config(table, (dir / "run").string()));
    j["algorithm"]["steps"] = 0;
    j["sampling"]["samples_per_context"] = 1;
    j["sampling"]["k_max"] = 1;
    j["sampling"]["contexts"] = 5;
    auto cfg = parse_config(j.dump());

    auto trained = cmd_train(cfg, {});

    CliOverrides s1;
    s1.out_dir = (dir / "samples_a").string();
    auto a = cmd_sample(trained.checkpoint_final, cfg, s1);
    CHECK(a.log.context_count() == 5);
    for (const auto& [id, samples] : a.log.contexts) CHECK(samples.size() == 1);

    CliOverrides s2;
    s2.out_dir = (dir / "samples_b").string();
    auto b = cmd_sample(trained.checkpoint_final, cfg, s2);
    CHECK(read_bytes(a.log_path) == read_bytes(b.log_path));

    // Worker parallelism must not change the bytes.
    CliOverrides s4;
    s4.out_dir = (dir / "samples_c").string();
    s4.workers = 4;
    auto c = cmd_sample(trained.checkpoint_final, cfg, s4);
    CHECK(read_bytes(a.log_path) == read_bytes(c.log_path));

    // Dimension mismatch between checkpoint and config is rejected.
    auto j2 = j;
    j2["policy"]["length"] = 2;
    CHECK_THROWS_AS(cmd_sample(trained.checkpoint_final, parse_config(j2.dump()), s1),
                    InvalidConfig);
}

TEST_CASE("sampling 4096 draws per context stays well inside the time budget") {
    auto dir = temp_dir("throughput");
    auto j = nlohmann::json::parse(R"({
      "schema_version": 1, "experiment": "throughput", "seed": 7, "task": "generation",
      "policy": { "family": "position_categorical", "length": 4 },
      "landscape": { "kind": "phoq_like", "seed": 3 },
      "algorithm": { "name": "ppo", "steps": 0 },
      "sampling": { "samples_per_context": 4096, "k_max": 32, "contexts": 8 },
      "success": { "threshold": 10.0 },
      "output_dir": ")" + (dir / "run").string() + R"("
    })");
    auto cfg = parse_config(j.dump());
    auto trained = cmd_train(cfg, {});

    auto t0 = std::chrono::steady_clock::now();
    CliOverrides s;
    s.out_dir = (dir / "samples").string();
    auto out = cmd_sample(trained.checkpoint_final, cfg, s);
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(out.log.context_count() == 8);
    CHECK(elapsed < 60.0);
}

TEST_CASE("evaluation reproduces fixture counts and emits consistent reports") {
    auto dir = temp_dir("evaluate");
    // Two-token alphabet; solved means the sample is exactly "CA" (fitness 1).
    auto table = dir / "t.csv";
    atomic_write_file(table, "CA,1.0\n");
    std::string cfg_text = std::string(R"({
      "schema_version": 1, "experiment": "eval-fixture", "seed": 1, "task": "generation",
      "policy": { "family": "position_categorical", "length": 2, "alphabet": "AC" },
      "landscape": { "kind": "table", "path": ")") + table.string() + R"(",
                     "sites": [0, 1], "wild_type": "AA" },
      "algorithm": { "name": "ppo", "steps": 0 },
      "sampling": { "samples_per_context": 1, "k_max": 1, "contexts": 1 },
      "success": { "threshold": 0.0 },
      "output_dir": ")" + (dir / "report").string() + R"("
    })";
    auto cfg = parse_config(cfg_text);
    const Alphabet alphabet("AC");

    // Construct logs with the AMP-row counts: 290/7/49/4.
    auto make_logs = [&](int pres, int exp, int shr, int oos) {
        SampleLog base, tuned;
        base.model_tag = "base";
        tuned.model_tag = "tuned";
        base.k_max = tuned.k_max = 1;
        int ctx = 0;
        auto add = [&](bool b, bool t) {
            char id[16];
            std::snprintf(id, sizeof(id), "ctx%04d", ctx++);
            Sequence solved = encode(alphabet, "CA");
            Sequence unsolved = encode(alphabet, "AA");
            base.contexts.emplace_back(id,
                                       std::vector<SampleRecord>{{b ? solved : unsolved, -1.0}});
            tuned.contexts.emplace_back(id,
                                        std::vector<SampleRecord>{{t ? solved : unsolved, -1.0}});
        };
        for (int i = 0; i < pres; ++i) add(true, true);
        for (int i = 0; i < exp; ++i) add(false, true);
        for (int i = 0; i < shr; ++i) add(true, false);
        for (int i = 0; i < oos; ++i) add(false, false);
        return std::pair{base, tuned};
    };

    auto [base, tuned] = make_logs(290, 7, 49, 4);
    auto base_path = dir / "base.csv";
    auto tuned_path = dir / "tuned.csv";
    save_sample_log(base, alphabet, base_path);
    save_sample_log(tuned, alphabet, tuned_path);

    auto outcome = cmd_evaluate(base_path, tuned_path, cfg, {});
    CHECK(outcome.support.preservation == 290);
    CHECK(outcome.support.expansion == 7);
    CHECK(outcome.support.shrinkage == 49);
    CHECK(outcome.support.out_of_support == 4);
    CHECK(std::round(outcome.support.esr * 100.0) / 100.0 == doctest::Approx(0.14));

    auto support_csv = read_bytes(outcome.run_dir / "support.csv");
    CHECK(support_csv.find("290,7,49,4") != std::string::npos);
    auto summary = read_bytes(outcome.run_dir / "summary.json");
    CHECK(summary.find("esr_reciprocal") != std::string::npos);
    CHECK(verify_manifest(outcome.run_dir).ok);

    // Self-comparison: no expansion, no shrinkage.
    CliOverrides self_out;
    self_out.out_dir = (dir / "self").string();
    auto self_eval = cmd_evaluate(base_path, base_path, cfg, self_out);
    CHECK(self_eval.support.expansion == 0);
    CHECK(self_eval.support.shrinkage == 0);

    // Pass@k columns are non-decreasing in k in the emitted curve.
    auto pass_csv = read_bytes(outcome.run_dir / "pass_at_k.csv");
    std::istringstream in(pass_csv);
    std::string line;
    std::getline(in, line); // header
    std::array<double, 4> prev{-1.0, -1.0, -1.0, -1.0};
    while (std::getline(in, line)) {
        auto fields = split(line, ',');
        REQUIRE(fields.size() == 5);
        for (int i = 0; i < 4; ++i) {
            double v = parse_double(fields[static_cast<size_t>(i) + 1], "pass_at_k");
            CHECK(v >= prev[static_cast<size_t>(i)] - 1e-12);
            prev[static_cast<size_t>(i)] = v;
        }
    }
}

TEST_CASE("make-landscape emits complete deterministic tables") {
    auto dir = temp_dir("makeland");

    MakeLandscapeParams phoq;
    phoq.kind = "phoq_like";
    auto p1 = cmd_make_landscape(phoq, 11, dir / "phoq_a.csv");
    auto p2 = cmd_make_landscape(phoq, 11, dir / "phoq_b.csv");
    auto a = read_bytes(p1);
    CHECK(a == read_bytes(p2));
    CHECK(sha256_hex(a) == sha256_hex(read_bytes(p2)));

    long rows = 0;
    std::istringstream in(a);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 160000);

    // NK with k=0: the exhaustive optimum is the composition of per-site
    // argmax contributions.
    MakeLandscapeParams nk;
    nk.kind = "nk";
    nk.alphabet = "ACDE";
    nk.nk_n = 4;
    nk.nk_k = 0;
    auto nk_path = cmd_make_landscape(nk, 5, dir / "nk.csv");
    const Alphabet abc("ACDE");
    Sequence wt{std::vector<int>(4, 0)};
    auto loaded = load_landscape_csv(nk_path, {0, 1, 2, 3}, wt, abc);
    CHECK(loaded.size() == 256);

    NKLandscape land(4, 0, 4, 5);
    Sequence greedy{std::vector<int>(4, 0)};
    for (int site = 0; site < 4; ++site) {
        double best = -1.0;
        for (int r = 0; r < 4; ++r) {
            Sequence probe = greedy;
            probe[site] = r;
            if (land.contribution(site, probe) > best) {
                best = land.contribution(site, probe);
                greedy[site] = r;
            }
        }
    }
    double best_val = -1.0;
    Sequence best_seq;
    for (uint64_t key : loaded.sorted_keys()) {
        if (loaded.value_of_key(key) > best_val) {
            best_val = loaded.value_of_key(key);
            best_seq = loaded.sequence_of_key(key);
        }
    }
    CHECK(best_seq == greedy);
}

TEST_CASE("mutation task trains, samples and evaluates end to end") {
    auto dir = temp_dir("mutation");
    std::string cfg_text = std::string(R"({
      "schema_version": 1, "experiment": "mutation-smoke", "seed": 9, "task": "mutation",
      "policy": { "family": "mutation", "length": 4, "alphabet": "ACDE" },
      "landscape": { "kind": "nk", "n": 4, "k": 1, "seed": 13 },
      "algorithm": { "name": "ppo", "steps": 10, "learning_rate": 0.05, "kl_coeff": 0.1,
                     "value_coeff": 0.4, "entropy_coeff": 0.01, "batch_size": 8,
                     "ppo_epochs": 2 },
      "sampling": { "samples_per_context": 6, "k_max": 4, "contexts": 1 },
      "success": { "threshold": 0.6 },
      "env": { "max_steps": 4, "mask": "1011", "reward_mode": "per_step",
               "position_threshold": 0.0,
               "anneal": { "start": 1.0, "end": 0.5, "horizon_steps": 100 },
               "pool": { "source": "list", "sequences": ["ACDE", "EDCA"] } },
      "output_dir": ")") + (dir / "run").string() + R"("
    })";
    auto cfg = parse_config(cfg_text);

    auto trained = cmd_train(cfg, {});
    CHECK(trained.report.steps.size() == 10);
    CHECK(fs::exists(trained.checkpoint_final));

    CliOverrides base_out;
    base_out.out_dir = (dir / "base").string();
    auto base = cmd_sample(trained.checkpoint_init, cfg, base_out);
    CHECK(base.log.context_count() == 2); // one context per pool wild type

    CliOverrides tuned_out;
    tuned_out.out_dir = (dir / "tuned").string();
    auto tuned = cmd_sample(trained.checkpoint_final, cfg, tuned_out);

    // Mutation sampling also emits the per-step trajectory log.
    auto traj_csv = read_bytes(tuned.run_dir / "trajectories.csv");
    CHECK(traj_csv.find("episode,step,state,position,residue,reward,log_prob") == 0);
    CHECK(verify_manifest(tuned.run_dir).ok);

    // Samples only mutate masked positions of their wild type.
    const Alphabet abc("ACDE");
    std::vector<Sequence> pool{encode(abc, "ACDE"), encode(abc, "EDCA")};
    for (int c = 0; c < 2; ++c)
        for (const auto& rec : tuned.log.contexts[static_cast<size_t>(c)].second)
            CHECK(rec.sequence[1] == pool[static_cast<size_t>(c)][1]); // masked-out position

    CliOverrides eval_out;
    eval_out.out_dir = (dir / "eval").string();
    auto outcome = cmd_evaluate(base.log_path, tuned.log_path, cfg, eval_out);
    CHECK(outcome.support.total() == 2);
    auto metrics = read_bytes(outcome.run_dir / "metrics.csv");
    // Mutation evaluation recovers wild types per context, so recovery and
    // novelty are real numbers, not nan.
    CHECK(metrics.find("nan") == std::string::npos);

    // GRPO variant with rank normalization runs too.
    auto j = nlohmann::json::parse(cfg_text);
    j["algorithm"]["name"] = "grpo";
    j["algorithm"]["rank_normalize"] = true;
    j["algorithm"]["group_size"] = 4;
    j["output_dir"] = (dir / "grpo").string();
    auto grpo_cfg = parse_config(j.dump());
    auto grpo = cmd_train(grpo_cfg, {});
    CHECK(grpo.report.steps.size() == 10);

    // DPO variant exercises trajectory preference pairs.
    j["algorithm"]["name"] = "dpo";
    j["algorithm"]["dpo_samples_per_round"] = 8;
    j["algorithm"]["dpo_steps_per_round"] = 2;
    j["output_dir"] = (dir / "dpo").string();
    auto dpo_cfg = parse_config(j.dump());
    auto dpo = cmd_train(dpo_cfg, {});
    CHECK(dpo.report.steps.size() == 10);
}
