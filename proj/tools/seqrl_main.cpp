// seqrl command line: train policies against reward landscapes, sample them
// into per-context logs, and run the base-vs-tuned evaluation suite.
//
// Exit codes: 0 success, 2 validation error, 3 training divergence.

#include <seqrl/seqrl.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

seqrl::CliOverrides make_overrides(const std::string& out, bool has_seed, uint64_t seed,
                                   int workers, const std::string& tag) {
    seqrl::CliOverrides o;
    if (!out.empty()) o.out_dir = out;
    if (has_seed) o.seed = seed;
    o.workers = workers;
    if (!tag.empty()) o.model_tag = tag;
    return o;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale RL fine-tuning laboratory for discrete sequence design"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(seqrl::kToolVersion));

    std::string config_path, out_dir, tag;
    uint64_t seed = 0;
    int workers = 1;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* c = cmd->add_option("--config", config_path, "experiment config (JSON)");
        if (needs_config) c->required();
        cmd->add_option("--seed", seed, "override the config seed");
        cmd->add_option("--out", out_dir, "output run directory");
        cmd->add_option("--workers", workers, "worker threads for sampling/evaluation")
            ->check(CLI::PositiveNumber);
    };

    auto* train = app.add_subcommand("train", "train a policy and write checkpoints + report");
    add_common(train, true);

    auto* sample = app.add_subcommand("sample", "generate a per-context sample log");
    std::string checkpoint;
    sample->add_option("checkpoint", checkpoint, "policy checkpoint file")->required();
    add_common(sample, true);
    sample->add_option("--tag", tag, "model tag recorded in the log");

    auto* evaluate = app.add_subcommand("evaluate", "compare base and tuned sample logs");
    std::string base_log, tuned_log;
    evaluate->add_option("base_log", base_log, "base model sample log")->required();
    evaluate->add_option("tuned_log", tuned_log, "tuned model sample log")->required();
    add_common(evaluate, true);

    auto* make_land = app.add_subcommand("make-landscape", "emit a synthetic landscape CSV");
    seqrl::MakeLandscapeParams land_params;
    std::string land_out;
    make_land->add_option("--kind", land_params.kind, "phoq_like or nk")->required();
    make_land->add_option("--seed", seed, "generator seed")->required();
    make_land->add_option("--out", land_out, "output CSV path")->required();
    make_land->add_option("--alphabet", land_params.alphabet, "residue alphabet");
    make_land->add_option("--sites", land_params.phoq.num_sites, "phoq_like mutable sites");
    make_land->add_option("--length", land_params.phoq.sequence_length,
                          "phoq_like sequence length");
    make_land->add_option("--high-fraction", land_params.phoq.high_fraction,
                          "phoq_like high-fitness fraction");
    make_land->add_option("--mid-fraction", land_params.phoq.mid_fraction,
                          "phoq_like mid-bin fraction");
    make_land->add_option("--low-fraction", land_params.phoq.low_fraction,
                          "phoq_like low-bin fraction");
    make_land->add_option("--coverage", land_params.phoq.coverage,
                          "fraction of variants annotated");
    make_land->add_option("--n", land_params.nk_n, "nk sequence length");
    make_land->add_option("--k", land_params.nk_k, "nk interaction order");

    auto* verify = app.add_subcommand("verify-manifest", "check run files against the manifest");
    std::string manifest_target;
    verify->add_option("target", manifest_target, "run directory or manifest.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            auto cfg = seqrl::load_config(config_path);
            auto overrides = make_overrides(out_dir, train->count("--seed") > 0, seed, workers, "");
            auto outcome = seqrl::cmd_train(cfg, overrides);
            std::cout << "trained " << cfg.name << ": " << outcome.report.steps.size()
                      << " steps, final mean reward "
                      << seqrl::format_double(outcome.report.final_mean_reward()) << "\n"
                      << "run dir: " << outcome.run_dir.string() << "\n";
        } else if (sample->parsed()) {
            auto cfg = seqrl::load_config(config_path);
            auto overrides =
                make_overrides(out_dir, sample->count("--seed") > 0, seed, workers, tag);
            auto outcome = seqrl::cmd_sample(checkpoint, cfg, overrides);
            std::cout << "sampled " << outcome.log.context_count() << " contexts -> "
                      << outcome.log_path.string() << "\n";
        } else if (evaluate->parsed()) {
            auto cfg = seqrl::load_config(config_path);
            auto overrides =
                make_overrides(out_dir, evaluate->count("--seed") > 0, seed, workers, "");
            auto outcome = seqrl::cmd_evaluate(base_log, tuned_log, cfg, overrides);
            std::cout << "support: preservation " << outcome.support.preservation
                      << ", expansion " << outcome.support.expansion << ", shrinkage "
                      << outcome.support.shrinkage << ", out-of-support "
                      << outcome.support.out_of_support << ", esr "
                      << seqrl::format_double(outcome.support.esr) << "\n"
                      << "reports in " << outcome.run_dir.string() << "\n";
        } else if (make_land->parsed()) {
            if (land_params.phoq.sequence_length < land_params.phoq.num_sites)
                land_params.phoq.sequence_length = land_params.phoq.num_sites;
            auto path = seqrl::cmd_make_landscape(land_params, seed, land_out);
            std::cout << "landscape written to " << path.string() << "\n";
        } else if (verify->parsed()) {
            auto result = seqrl::verify_manifest(manifest_target);
            if (!result.ok) {
                for (const auto& p : result.problems) std::cerr << "mismatch: " << p << "\n";
                return 2;
            }
            std::cout << "manifest ok\n";
        }
    } catch (const seqrl::DivergedError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const seqrl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
