#pragma once

// Training loops: rollout (or pair construction) -> advantage/loss ->
// gradient step, with per-step metrics. Sequence-level training treats a
// whole sequence as one action; mutation training runs step-level PPO/GRPO
// over environment episodes with GAE. Multi-round DPO re-snapshots its
// reference every round. A non-finite loss restores the last good
// parameters and raises DivergedError.

#include <seqrl/envs.hpp>
#include <seqrl/rewards.hpp>
#include <seqrl/rl.hpp>

namespace seqrl {

namespace detail {

/// Tracks the most recent parameter vector that evaluated to a finite loss;
/// on divergence the policy is rolled back to it before DivergedError.
class LastGoodParams {
public:
    explicit LastGoodParams(std::span<const double> params)
        : saved_(params.begin(), params.end()) {}

    void check(bool components_finite, std::span<double> params) {
        if (!components_finite) {
            std::copy(saved_.begin(), saved_.end(), params.begin());
            throw DivergedError(
                "training loss is non-finite; parameters restored to last good step");
        }
        saved_.assign(params.begin(), params.end());
    }

private:
    std::vector<double> saved_;
};

inline void axpy(std::vector<double>& acc, double scale, const std::vector<double>& g) {
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += scale * g[i];
}

} // namespace detail

// ----------------------------------------------------- sequence tasks

/// PPO/GRPO over whole sequences sampled from the policy: PPO uses a scalar
/// learned baseline, GRPO group-relative advantages. DPO runs multi-round
/// preference optimization, re-snapshotting the reference each round and
/// pairing top-quantile against bottom-quantile samples by reward.
template <SequencePolicy P>
TrainingReport train_sequence(P& policy, Algo algo, const RewardFn& reward, const RLConfig& cfg,
                              int steps, RngStream& rng) {
    cfg.validate();
    require<InvalidConfig>(steps >= 0, "steps must be >= 0");
    if (algo == Algo::grpo)
        require<InvalidConfig>(cfg.batch_size % cfg.group_size == 0,
                               "batch_size must be a multiple of group_size for GRPO");

    TrainingReport report;
    if (algo == Algo::dpo) {
        GradientOptimizer opt(cfg.optimizer, cfg.learning_rate, policy.param_count());
        detail::LastGoodParams last_good(policy.params());
        int global_step = 0;
        while (global_step < steps) {
            P reference = policy; // refreshed every round

            std::vector<Sequence> samples(static_cast<size_t>(cfg.dpo_samples_per_round));
            std::vector<double> rewards(samples.size());
            double mean_reward = 0.0;
            for (size_t i = 0; i < samples.size(); ++i) {
                samples[i] = policy.sample(cfg.sample_temperature, cfg.sample_top_p, rng);
                rewards[i] = reward(samples[i]);
                mean_reward += rewards[i] / static_cast<double>(samples.size());
            }

            std::vector<size_t> order(samples.size());
            std::iota(order.begin(), order.end(), size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](size_t a, size_t b) { return rewards[a] > rewards[b]; });
            const size_t q = std::max<size_t>(
                1, static_cast<size_t>(cfg.dpo_quantile * static_cast<double>(samples.size())));
            std::vector<PreferencePair> pairs;
            for (size_t i = 0; i < q; ++i) {
                const Sequence& winner = samples[order[i]];
                const Sequence& loser = samples[order[samples.size() - 1 - i]];
                if (winner != loser) pairs.push_back({"round", winner, loser});
            }

            for (int inner = 0; inner < cfg.dpo_steps_per_round && global_step < steps; ++inner) {
                TrainingStepMetrics m;
                m.step = global_step;
                m.mean_reward = mean_reward;
                if (!pairs.empty()) {
                    auto res = dpo_loss(policy, reference, pairs, cfg.dpo_beta,
                                        cfg.dpo_reg_lambda);
                    last_good.check(std::isfinite(res.loss), policy.params());
                    opt.step(policy.params(), res.grad);
                    m.loss = res.loss;
                    m.policy_loss = res.loss;
                    m.kl = kl_penalty(policy, reference, cfg.kl_clamp);
                }
                report.steps.push_back(m);
                ++global_step;
            }
        }
        return report;
    }

    // PPO / GRPO
    const P frozen_reference = policy;
    ScalarBaseline baseline;
    GradientOptimizer policy_opt(cfg.optimizer, cfg.learning_rate, policy.param_count());
    GradientOptimizer value_opt(cfg.optimizer, cfg.learning_rate, baseline.param_count());
    detail::LastGoodParams last_good(policy.params());

    for (int step = 0; step < steps; ++step) {
        const P old_policy = policy;

        std::vector<Sequence> batch(static_cast<size_t>(cfg.batch_size));
        std::vector<double> rewards(batch.size());
        std::vector<double> old_lp(batch.size());
        double mean_reward = 0.0;
        for (size_t i = 0; i < batch.size(); ++i) {
            batch[i] = old_policy.sample(cfg.sample_temperature, cfg.sample_top_p, rng);
            rewards[i] = reward(batch[i]);
            old_lp[i] = old_policy.log_prob(batch[i]);
            mean_reward += rewards[i] / static_cast<double>(batch.size());
        }

        std::vector<double> targets =
            cfg.standardize_returns ? standardize(rewards) : rewards;
        std::vector<double> advantages(batch.size());
        if (algo == Algo::grpo) {
            for (int g = 0; g * cfg.group_size < cfg.batch_size; ++g) {
                std::vector<double> group(rewards.begin() + g * cfg.group_size,
                                          rewards.begin() + (g + 1) * cfg.group_size);
                auto adv = grpo_advantages(group, cfg.rank_normalize);
                std::copy(adv.begin(), adv.end(),
                          advantages.begin() + g * cfg.group_size);
            }
        } else {
            for (size_t i = 0; i < batch.size(); ++i)
                advantages[i] = targets[i] - baseline.predict();
        }

        TrainingStepMetrics m;
        m.step = step;
        m.mean_reward = mean_reward;
        for (int epoch = 0; epoch < cfg.ppo_epochs; ++epoch) {
            const P& anchor = (cfg.kl_anchor == KlAnchor::reference) ? frozen_reference
                                                                     : old_policy;
            auto res = ppo_loss(policy, anchor, batch, old_lp, advantages, cfg.clip_eps,
                                cfg.kl_coeff, cfg.kl_clamp);

            double value_loss = 0.0;
            std::vector<double> value_grad;
            if (algo == Algo::ppo) {
                auto [vl, vg] = baseline.loss_with_grad(targets);
                value_loss = vl;
                value_grad = std::move(vg);
            }

            double entropy = 0.0;
            std::vector<double> policy_grad = std::move(res.grad);
            if (cfg.entropy_coeff > 0.0) {
                auto [h, hg] = policy.entropy_with_grad();
                entropy = h;
                const double sign = cfg.entropy_is_bonus ? -1.0 : 1.0;
                detail::axpy(policy_grad, sign * cfg.entropy_coeff, hg);
            }

            const bool finite = std::isfinite(res.policy_term) && std::isfinite(res.diag.kl) &&
                                std::isfinite(value_loss) && std::isfinite(entropy);
            last_good.check(finite, policy.params());
            const double total = combined_loss(res.policy_term, res.diag.kl, value_loss,
                                               entropy, cfg);

            policy_opt.step(policy.params(), policy_grad);
            if (!value_grad.empty()) {
                for (double& g : value_grad) g *= cfg.value_coeff;
                value_opt.step(baseline.params(), value_grad);
            }

            m.loss = total;
            m.policy_loss = res.policy_term;
            m.kl = res.diag.kl;
            m.value_loss = value_loss;
            m.entropy = entropy;
            m.clipped_fraction = res.diag.clipped_fraction;
        }
        report.steps.push_back(m);
    }
    return report;
}

// ----------------------------------------------------- mutation tasks

/// Step-level PPO/GRPO over environment episodes: GAE advantages (GRPO
/// additionally rank-normalizes them within episode groups), standardized
/// returns as value targets, KL only at mutated sites, and the masked
/// position entropy as the exploration bonus. DPO ranks whole episodes.
inline TrainingReport train_mutation(MutationPolicy& policy, Algo algo, MutationEnv& env,
                                     const RLConfig& cfg, const AnnealSchedule& schedule,
                                     int steps, RngStream& rng) {
    cfg.validate();
    require<InvalidConfig>(steps >= 0, "steps must be >= 0");
    require<InvalidConfig>(policy.length() == env.length(),
                           "policy/environment length mismatch");
    if (algo == Algo::grpo)
        require<InvalidConfig>(cfg.batch_size % cfg.group_size == 0,
                               "batch_size must be a multiple of group_size for GRPO");

    TrainingReport report;

    if (algo == Algo::dpo) {
        GradientOptimizer opt(cfg.optimizer, cfg.learning_rate, policy.param_count());
        detail::LastGoodParams last_good(policy.params());
        int global_step = 0;
        while (global_step < steps) {
            MutationPolicy reference = policy;

            std::vector<Trajectory> episodes(static_cast<size_t>(cfg.dpo_samples_per_round));
            std::vector<double> totals(episodes.size(), 0.0);
            double mean_reward = 0.0;
            for (size_t i = 0; i < episodes.size(); ++i) {
                episodes[i] = rollout(env, policy, schedule, global_step, rng);
                for (double r : episodes[i].rewards) totals[i] += r;
                mean_reward += totals[i] / static_cast<double>(episodes.size());
            }

            std::vector<size_t> order(episodes.size());
            std::iota(order.begin(), order.end(), size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](size_t a, size_t b) { return totals[a] > totals[b]; });
            const size_t q = std::max<size_t>(
                1, static_cast<size_t>(cfg.dpo_quantile * static_cast<double>(episodes.size())));
            std::vector<std::pair<Trajectory, Trajectory>> pairs;
            for (size_t i = 0; i < q; ++i) {
                const Trajectory& w = episodes[order[i]];
                const Trajectory& l = episodes[order[episodes.size() - 1 - i]];
                if (w.actions != l.actions) pairs.emplace_back(w, l);
            }

            for (int inner = 0; inner < cfg.dpo_steps_per_round && global_step < steps; ++inner) {
                TrainingStepMetrics m;
                m.step = global_step;
                m.mean_reward = mean_reward;
                if (!pairs.empty()) {
                    auto res = dpo_loss_mutation(policy, reference, pairs, env.mask(),
                                                 cfg.dpo_beta, cfg.dpo_reg_lambda);
                    last_good.check(std::isfinite(res.loss), policy.params());
                    opt.step(policy.params(), res.grad);
                    m.loss = res.loss;
                    m.policy_loss = res.loss;
                }
                report.steps.push_back(m);
                ++global_step;
            }
        }
        return report;
    }

    const MutationPolicy frozen_reference = policy;
    LinearStateValue value(env.length(), policy.alphabet_size());
    GradientOptimizer policy_opt(cfg.optimizer, cfg.learning_rate, policy.param_count());
    GradientOptimizer value_opt(cfg.optimizer, cfg.learning_rate, value.param_count());
    detail::LastGoodParams last_good(policy.params());

    for (int step = 0; step < steps; ++step) {
        const MutationPolicy old_policy = policy;

        std::vector<Trajectory> episodes(static_cast<size_t>(cfg.batch_size));
        double mean_reward = 0.0;
        for (size_t i = 0; i < episodes.size(); ++i) {
            episodes[i] = rollout(env, old_policy, schedule, step, rng, &value);
            double total = 0.0;
            for (double r : episodes[i].rewards) total += r;
            mean_reward += total / static_cast<double>(episodes.size());
        }

        // GAE per episode (bootstrap 0: episodes always terminate).
        std::vector<MutationSample> samples;
        std::vector<Sequence> states;
        std::vector<double> returns;
        for (auto& ep : episodes) {
            auto res = gae(ep.rewards, ep.values, 0.0, cfg.gamma, cfg.gae_lambda);
            ep.advantages = res.advantages;
            ep.returns = res.returns;
        }

        if (algo == Algo::grpo && cfg.rank_normalize) {
            // Rank-normalize step advantages within groups of episodes.
            for (int g = 0; g * cfg.group_size < cfg.batch_size; ++g) {
                std::vector<double> flat;
                for (int e = g * cfg.group_size; e < (g + 1) * cfg.group_size; ++e)
                    flat.insert(flat.end(), episodes[static_cast<size_t>(e)].advantages.begin(),
                                episodes[static_cast<size_t>(e)].advantages.end());
                auto normed = grpo_advantages(flat, true);
                size_t idx = 0;
                for (int e = g * cfg.group_size; e < (g + 1) * cfg.group_size; ++e)
                    for (double& a : episodes[static_cast<size_t>(e)].advantages) a = normed[idx++];
            }
        }

        for (const auto& ep : episodes) {
            for (int t = 0; t < ep.length(); ++t) {
                samples.push_back({ep.states[static_cast<size_t>(t)],
                                   ep.actions[static_cast<size_t>(t)],
                                   ep.log_probs_old[static_cast<size_t>(t)],
                                   ep.advantages[static_cast<size_t>(t)], ep.aa_temperature,
                                   ep.pos_temperature});
                states.push_back(ep.states[static_cast<size_t>(t)]);
                returns.push_back(ep.returns[static_cast<size_t>(t)]);
            }
        }
        std::vector<double> value_targets =
            cfg.standardize_returns ? standardize(returns) : returns;

        TrainingStepMetrics m;
        m.step = step;
        m.mean_reward = mean_reward;
        for (int epoch = 0; epoch < cfg.ppo_epochs; ++epoch) {
            const MutationPolicy& anchor =
                (cfg.kl_anchor == KlAnchor::reference) ? frozen_reference : old_policy;
            auto res = ppo_loss_mutation(policy, anchor, samples, env.mask(), cfg.clip_eps,
                                         cfg.kl_coeff, cfg.kl_clamp);

            auto [value_loss, value_grad] = value.loss_with_grad(states, value_targets);

            double entropy = 0.0;
            std::vector<double> policy_grad = std::move(res.grad);
            if (cfg.entropy_coeff > 0.0) {
                auto [h, hg] = mutation_position_entropy(policy, env.mask());
                entropy = h;
                const double sign = cfg.entropy_is_bonus ? -1.0 : 1.0;
                detail::axpy(policy_grad, sign * cfg.entropy_coeff, hg);
            }

            const bool finite = std::isfinite(res.policy_term) && std::isfinite(res.diag.kl) &&
                                std::isfinite(value_loss) && std::isfinite(entropy);
            last_good.check(finite, policy.params());
            const double total = combined_loss(res.policy_term, res.diag.kl, value_loss,
                                               entropy, cfg);

            policy_opt.step(policy.params(), policy_grad);
            for (double& g : value_grad) g *= cfg.value_coeff;
            value_opt.step(value.params(), value_grad);

            m.loss = total;
            m.policy_loss = res.policy_term;
            m.kl = res.diag.kl;
            m.value_loss = value_loss;
            m.entropy = entropy;
            m.clipped_fraction = res.diag.clipped_fraction;
        }
        report.steps.push_back(m);
    }
    return report;
}

} // namespace seqrl
