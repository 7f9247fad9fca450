#pragma once

// The three fine-tuning losses (DPO, PPO, GRPO), advantage estimation (GAE
// and group-relative), clamped KL and entropy regularizers, value functions
// and the gradient optimizer. Losses return analytic gradients over the
// policy's flat parameter layout; every gradient is checked against central
// finite differences in the test suite.

#include <seqrl/policy.hpp>

#include <optional>

namespace seqrl {

enum class Algo { dpo, ppo, grpo };
enum class Optimizer { sgd, adam };
enum class KlAnchor { reference, old_policy };

inline std::string to_string(Algo a) {
    switch (a) {
        case Algo::dpo: return "dpo";
        case Algo::ppo: return "ppo";
        case Algo::grpo: return "grpo";
    }
    return "unknown";
}

inline Algo algo_from_string(const std::string& s) {
    if (s == "dpo") return Algo::dpo;
    if (s == "ppo") return Algo::ppo;
    if (s == "grpo") return Algo::grpo;
    throw InvalidConfig("unknown algorithm '" + s + "'");
}

// -------------------------------------------------------------- config

struct RLConfig {
    // loss shape
    double clip_eps = 0.2;
    double kl_coeff = 20.0;      // alpha
    double value_coeff = 0.4;    // beta
    double entropy_coeff = 0.01; // gamma_e
    bool entropy_is_bonus = true;
    double kl_clamp = 10.0;
    KlAnchor kl_anchor = KlAnchor::reference;

    // advantage estimation
    double gamma = 0.99;
    double gae_lambda = 0.95;
    bool standardize_returns = true;
    bool rank_normalize = false;
    int group_size = 8;

    // preference optimization
    double dpo_beta = 0.5;
    double dpo_reg_lambda = 1.0;
    double dpo_quantile = 0.25;
    int dpo_samples_per_round = 64;
    int dpo_steps_per_round = 10;

    // optimization
    double learning_rate = 0.05;
    Optimizer optimizer = Optimizer::adam;
    int batch_size = 64;
    int ppo_epochs = 4;

    // rollout sampling
    double sample_temperature = 1.0;
    double sample_top_p = 1.0;

    void validate() const {
        require<InvalidConfig>(clip_eps > 0.0 && clip_eps < 1.0, "clip_eps must lie in (0, 1)");
        require<InvalidConfig>(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
        require<InvalidConfig>(gae_lambda >= 0.0 && gae_lambda <= 1.0,
                               "gae_lambda must lie in [0, 1]");
        require<InvalidConfig>(kl_coeff >= 0.0 && value_coeff >= 0.0 && entropy_coeff >= 0.0,
                               "loss weights must be >= 0");
        require<InvalidConfig>(kl_clamp > 0.0, "kl_clamp must be positive");
        require<InvalidConfig>(group_size >= 2, "group_size must be >= 2");
        require<InvalidConfig>(dpo_beta > 0.0, "dpo_beta must be positive");
        require<InvalidConfig>(dpo_reg_lambda >= 0.0, "dpo_reg_lambda must be >= 0");
        require<InvalidConfig>(dpo_quantile > 0.0 && dpo_quantile <= 0.5,
                               "dpo_quantile must lie in (0, 0.5]");
        require<InvalidConfig>(dpo_samples_per_round >= 2, "dpo_samples_per_round must be >= 2");
        require<InvalidConfig>(dpo_steps_per_round >= 1, "dpo_steps_per_round must be >= 1");
        require<InvalidConfig>(learning_rate >= 0.0, "learning_rate must be >= 0");
        require<InvalidConfig>(batch_size >= 1, "batch_size must be >= 1");
        require<InvalidConfig>(ppo_epochs >= 1, "ppo_epochs must be >= 1");
        require<InvalidConfig>(sample_temperature > 0.0, "sample_temperature must be positive");
        require<InvalidConfig>(sample_top_p > 0.0 && sample_top_p <= 1.0,
                               "sample_top_p must lie in (0, 1]");
    }
};

// --------------------------------------------------------- rollout data

struct PreferencePair {
    std::string context_id;
    Sequence winner;
    Sequence loser;
};

/// One mutation episode: parallel per-step lists plus the state reached
/// after the last action. Advantages and returns are filled by estimation.
struct Trajectory {
    std::vector<Sequence> states; // state in which each action was taken
    std::vector<MutationAction> actions;
    std::vector<double> log_probs_old;
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<double> advantages;
    std::vector<double> returns;
    Sequence final_state;
    bool done = false;
    double aa_temperature = 1.0;
    double pos_temperature = 1.0;

    int length() const { return static_cast<int>(actions.size()); }

    void check_parallel() const {
        const size_t t = actions.size();
        require(states.size() == t && log_probs_old.size() == t && rewards.size() == t &&
                    values.size() == t,
                "trajectory lists must have equal length");
    }
};

// ---------------------------------------------------------- estimators

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// Backward GAE recursion: delta_t = r_t + gamma V_{t+1} - V_t,
/// A_t = delta_t + gamma lambda A_{t+1}; returns are advantages + values.
inline GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values,
                     double bootstrap, double gamma, double lam) {
    require(rewards.size() == values.size(), "rewards/values length mismatch");
    require(!rewards.empty(), "gae needs at least one step");
    require(gamma >= 0.0 && gamma <= 1.0 && lam >= 0.0 && lam <= 1.0,
            "gamma and lambda must lie in [0, 1]");
    const int T = static_cast<int>(rewards.size());
    GaeResult out;
    out.advantages.resize(rewards.size());
    out.returns.resize(rewards.size());
    double carry = 0.0;
    for (int t = T - 1; t >= 0; --t) {
        const double v_next = (t == T - 1) ? bootstrap : values[static_cast<size_t>(t) + 1];
        const double delta = rewards[static_cast<size_t>(t)] + gamma * v_next -
                             values[static_cast<size_t>(t)];
        carry = delta + gamma * lam * carry;
        out.advantages[static_cast<size_t>(t)] = carry;
        out.returns[static_cast<size_t>(t)] = carry + values[static_cast<size_t>(t)];
    }
    return out;
}

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace detail

/// Group-relative advantages: mean-centered rewards, optionally replacing
/// rewards by within-group average ranks mapped to [-1, 1] first.
inline std::vector<double> grpo_advantages(const std::vector<double>& group_rewards,
                                           bool rank_normalize) {
    require(group_rewards.size() >= 2, "group size must be >= 2");
    for (double r : group_rewards) require(std::isfinite(r), "group rewards must be finite");

    std::vector<double> vals = group_rewards;
    if (rank_normalize) {
        auto ranks = detail::average_ranks(group_rewards);
        const double m = static_cast<double>(group_rewards.size());
        for (size_t i = 0; i < vals.size(); ++i) vals[i] = -1.0 + 2.0 * (ranks[i] - 1.0) / (m - 1.0);
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    for (double& v : vals) v -= mean;
    return vals;
}

/// Subtract mean, divide by std + 1e-8.
inline std::vector<double> standardize(const std::vector<double>& values) {
    require(!values.empty(), "cannot standardize an empty list");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    const double denom = std::sqrt(var) + 1e-8;
    std::vector<double> out(values.size());
    for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / denom;
    return out;
}

// ------------------------------------------------------------ losses

namespace detail {

inline double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double stable_log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

} // namespace detail

struct DpoResult {
    double loss = 0.0;
    std::vector<double> grad;
    double mean_margin = 0.0;
};

/// Preference loss with supervised regularization: per pair,
/// -log sigma(beta [Delta_w - Delta_l]) - reg_lambda log pi(winner),
/// where Delta_x = log pi(x) - log pi_ref(x). reg_lambda = 0 recovers
/// standard DPO.
template <SequencePolicy P>
DpoResult dpo_loss(const P& policy, const P& reference,
                   const std::vector<PreferencePair>& pairs, double beta, double reg_lambda) {
    require(!pairs.empty(), "dpo_loss needs at least one pair");
    require(beta > 0.0 && reg_lambda >= 0.0, "invalid dpo coefficients");

    DpoResult out;
    out.grad.assign(policy.param_count(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(pairs.size());

    for (const auto& pair : pairs) {
        require(pair.winner != pair.loser, "preference pair winner equals loser");
        auto gw = policy.grad_log_prob(pair.winner);
        auto gl = policy.grad_log_prob(pair.loser);
        const double dw = gw.log_prob - reference.log_prob(pair.winner);
        const double dl = gl.log_prob - reference.log_prob(pair.loser);
        const double margin = beta * (dw - dl);

        out.loss += (-detail::stable_log_sigmoid(margin) - reg_lambda * gw.log_prob) * inv_n;
        out.mean_margin += margin * inv_n;

        const double dmargin = detail::stable_sigmoid(margin) - 1.0;
        for (size_t j = 0; j < out.grad.size(); ++j)
            out.grad[j] += (dmargin * beta * (gw.grad[j] - gl.grad[j]) -
                            reg_lambda * gw.grad[j]) * inv_n;
    }
    return out;
}

struct PpoDiagnostics {
    double clipped_fraction = 0.0;
    double mean_ratio = 0.0;
    double kl = 0.0;
};

struct PpoResult {
    double loss = 0.0;        // policy_term + kl_coeff * kl
    double policy_term = 0.0; // -E[min(rho A, clip(rho) A)]
    std::vector<double> grad;
    PpoDiagnostics diag;
};

namespace detail {

// Shared clipped-surrogate accumulation; log_prob_and_grad(i) must return
// the current policy's log-probability and parameter gradient for sample i.
template <class LogProbGradFn>
PpoResult ppo_surrogate(size_t n, size_t param_count, const std::vector<double>& old_log_probs,
                        const std::vector<double>& advantages, double clip_eps,
                        LogProbGradFn&& log_prob_and_grad) {
    require(old_log_probs.size() == n && advantages.size() == n,
            "ppo loss inputs must have equal lengths");
    require(n > 0, "ppo loss needs at least one sample");
    for (double a : advantages) require(std::isfinite(a), "advantages must be finite");

    PpoResult out;
    out.grad.assign(param_count, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    int clipped = 0;

    for (size_t i = 0; i < n; ++i) {
        LogProbGrad lpg = log_prob_and_grad(i);
        double log_ratio = lpg.log_prob - old_log_probs[i];
        // Exponent clamp keeps long-sequence ratios finite; the clamped
        // region contributes zero gradient.
        bool exponent_clamped = false;
        if (log_ratio > 20.0) { log_ratio = 20.0; exponent_clamped = true; }
        if (log_ratio < -20.0) { log_ratio = -20.0; exponent_clamped = true; }
        const double ratio = std::exp(log_ratio);
        const double adv = advantages[i];

        const double unclipped = ratio * adv;
        const double clipped_ratio = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
        const double clipped_obj = clipped_ratio * adv;

        out.policy_term += -std::min(unclipped, clipped_obj) * inv_n;
        out.diag.mean_ratio += ratio * inv_n;

        const bool clip_binds = (adv > 0.0 && ratio > 1.0 + clip_eps) ||
                                (adv < 0.0 && ratio < 1.0 - clip_eps);
        if (clip_binds) ++clipped;

        if (!clip_binds && !exponent_clamped) {
            const double scale = -adv * ratio * inv_n;
            for (size_t j = 0; j < param_count; ++j) out.grad[j] += scale * lpg.grad[j];
        }
    }
    out.diag.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(n);
    return out;
}

inline void apply_clamped_kl(PpoResult& out, double kl_value, std::vector<double> kl_grad,
                             double kl_coeff, double kl_clamp) {
    if (kl_value > kl_clamp) {
        kl_value = kl_clamp;
        std::fill(kl_grad.begin(), kl_grad.end(), 0.0); // clamp region is flat
    }
    out.diag.kl = kl_value;
    out.loss = out.policy_term + kl_coeff * kl_value;
    for (size_t j = 0; j < out.grad.size(); ++j) out.grad[j] += kl_coeff * kl_grad[j];
}

} // namespace detail

/// Clipped-surrogate PPO/GRPO loss over whole sequences, plus a clamped
/// exact KL penalty against `kl_ref`. Advantages are precomputed (value
/// baseline for PPO, group-relative for GRPO).
template <SequencePolicy P>
PpoResult ppo_loss(const P& policy, const P& kl_ref, const std::vector<Sequence>& sequences,
                   const std::vector<double>& old_log_probs,
                   const std::vector<double>& advantages, double clip_eps, double kl_coeff,
                   double kl_clamp = 10.0) {
    require(sequences.size() == old_log_probs.size(), "ppo loss inputs must have equal lengths");
    PpoResult out = detail::ppo_surrogate(
        sequences.size(), policy.param_count(), old_log_probs, advantages, clip_eps,
        [&](size_t i) { return policy.grad_log_prob(sequences[i]); });
    auto [kl, kl_grad] = policy.kl_with_grad(kl_ref);
    detail::apply_clamped_kl(out, kl, std::move(kl_grad), kl_coeff, kl_clamp);
    return out;
}

/// One recorded mutation step, flattened for the step-level loss.
struct MutationSample {
    Sequence state;
    MutationAction action;
    double old_log_prob = 0.0;
    double advantage = 0.0;
    double aa_temperature = 1.0;
    double pos_temperature = 1.0;
};

/// Exact residue-head KL at the listed sites (with multiplicity), averaged
/// and computed at temperature 1.
inline std::pair<double, std::vector<double>> mutation_site_kl_with_grad(
    const MutationPolicy& policy, const MutationPolicy& reference, const std::vector<int>& sites) {
    require(policy.length() == reference.length() &&
                policy.alphabet_size() == reference.alphabet_size(),
            "policy shape mismatch");
    double total = 0.0;
    std::vector<double> grad(policy.param_count(), 0.0);
    if (sites.empty()) return {0.0, std::move(grad)};
    const double inv_n = 1.0 / static_cast<double>(sites.size());
    for (int site : sites) {
        auto logp = log_softmax(policy.residue_row(site));
        auto logq = log_softmax(reference.residue_row(site));
        double kl = 0.0;
        for (size_t a = 0; a < logp.size(); ++a) kl += std::exp(logp[a]) * (logp[a] - logq[a]);
        total += kl * inv_n;
        for (size_t a = 0; a < logp.size(); ++a) {
            const double p = std::exp(logp[a]);
            grad[policy.residue_param_index(site, static_cast<int>(a))] +=
                p * ((logp[a] - logq[a]) - kl) * inv_n;
        }
    }
    return {total, std::move(grad)};
}

/// Step-level PPO/GRPO loss over (state, action) mutation samples; the KL
/// penalty is computed only at the mutated sites, per-sample temperatures
/// replay the annealed rollout temperatures.
inline PpoResult ppo_loss_mutation(const MutationPolicy& policy, const MutationPolicy& kl_ref,
                                   const std::vector<MutationSample>& samples,
                                   const BoolMask& mask, double clip_eps, double kl_coeff,
                                   double kl_clamp = 10.0) {
    std::vector<double> old_lp(samples.size());
    std::vector<double> adv(samples.size());
    std::vector<int> sites(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        old_lp[i] = samples[i].old_log_prob;
        adv[i] = samples[i].advantage;
        sites[i] = samples[i].action.position;
    }
    PpoResult out = detail::ppo_surrogate(
        samples.size(), policy.param_count(), old_lp, adv, clip_eps, [&](size_t i) {
            return mutation_log_prob_grad(policy, samples[i].state, samples[i].action, mask,
                                          samples[i].aa_temperature, samples[i].pos_temperature);
        });
    auto [kl, kl_grad] = mutation_site_kl_with_grad(policy, kl_ref, sites);
    detail::apply_clamped_kl(out, kl, std::move(kl_grad), kl_coeff, kl_clamp);
    return out;
}

/// Trajectory-level DPO over mutation episodes: the episode log-probability
/// is the temperature-1 sum of per-step action log-probabilities.
inline DpoResult dpo_loss_mutation(const MutationPolicy& policy, const MutationPolicy& reference,
                                   const std::vector<std::pair<Trajectory, Trajectory>>& pairs,
                                   const BoolMask& mask, double beta, double reg_lambda) {
    require(!pairs.empty(), "dpo_loss needs at least one pair");

    auto episode_lp_grad = [&](const MutationPolicy& p, const Trajectory& traj) {
        LogProbGrad total;
        total.grad.assign(p.param_count(), 0.0);
        for (int t = 0; t < traj.length(); ++t) {
            auto g = mutation_log_prob_grad(p, traj.states[static_cast<size_t>(t)],
                                            traj.actions[static_cast<size_t>(t)], mask);
            total.log_prob += g.log_prob;
            for (size_t j = 0; j < total.grad.size(); ++j) total.grad[j] += g.grad[j];
        }
        return total;
    };
    auto episode_lp = [&](const MutationPolicy& p, const Trajectory& traj) {
        double lp = 0.0;
        for (int t = 0; t < traj.length(); ++t)
            lp += mutation_log_prob(p, traj.states[static_cast<size_t>(t)],
                                    traj.actions[static_cast<size_t>(t)], mask);
        return lp;
    };

    DpoResult out;
    out.grad.assign(policy.param_count(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(pairs.size());
    for (const auto& [winner, loser] : pairs) {
        auto gw = episode_lp_grad(policy, winner);
        auto gl = episode_lp_grad(policy, loser);
        const double dw = gw.log_prob - episode_lp(reference, winner);
        const double dl = gl.log_prob - episode_lp(reference, loser);
        const double margin = beta * (dw - dl);
        out.loss += (-detail::stable_log_sigmoid(margin) - reg_lambda * gw.log_prob) * inv_n;
        out.mean_margin += margin * inv_n;
        const double dmargin = detail::stable_sigmoid(margin) - 1.0;
        for (size_t j = 0; j < out.grad.size(); ++j)
            out.grad[j] += (dmargin * beta * (gw.grad[j] - gl.grad[j]) -
                            reg_lambda * gw.grad[j]) * inv_n;
    }
    return out;
}

// -------------------------------------------------------- kl / entropy

/// Exact policy KL against a frozen reference, averaged over rows and
/// clamped to kl_clamp.
template <SequencePolicy P>
double kl_penalty(const P& policy, const P& reference, double kl_clamp = 10.0) {
    auto [kl, grad] = policy.kl_with_grad(reference);
    return std::min(kl, kl_clamp);
}

inline double kl_penalty_mutation(const MutationPolicy& policy, const MutationPolicy& reference,
                                  const std::vector<int>& mutated_sites, double kl_clamp = 10.0) {
    auto [kl, grad] = mutation_site_kl_with_grad(policy, reference, mutated_sites);
    return std::min(kl, kl_clamp);
}

/// Entropy of the mask-restricted position distribution (the exploration
/// bonus of the combined loss), with its parameter gradient.
inline std::pair<double, std::vector<double>> mutation_position_entropy(
    const MutationPolicy& policy, const BoolMask& mask) {
    require(static_cast<int>(mask.size()) == policy.length(), "mask length mismatch");
    auto ls = detail::masked_log_softmax(policy.position_logits(), detail::mask_to_keep(mask), 1.0);
    double h = 0.0;
    for (int i = 0; i < policy.length(); ++i) {
        if (!mask[static_cast<size_t>(i)]) continue;
        const double lp = ls.log_prob_of(i);
        h -= std::exp(lp) * lp;
    }
    std::vector<double> grad(policy.param_count(), 0.0);
    for (int i = 0; i < policy.length(); ++i) {
        if (!mask[static_cast<size_t>(i)]) continue;
        const double lp = ls.log_prob_of(i);
        grad[static_cast<size_t>(i)] = -std::exp(lp) * (lp + h);
    }
    return {h, std::move(grad)};
}

/// L_total = L_policy + alpha L_KL + beta L_value +/- gamma_e H; the entropy
/// term enters as a bonus (minus sign) by default.
inline double combined_loss(double policy_loss, double kl, double value_loss, double pos_entropy,
                            const RLConfig& cfg) {
    require(std::isfinite(policy_loss) && std::isfinite(kl) && std::isfinite(value_loss) &&
                std::isfinite(pos_entropy),
            "loss components must be finite");
    const double sign = cfg.entropy_is_bonus ? -1.0 : 1.0;
    return policy_loss + cfg.kl_coeff * kl + cfg.value_coeff * value_loss +
           sign * cfg.entropy_coeff * pos_entropy;
}

// ------------------------------------------------------ value functions

/// Single learned scalar; the sequence-level (bandit) baseline.
class ScalarBaseline {
public:
    double predict() const { return value_[0]; }
    size_t param_count() const { return 1; }
    std::span<double> params() { return value_; }
    std::span<const double> params() const { return value_; }

    /// Mean squared error against targets with gradient d/db.
    std::pair<double, std::vector<double>> loss_with_grad(const std::vector<double>& targets) const {
        require(!targets.empty(), "value loss needs targets");
        double loss = 0.0, g = 0.0;
        const double inv_n = 1.0 / static_cast<double>(targets.size());
        for (double t : targets) {
            const double d = value_[0] - t;
            loss += d * d * inv_n;
            g += 2.0 * d * inv_n;
        }
        return {loss, std::vector<double>{g}};
    }

private:
    std::vector<double> value_{0.0};
};

/// Per-state linear map over one-hot state features:
/// V(s) = bias + sum_l w[l, s_l].
class LinearStateValue {
public:
    LinearStateValue(int length, int alphabet_size)
        : length_(length), alphabet_size_(alphabet_size),
          params_(static_cast<size_t>(length) * alphabet_size + 1, 0.0) {}

    int length() const { return length_; }
    size_t param_count() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    double predict(const Sequence& state) const {
        require(state.length() == length_, "state length mismatch");
        double v = params_.back(); // bias
        for (int l = 0; l < length_; ++l)
            v += params_[static_cast<size_t>(l) * alphabet_size_ + static_cast<size_t>(state[l])];
        return v;
    }

    std::pair<double, std::vector<double>> loss_with_grad(const std::vector<Sequence>& states,
                                                          const std::vector<double>& targets) const {
        require(states.size() == targets.size() && !states.empty(),
                "value loss needs matching states and targets");
        double loss = 0.0;
        std::vector<double> grad(params_.size(), 0.0);
        const double inv_n = 1.0 / static_cast<double>(states.size());
        for (size_t i = 0; i < states.size(); ++i) {
            const double d = predict(states[i]) - targets[i];
            loss += d * d * inv_n;
            const double scale = 2.0 * d * inv_n;
            for (int l = 0; l < length_; ++l)
                grad[static_cast<size_t>(l) * alphabet_size_ +
                     static_cast<size_t>(states[i][l])] += scale;
            grad.back() += scale;
        }
        return {loss, std::move(grad)};
    }

private:
    int length_;
    int alphabet_size_;
    std::vector<double> params_; // [weights (L x A); bias]
};

// ----------------------------------------------------------- optimizer

/// Plain SGD or Adam (beta1 0.9, beta2 0.999, eps 1e-8) descent step.
class GradientOptimizer {
public:
    GradientOptimizer(Optimizer kind, double learning_rate, size_t param_count)
        : kind_(kind), lr_(learning_rate) {
        if (kind_ == Optimizer::adam) {
            m_.assign(param_count, 0.0);
            v_.assign(param_count, 0.0);
        }
    }

    void step(std::span<double> params, std::span<const double> grad) {
        require(params.size() == grad.size(), "optimizer parameter/gradient size mismatch");
        if (kind_ == Optimizer::sgd) {
            for (size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
            return;
        }
        ++t_;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, t_);
        const double c2 = 1.0 - std::pow(b2, t_);
        for (size_t i = 0; i < params.size(); ++i) {
            m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
            v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
            params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
        }
    }

private:
    Optimizer kind_;
    double lr_;
    std::vector<double> m_, v_;
    double t_ = 0;
};

// ------------------------------------------------------------- report

struct TrainingStepMetrics {
    int step = 0;
    double loss = 0.0;
    double policy_loss = 0.0;
    double kl = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double mean_reward = 0.0;
    double clipped_fraction = 0.0;
};

struct TrainingReport {
    std::vector<TrainingStepMetrics> steps;

    double final_mean_reward() const {
        return steps.empty() ? 0.0 : steps.back().mean_reward;
    }
};

inline std::string training_report_to_csv(const TrainingReport& report) {
    std::ostringstream out;
    out << "step,loss,policy_loss,kl,value_loss,entropy,mean_reward,clipped_fraction\n";
    for (const auto& m : report.steps) {
        out << m.step << ',' << format_double(m.loss) << ',' << format_double(m.policy_loss)
            << ',' << format_double(m.kl) << ',' << format_double(m.value_loss) << ','
            << format_double(m.entropy) << ',' << format_double(m.mean_reward) << ','
            << format_double(m.clipped_fraction) << '\n';
    }
    return out.str();
}

} // namespace seqrl
