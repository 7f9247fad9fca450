#pragma once

// Exact small parameterized policies with closed-form log-probabilities and
// gradients. Three families:
//
//   PositionCategoricalPolicy — one independent softmax per position,
//   MarkovPolicy              — left-to-right generation conditioned on the
//                               previous token,
//   MutationPolicy            — a position head plus per-position residue
//                               heads driving (position, residue) edits.
//
// Sampling-time temperature and nucleus filtering are decoding choices;
// log_prob/grad_log_prob score the temperature-1, unfiltered likelihood.

#include <seqrl/core.hpp>
#include <seqrl/ioutil.hpp>

#include <concepts>
#include <span>
#include <variant>

namespace seqrl {

/// Log-probability plus the gradient over the policy's flat parameter vector.
struct LogProbGrad {
    double log_prob = 0.0;
    std::vector<double> grad;
};

struct MutationAction {
    int position = 0;
    int residue = 0;
    bool operator==(const MutationAction&) const = default;
};

using BoolMask = std::vector<bool>;

namespace detail {

inline int argmax_tie_low(const std::vector<double>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[static_cast<size_t>(i)] > v[static_cast<size_t>(best)]) best = i;
    return best;
}

inline int sample_filtered(const std::vector<double>& logits_row, double temperature,
                           double top_p, RngStream& rng) {
    CategoricalDist d = softmax(logits_row, temperature);
    if (top_p < 1.0) d = top_p_filter(d, top_p);
    return d.sample(rng);
}

} // namespace detail

// ------------------------------------------------- position-categorical

/// L independent temperature-softmax heads; the simplest stand-in for a
/// fixed-length generator.
class PositionCategoricalPolicy {
public:
    PositionCategoricalPolicy(int length, int alphabet_size, double init_logit = 0.0)
        : length_(length), alphabet_size_(alphabet_size),
          logits_(static_cast<size_t>(length) * static_cast<size_t>(alphabet_size), init_logit) {
        require<InvalidConfig>(length >= 1 && alphabet_size >= 2,
                               "policy needs length >= 1 and alphabet size >= 2");
    }

    static PositionCategoricalPolicy uniform(int length, int alphabet_size) {
        return PositionCategoricalPolicy(length, alphabet_size, 0.0);
    }

    int length() const { return length_; }
    int alphabet_size() const { return alphabet_size_; }

    size_t param_count() const { return logits_.size(); }
    std::span<double> params() { return logits_; }
    std::span<const double> params() const { return logits_; }

    double& logit(int pos, int tok) {
        return logits_[static_cast<size_t>(pos) * alphabet_size_ + tok];
    }
    double logit(int pos, int tok) const {
        return logits_[static_cast<size_t>(pos) * alphabet_size_ + tok];
    }

    std::vector<double> row(int pos) const {
        auto begin = logits_.begin() + static_cast<long>(pos) * alphabet_size_;
        return std::vector<double>(begin, begin + alphabet_size_);
    }

    Sequence sample(double temperature, double top_p, RngStream& rng) const {
        Sequence s;
        s.tokens.resize(static_cast<size_t>(length_));
        for (int l = 0; l < length_; ++l)
            s.tokens[static_cast<size_t>(l)] = detail::sample_filtered(row(l), temperature, top_p, rng);
        return s;
    }

    double log_prob(const Sequence& seq) const {
        require(seq.length() == length_, "sequence length mismatch");
        validate_sequence(seq, alphabet_size_);
        double lp = 0.0;
        for (int l = 0; l < length_; ++l)
            lp += log_softmax(row(l))[static_cast<size_t>(seq[l])];
        return lp;
    }

    LogProbGrad grad_log_prob(const Sequence& seq) const {
        require(seq.length() == length_, "sequence length mismatch");
        validate_sequence(seq, alphabet_size_);
        LogProbGrad out;
        out.grad.assign(param_count(), 0.0);
        for (int l = 0; l < length_; ++l) {
            auto logp = log_softmax(row(l));
            out.log_prob += logp[static_cast<size_t>(seq[l])];
            for (int a = 0; a < alphabet_size_; ++a) {
                double p = std::exp(logp[static_cast<size_t>(a)]);
                out.grad[static_cast<size_t>(l) * alphabet_size_ + a] =
                    (a == seq[l] ? 1.0 : 0.0) - p;
            }
        }
        return out;
    }

    /// Mean Shannon entropy of the per-position distributions, with the
    /// gradient over logits. Used as an exploration bonus.
    std::pair<double, std::vector<double>> entropy_with_grad() const {
        double total = 0.0;
        std::vector<double> grad(param_count(), 0.0);
        for (int l = 0; l < length_; ++l) {
            auto logp = log_softmax(row(l));
            double h = 0.0;
            for (double v : logp) h -= std::exp(v) * v;
            total += h;
            for (int a = 0; a < alphabet_size_; ++a) {
                double p = std::exp(logp[static_cast<size_t>(a)]);
                grad[static_cast<size_t>(l) * alphabet_size_ + a] =
                    -p * (logp[static_cast<size_t>(a)] + h) / length_;
            }
        }
        return {total / length_, std::move(grad)};
    }

    /// Exact positional KL(this || other), averaged over positions.
    std::pair<double, std::vector<double>> kl_with_grad(const PositionCategoricalPolicy& other) const {
        require(other.length_ == length_ && other.alphabet_size_ == alphabet_size_,
                "policy shape mismatch");
        double total = 0.0;
        std::vector<double> grad(param_count(), 0.0);
        for (int l = 0; l < length_; ++l) {
            auto logp = log_softmax(row(l));
            auto logq = log_softmax(other.row(l));
            double kl = 0.0;
            for (int a = 0; a < alphabet_size_; ++a)
                kl += std::exp(logp[static_cast<size_t>(a)]) *
                      (logp[static_cast<size_t>(a)] - logq[static_cast<size_t>(a)]);
            total += kl;
            for (int a = 0; a < alphabet_size_; ++a) {
                double p = std::exp(logp[static_cast<size_t>(a)]);
                grad[static_cast<size_t>(l) * alphabet_size_ + a] =
                    p * ((logp[static_cast<size_t>(a)] - logq[static_cast<size_t>(a)]) - kl) / length_;
            }
        }
        return {total / length_, std::move(grad)};
    }

private:
    int length_;
    int alphabet_size_;
    std::vector<double> logits_;
};

// ------------------------------------------------------------- markov

/// First-order autoregressive policy: a start distribution plus one
/// transition row per previous token. Generates exactly `length` tokens.
class MarkovPolicy {
public:
    MarkovPolicy(int length, int alphabet_size, double init_logit = 0.0)
        : length_(length), alphabet_size_(alphabet_size),
          params_(static_cast<size_t>(alphabet_size) * (1 + alphabet_size), init_logit) {
        require<InvalidConfig>(length >= 1 && alphabet_size >= 2,
                               "policy needs length >= 1 and alphabet size >= 2");
    }

    int length() const { return length_; }
    int alphabet_size() const { return alphabet_size_; }

    size_t param_count() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    double& start_logit(int tok) { return params_[static_cast<size_t>(tok)]; }
    double& transition_logit(int prev, int tok) {
        return params_[static_cast<size_t>(alphabet_size_) * (1 + prev) + tok];
    }

    std::vector<double> start_row() const {
        return std::vector<double>(params_.begin(), params_.begin() + alphabet_size_);
    }
    std::vector<double> transition_row(int prev) const {
        auto begin = params_.begin() + static_cast<long>(alphabet_size_) * (1 + prev);
        return std::vector<double>(begin, begin + alphabet_size_);
    }

    Sequence sample(double temperature, double top_p, RngStream& rng) const {
        Sequence s;
        s.tokens.resize(static_cast<size_t>(length_));
        s.tokens[0] = detail::sample_filtered(start_row(), temperature, top_p, rng);
        for (int t = 1; t < length_; ++t)
            s.tokens[static_cast<size_t>(t)] =
                detail::sample_filtered(transition_row(s[t - 1]), temperature, top_p, rng);
        return s;
    }

    double log_prob(const Sequence& seq) const {
        validate_sequence(seq, alphabet_size_);
        double lp = log_softmax(start_row())[static_cast<size_t>(seq[0])];
        for (int t = 1; t < seq.length(); ++t)
            lp += log_softmax(transition_row(seq[t - 1]))[static_cast<size_t>(seq[t])];
        return lp;
    }

    LogProbGrad grad_log_prob(const Sequence& seq) const {
        validate_sequence(seq, alphabet_size_);
        LogProbGrad out;
        out.grad.assign(param_count(), 0.0);
        auto accumulate = [&](size_t base, const std::vector<double>& logits_row, int tok) {
            auto logp = log_softmax(logits_row);
            out.log_prob += logp[static_cast<size_t>(tok)];
            for (int a = 0; a < alphabet_size_; ++a)
                out.grad[base + static_cast<size_t>(a)] +=
                    (a == tok ? 1.0 : 0.0) - std::exp(logp[static_cast<size_t>(a)]);
        };
        accumulate(0, start_row(), seq[0]);
        for (int t = 1; t < seq.length(); ++t)
            accumulate(static_cast<size_t>(alphabet_size_) * (1 + seq[t - 1]),
                       transition_row(seq[t - 1]), seq[t]);
        return out;
    }

    /// Mean row entropy (start row plus every transition row).
    std::pair<double, std::vector<double>> entropy_with_grad() const {
        const int rows = 1 + alphabet_size_;
        double total = 0.0;
        std::vector<double> grad(param_count(), 0.0);
        for (int r = 0; r < rows; ++r) {
            std::vector<double> logits_row = (r == 0) ? start_row() : transition_row(r - 1);
            auto logp = log_softmax(logits_row);
            double h = 0.0;
            for (double v : logp) h -= std::exp(v) * v;
            total += h;
            for (int a = 0; a < alphabet_size_; ++a) {
                double p = std::exp(logp[static_cast<size_t>(a)]);
                grad[static_cast<size_t>(r) * alphabet_size_ + a] =
                    -p * (logp[static_cast<size_t>(a)] + h) / rows;
            }
        }
        return {total / rows, std::move(grad)};
    }

    /// Exact KL(this || other) averaged over the start and transition rows.
    std::pair<double, std::vector<double>> kl_with_grad(const MarkovPolicy& other) const {
        require(other.alphabet_size_ == alphabet_size_, "policy shape mismatch");
        const int rows = 1 + alphabet_size_;
        double total = 0.0;
        std::vector<double> grad(param_count(), 0.0);
        for (int r = 0; r < rows; ++r) {
            std::vector<double> mine = (r == 0) ? start_row() : transition_row(r - 1);
            std::vector<double> theirs = (r == 0) ? other.start_row() : other.transition_row(r - 1);
            auto logp = log_softmax(mine);
            auto logq = log_softmax(theirs);
            double kl = 0.0;
            for (int a = 0; a < alphabet_size_; ++a)
                kl += std::exp(logp[static_cast<size_t>(a)]) *
                      (logp[static_cast<size_t>(a)] - logq[static_cast<size_t>(a)]);
            total += kl;
            for (int a = 0; a < alphabet_size_; ++a) {
                double p = std::exp(logp[static_cast<size_t>(a)]);
                grad[static_cast<size_t>(r) * alphabet_size_ + a] =
                    p * ((logp[static_cast<size_t>(a)] - logq[static_cast<size_t>(a)]) - kl) / rows;
            }
        }
        return {total / rows, std::move(grad)};
    }

private:
    int length_;
    int alphabet_size_;
    std::vector<double> params_; // [start (A); transitions (A x A) row-major]
};

// ------------------------------------------------------------ mutation

/// Position head + per-position residue heads. The combined action
/// log-probability is log pi_aa + position_weight * log pi_pos, with the
/// residue distribution renormalized after zeroing the unmutated residue
/// and the position distribution renormalized over the mask.
class MutationPolicy {
public:
    MutationPolicy(int length, int alphabet_size, double position_weight = 0.5,
                   double init_logit = 0.0)
        : length_(length), alphabet_size_(alphabet_size), position_weight_(position_weight),
          params_(static_cast<size_t>(length) * (1 + alphabet_size), init_logit) {
        require<InvalidConfig>(length >= 1 && alphabet_size >= 2,
                               "policy needs length >= 1 and alphabet size >= 2");
        require<InvalidConfig>(position_weight >= 0.0, "position_weight must be >= 0");
    }

    int length() const { return length_; }
    int alphabet_size() const { return alphabet_size_; }
    double position_weight() const { return position_weight_; }

    size_t param_count() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    double& position_logit(int pos) { return params_[static_cast<size_t>(pos)]; }
    double position_logit(int pos) const { return params_[static_cast<size_t>(pos)]; }
    double& residue_logit(int pos, int tok) {
        return params_[static_cast<size_t>(length_) + static_cast<size_t>(pos) * alphabet_size_ + tok];
    }

    std::vector<double> position_logits() const {
        return std::vector<double>(params_.begin(), params_.begin() + length_);
    }
    std::vector<double> residue_row(int pos) const {
        auto begin = params_.begin() + length_ + static_cast<long>(pos) * alphabet_size_;
        return std::vector<double>(begin, begin + alphabet_size_);
    }

    size_t residue_param_index(int pos, int tok) const {
        return static_cast<size_t>(length_) + static_cast<size_t>(pos) * alphabet_size_ +
               static_cast<size_t>(tok);
    }

private:
    int length_;
    int alphabet_size_;
    double position_weight_;
    std::vector<double> params_; // [position logits (L); residue logits (L x A) row-major]
};

// ----------------------------------------------------- free functions

template <class P>
concept SequencePolicy = requires(const P& p, const Sequence& s, RngStream& rng) {
    { p.length() } -> std::convertible_to<int>;
    { p.alphabet_size() } -> std::convertible_to<int>;
    { p.sample(1.0, 1.0, rng) } -> std::same_as<Sequence>;
    { p.log_prob(s) } -> std::convertible_to<double>;
    { p.grad_log_prob(s) } -> std::same_as<LogProbGrad>;
    { p.param_count() } -> std::convertible_to<size_t>;
};

template <SequencePolicy P>
Sequence sample_sequence(const P& policy, double temperature, double top_p, RngStream& rng) {
    require(std::isfinite(temperature) && temperature > 0.0, "temperature must be positive");
    require(top_p > 0.0 && top_p <= 1.0, "top-p must lie in (0, 1]");
    return policy.sample(temperature, top_p, rng);
}

template <SequencePolicy P>
double log_prob(const P& policy, const Sequence& seq) {
    return policy.log_prob(seq);
}

template <SequencePolicy P>
LogProbGrad grad_log_prob(const P& policy, const Sequence& seq) {
    return policy.grad_log_prob(seq);
}

namespace detail {

struct MaskedLogSoftmax {
    std::vector<double> log_probs; // -inf outside the support
    double log_prob_of(int idx) const { return log_probs[static_cast<size_t>(idx)]; }
};

/// log softmax(logits / temperature) restricted to `keep`; excluded entries
/// get -inf.
inline MaskedLogSoftmax masked_log_softmax(const std::vector<double>& logits,
                                           const std::vector<char>& keep, double temperature) {
    MaskedLogSoftmax out;
    out.log_probs.assign(logits.size(), -std::numeric_limits<double>::infinity());
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < logits.size(); ++i)
        if (keep[i]) mx = std::max(mx, logits[i] / temperature);
    require(std::isfinite(mx), "masked softmax has empty support");
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i)
        if (keep[i]) sum += std::exp(logits[i] / temperature - mx);
    const double lse = mx + std::log(sum);
    for (size_t i = 0; i < logits.size(); ++i)
        if (keep[i]) out.log_probs[i] = logits[i] / temperature - lse;
    return out;
}

inline std::vector<char> mask_to_keep(const BoolMask& mask) {
    std::vector<char> keep(mask.size(), 0);
    for (size_t i = 0; i < mask.size(); ++i) keep[i] = mask[i] ? 1 : 0;
    return keep;
}

inline void validate_mutation_action(const MutationPolicy& policy, const Sequence& state,
                                     const MutationAction& action, const BoolMask& mask) {
    require(state.length() == policy.length(), "state length mismatch");
    require(static_cast<int>(mask.size()) == policy.length(), "mask length mismatch");
    validate_sequence(state, policy.alphabet_size());
    require<InvalidAction>(action.position >= 0 && action.position < policy.length(),
                           "position out of range");
    require<InvalidAction>(action.residue >= 0 && action.residue < policy.alphabet_size(),
                           "residue out of range");
    require<InvalidAction>(mask[static_cast<size_t>(action.position)],
                           "position is masked out");
    require<InvalidAction>(action.residue != state[action.position],
                           "residue equals the unmutated residue at this position");
}

} // namespace detail

/// log pi_aa(residue | position) + position_weight * log pi_pos(position),
/// with the state's residue excluded from the residue distribution and the
/// position distribution renormalized over the mask. Temperatures default
/// to the temperature-1 training likelihood.
inline double mutation_log_prob(const MutationPolicy& policy, const Sequence& state,
                                const MutationAction& action, const BoolMask& mask,
                                double temperature = 1.0, double position_temp = 1.0) {
    detail::validate_mutation_action(policy, state, action, mask);
    require(temperature > 0.0 && position_temp > 0.0, "temperatures must be positive");

    auto pos_ls = detail::masked_log_softmax(policy.position_logits(),
                                             detail::mask_to_keep(mask), position_temp);

    std::vector<char> keep_res(static_cast<size_t>(policy.alphabet_size()), 1);
    keep_res[static_cast<size_t>(state[action.position])] = 0;
    auto res_ls = detail::masked_log_softmax(policy.residue_row(action.position), keep_res,
                                             temperature);

    return res_ls.log_prob_of(action.residue) +
           policy.position_weight() * pos_ls.log_prob_of(action.position);
}

/// mutation_log_prob plus its gradient over the policy's parameter layout.
inline LogProbGrad mutation_log_prob_grad(const MutationPolicy& policy, const Sequence& state,
                                          const MutationAction& action, const BoolMask& mask,
                                          double temperature = 1.0, double position_temp = 1.0) {
    detail::validate_mutation_action(policy, state, action, mask);
    require(temperature > 0.0 && position_temp > 0.0, "temperatures must be positive");

    LogProbGrad out;
    out.grad.assign(policy.param_count(), 0.0);

    auto pos_ls = detail::masked_log_softmax(policy.position_logits(),
                                             detail::mask_to_keep(mask), position_temp);
    for (int i = 0; i < policy.length(); ++i) {
        if (!mask[static_cast<size_t>(i)]) continue;
        double p = std::exp(pos_ls.log_prob_of(i));
        out.grad[static_cast<size_t>(i)] = policy.position_weight() *
                                           ((i == action.position ? 1.0 : 0.0) - p) / position_temp;
    }

    std::vector<char> keep_res(static_cast<size_t>(policy.alphabet_size()), 1);
    keep_res[static_cast<size_t>(state[action.position])] = 0;
    auto res_ls = detail::masked_log_softmax(policy.residue_row(action.position), keep_res,
                                             temperature);
    for (int a = 0; a < policy.alphabet_size(); ++a) {
        if (!keep_res[static_cast<size_t>(a)]) continue;
        double p = std::exp(res_ls.log_prob_of(a));
        out.grad[policy.residue_param_index(action.position, a)] =
            ((a == action.residue ? 1.0 : 0.0) - p) / temperature;
    }

    out.log_prob = res_ls.log_prob_of(action.residue) +
                   policy.position_weight() * pos_ls.log_prob_of(action.position);
    return out;
}

struct MutateStepResult {
    Sequence sequence;
    std::vector<MutationAction> actions;
    double log_prob = 0.0;
};

/// Policy-guided mutation of up to max_sites sites. Stochastic mode samples
/// positions whose masked probability clears `position_threshold` via
/// multinomial draws without replacement (falling back to the single best
/// masked position when none clears it) and samples residues with the
/// wild-type probability zeroed; deterministic mode takes top-k positions
/// and argmax residues. Never emits the wild-type residue at a mutated site.
inline MutateStepResult mutate_step(const MutationPolicy& policy, const Sequence& state,
                                    const Sequence& wild_type, const BoolMask& mask,
                                    int max_sites, double temperature, double position_temp,
                                    bool stochastic, RngStream& rng,
                                    double position_threshold = 0.5) {
    require(max_sites >= 1, "max_sites must be >= 1");
    require(state.length() == policy.length() && wild_type.length() == policy.length(),
            "sequence length mismatch");
    require(static_cast<int>(mask.size()) == policy.length(), "mask length mismatch");
    require(temperature > 0.0 && position_temp > 0.0, "temperatures must be positive");
    validate_sequence(state, policy.alphabet_size());
    validate_sequence(wild_type, policy.alphabet_size());
    int masked_count = 0;
    for (bool m : mask) masked_count += m ? 1 : 0;
    require(masked_count >= 1, "mask must have at least one mutable position");

    const int length = policy.length();

    // Alg.-style masked position probabilities: full softmax, then zero the
    // unmasked entries without renormalizing before the threshold test.
    CategoricalDist pos_dist = softmax(policy.position_logits(), position_temp);
    std::vector<double> p_masked(pos_dist.probs);
    for (int i = 0; i < length; ++i)
        if (!mask[static_cast<size_t>(i)]) p_masked[static_cast<size_t>(i)] = 0.0;

    std::vector<int> selected;
    if (stochastic) {
        std::vector<double> weights(static_cast<size_t>(length), 0.0);
        int candidates = 0;
        for (int i = 0; i < length; ++i) {
            if (p_masked[static_cast<size_t>(i)] > position_threshold) {
                weights[static_cast<size_t>(i)] = p_masked[static_cast<size_t>(i)];
                ++candidates;
            }
        }
        if (candidates == 0) {
            selected.push_back(detail::argmax_tie_low(p_masked));
        } else {
            int want = std::min(max_sites, candidates);
            for (int k = 0; k < want; ++k) {
                double total = 0.0;
                for (double w : weights) total += w;
                double u = rng.next_double() * total;
                double cum = 0.0;
                int pick = -1;
                for (int i = 0; i < length; ++i) {
                    if (weights[static_cast<size_t>(i)] <= 0.0) continue;
                    pick = i;
                    cum += weights[static_cast<size_t>(i)];
                    if (u < cum) break;
                }
                selected.push_back(pick);
                weights[static_cast<size_t>(pick)] = 0.0; // without replacement
            }
        }
    } else {
        std::vector<int> order;
        for (int i = 0; i < length; ++i)
            if (mask[static_cast<size_t>(i)]) order.push_back(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return p_masked[static_cast<size_t>(a)] > p_masked[static_cast<size_t>(b)];
        });
        int want = std::min(max_sites, static_cast<int>(order.size()));
        selected.assign(order.begin(), order.begin() + want);
    }
    std::sort(selected.begin(), selected.end());

    auto pos_ls = detail::masked_log_softmax(policy.position_logits(),
                                             detail::mask_to_keep(mask), position_temp);

    MutateStepResult out;
    out.sequence = state;
    for (int pos : selected) {
        std::vector<char> keep(static_cast<size_t>(policy.alphabet_size()), 1);
        keep[static_cast<size_t>(wild_type[pos])] = 0;
        auto res_ls = detail::masked_log_softmax(policy.residue_row(pos), keep, temperature);

        int residue;
        if (stochastic) {
            CategoricalDist d;
            d.probs.resize(res_ls.log_probs.size());
            for (size_t a = 0; a < d.probs.size(); ++a)
                d.probs[a] = keep[a] ? std::exp(res_ls.log_probs[a]) : 0.0;
            residue = d.sample(rng);
        } else {
            residue = 0;
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < policy.alphabet_size(); ++a) {
                if (!keep[static_cast<size_t>(a)]) continue;
                if (res_ls.log_prob_of(a) > best) {
                    best = res_ls.log_prob_of(a);
                    residue = a;
                }
            }
        }

        out.sequence[pos] = residue;
        out.actions.push_back({pos, residue});
        out.log_prob += res_ls.log_prob_of(residue) +
                        policy.position_weight() * pos_ls.log_prob_of(pos);
    }
    return out;
}

// -------------------------------------------------------- checkpoints

enum class PolicyFamily { position_categorical, markov, mutation };

inline std::string to_string(PolicyFamily f) {
    switch (f) {
        case PolicyFamily::position_categorical: return "position_categorical";
        case PolicyFamily::markov: return "markov";
        case PolicyFamily::mutation: return "mutation";
    }
    return "unknown";
}

inline PolicyFamily policy_family_from_string(const std::string& s) {
    if (s == "position_categorical") return PolicyFamily::position_categorical;
    if (s == "markov") return PolicyFamily::markov;
    if (s == "mutation") return PolicyFamily::mutation;
    throw InvalidConfig("unknown policy family '" + s + "'");
}

using AnyPolicy = std::variant<PositionCategoricalPolicy, MarkovPolicy, MutationPolicy>;

inline PolicyFamily family_of(const AnyPolicy& p) {
    if (std::holds_alternative<PositionCategoricalPolicy>(p)) return PolicyFamily::position_categorical;
    if (std::holds_alternative<MarkovPolicy>(p)) return PolicyFamily::markov;
    return PolicyFamily::mutation;
}

namespace detail {

inline void write_checkpoint_common(std::ostream& out, PolicyFamily family,
                                    const std::string& alphabet, int length,
                                    std::span<const double> params,
                                    const std::string& extra = {}) {
    out << "seqrl-checkpoint v1\n";
    out << "family " << to_string(family) << "\n";
    out << "alphabet " << alphabet << "\n";
    out << "length " << length << "\n";
    if (!extra.empty()) out << extra;
    out << "param_count " << params.size() << "\n";
    out << "params\n";
    for (size_t i = 0; i < params.size(); ++i) {
        out << format_double(params[i]);
        out << (((i + 1) % 8 == 0 || i + 1 == params.size()) ? '\n' : ' ');
    }
    out << "end\n";
}

} // namespace detail

inline std::string checkpoint_to_string(const AnyPolicy& policy, const Alphabet& alphabet) {
    std::ostringstream out;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            std::string extra;
            if constexpr (std::is_same_v<T, MutationPolicy>)
                extra = "position_weight " + format_double(p.position_weight()) + "\n";
            detail::write_checkpoint_common(out, family_of(policy), alphabet.symbols(),
                                            p.length(), p.params(), extra);
        },
        policy);
    return out.str();
}

inline void save_checkpoint(const AnyPolicy& policy, const Alphabet& alphabet,
                            const std::filesystem::path& path) {
    atomic_write_file(path, checkpoint_to_string(policy, alphabet));
}

struct LoadedCheckpoint {
    AnyPolicy policy;
    std::string alphabet;
};

inline LoadedCheckpoint load_checkpoint_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require<ParseError>(static_cast<bool>(std::getline(in, line)) &&
                            std::string(trim(line)) == "seqrl-checkpoint v1",
                        "not a seqrl checkpoint (missing version header)");

    std::string family_str, alphabet;
    int length = -1;
    long param_count = -1;
    double position_weight = 0.5;
    bool have_weight = false;

    while (std::getline(in, line)) {
        auto t = std::string(trim(line));
        if (t == "params") break;
        auto sp = t.find(' ');
        require<ParseError>(sp != std::string::npos, "malformed checkpoint header line: " + t);
        std::string key = t.substr(0, sp), value = t.substr(sp + 1);
        if (key == "family") family_str = value;
        else if (key == "alphabet") alphabet = value;
        else if (key == "length") length = static_cast<int>(parse_long(value, "checkpoint length"));
        else if (key == "param_count") param_count = parse_long(value, "checkpoint param_count");
        else if (key == "position_weight") {
            position_weight = parse_double(value, "checkpoint position_weight");
            have_weight = true;
        } else throw ParseError("unknown checkpoint key '" + key + "'");
    }
    require<ParseError>(!family_str.empty() && !alphabet.empty() && length > 0 && param_count >= 0,
                        "incomplete checkpoint header");

    std::vector<double> params;
    params.reserve(static_cast<size_t>(param_count));
    std::string tok;
    while (in >> tok) {
        if (tok == "end") break;
        params.push_back(parse_double(tok, "checkpoint params"));
    }
    require<ParseError>(static_cast<long>(params.size()) == param_count,
                        "checkpoint parameter count mismatch");

    const int A = static_cast<int>(alphabet.size());
    PolicyFamily family = policy_family_from_string(family_str);
    LoadedCheckpoint out{PositionCategoricalPolicy(1, 2), alphabet};
    switch (family) {
        case PolicyFamily::position_categorical: {
            PositionCategoricalPolicy p(length, A);
            require<ParseError>(params.size() == p.param_count(), "parameter shape mismatch");
            std::copy(params.begin(), params.end(), p.params().begin());
            out.policy = std::move(p);
            break;
        }
        case PolicyFamily::markov: {
            MarkovPolicy p(length, A);
            require<ParseError>(params.size() == p.param_count(), "parameter shape mismatch");
            std::copy(params.begin(), params.end(), p.params().begin());
            out.policy = std::move(p);
            break;
        }
        case PolicyFamily::mutation: {
            require<ParseError>(have_weight, "mutation checkpoint missing position_weight");
            MutationPolicy p(length, A, position_weight);
            require<ParseError>(params.size() == p.param_count(), "parameter shape mismatch");
            std::copy(params.begin(), params.end(), p.params().begin());
            out.policy = std::move(p);
            break;
        }
    }
    return out;
}

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    return load_checkpoint_from_string(read_file(path));
}

} // namespace seqrl
