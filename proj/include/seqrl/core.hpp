#pragma once

// Core domain types shared by every module: residue alphabets, token
// sequences, a counter-based splittable RNG, and categorical distributions
// with temperature softmax, nucleus filtering and Shannon entropy.
//
// All math is double precision. Types here are immutable after construction
// and safe to share across threads; each RngStream is owned by one worker.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seqrl {

// ---------------------------------------------------------------- errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInput : Error { using Error::Error; };
struct InvalidAction : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct DuplicateVariant : Error { using Error::Error; };
struct DivergedError : Error { using Error::Error; };

template <class E = InvalidInput>
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw E(msg);
}

// ---------------------------------------------------------------- alphabet

/// Ordered residue alphabet. index(symbol(i)) == i for all i.
class Alphabet {
public:
    explicit Alphabet(std::string_view symbols) : symbols_(symbols) {
        require<InvalidConfig>(!symbols_.empty(), "alphabet must not be empty");
        index_.fill(-1);
        for (int i = 0; i < static_cast<int>(symbols_.size()); ++i) {
            unsigned char c = static_cast<unsigned char>(symbols_[i]);
            require<InvalidConfig>(index_[c] == -1,
                                   "duplicate alphabet symbol '" + std::string(1, symbols_[i]) + "'");
            index_[c] = i;
        }
    }

    /// The 20 canonical amino acids in their conventional order.
    static const Alphabet& amino_acids() {
        static const Alphabet aa("ACDEFGHIKLMNPQRSTVWY");
        return aa;
    }

    int size() const { return static_cast<int>(symbols_.size()); }
    char symbol(int i) const { return symbols_.at(static_cast<size_t>(i)); }
    const std::string& symbols() const { return symbols_; }

    bool contains(char c) const { return index_[static_cast<unsigned char>(c)] >= 0; }

    int index(char c) const {
        int i = index_[static_cast<unsigned char>(c)];
        require(i >= 0, "symbol '" + std::string(1, c) + "' not in alphabet");
        return i;
    }

private:
    std::string symbols_;
    std::array<int, 256> index_{};
};

// ---------------------------------------------------------------- sequence

/// Token-index vector over an Alphabet; the universal design object.
struct Sequence {
    std::vector<int> tokens;

    Sequence() = default;
    explicit Sequence(std::vector<int> t) : tokens(std::move(t)) {}

    int length() const { return static_cast<int>(tokens.size()); }
    int operator[](int i) const { return tokens[static_cast<size_t>(i)]; }
    int& operator[](int i) { return tokens[static_cast<size_t>(i)]; }

    bool operator==(const Sequence& o) const { return tokens == o.tokens; }
    bool operator!=(const Sequence& o) const { return tokens != o.tokens; }
};

inline void validate_sequence(const Sequence& s, int alphabet_size) {
    require(s.length() >= 1, "sequence must have length >= 1");
    for (int t : s.tokens)
        require(t >= 0 && t < alphabet_size, "token index " + std::to_string(t) +
                                                 " out of range for alphabet size " +
                                                 std::to_string(alphabet_size));
}

inline std::string decode(const Alphabet& a, const Sequence& s) {
    std::string out;
    out.reserve(s.tokens.size());
    for (int t : s.tokens) out.push_back(a.symbol(t));
    return out;
}

inline Sequence encode(const Alphabet& a, std::string_view text) {
    Sequence s;
    s.tokens.reserve(text.size());
    for (char c : text) s.tokens.push_back(a.index(c));
    return s;
}

// ---------------------------------------------------------------- hashing

namespace detail {

inline constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer; full avalanche on 64-bit inputs.
inline uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) {
    return mix64(h ^ (v + kGolden + (h << 6) + (h >> 2)));
}

} // namespace detail

inline uint64_t hash_sequence(uint64_t seed, const Sequence& s) {
    uint64_t h = detail::mix64(seed + detail::kGolden);
    for (int t : s.tokens) h = detail::hash_combine(h, static_cast<uint64_t>(t));
    return h;
}

/// Deterministic uniform [0,1) derived from a 64-bit hash.
inline double hash_u01(uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------- rng

/// Counter-based splittable RNG. Identical (seed, stream_id) reproduce the
/// identical draw sequence; distinct stream_ids give independent streams, so
/// parallel rollouts stay reproducible regardless of scheduling.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    explicit RngStream(uint64_t seed, uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id),
          key_(detail::mix64(detail::mix64(seed + detail::kGolden) ^
                             (stream_id * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull))) {}

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_id_; }

    /// Derives an independent child stream; deterministic in child_id.
    RngStream split(uint64_t child_id) const {
        return RngStream(seed_, detail::hash_combine(stream_id_ + 1, child_id));
    }

    uint64_t next_u64() {
        counter_ += detail::kGolden;
        return detail::mix64(key_ + counter_);
    }

    /// Uniform double in [0, 1).
    double next_double() { return hash_u01(next_u64()); }

    /// Uniform integer in [0, bound); unbiased via rejection.
    int next_below(int bound) {
        require(bound > 0, "next_below bound must be positive");
        const uint64_t b = static_cast<uint64_t>(bound);
        const uint64_t limit = std::numeric_limits<uint64_t>::max() / b * b;
        for (;;) {
            uint64_t r = next_u64();
            if (r < limit) return static_cast<int>(r % b);
        }
    }

    /// Standard normal via Box-Muller.
    double next_gaussian() {
        double u1 = 1.0 - next_double(); // (0, 1]
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    uint64_t seed_;
    uint64_t stream_id_;
    uint64_t key_;
    uint64_t counter_ = 0;
};

// ---------------------------------------------------------------- categorical

enum class EntropyBase { nats, bits };

/// Discrete distribution over token indices. Probabilities sum to 1
/// within 1e-9.
struct CategoricalDist {
    std::vector<double> probs;

    int support_size() const { return static_cast<int>(probs.size()); }

    void validate() const {
        require(!probs.empty(), "categorical distribution must have support");
        double sum = 0.0;
        for (double p : probs) {
            require(std::isfinite(p) && p >= 0.0, "probabilities must be finite and non-negative");
            sum += p;
        }
        require(std::abs(sum - 1.0) <= 1e-9, "probabilities must sum to 1 (got " +
                                                 std::to_string(sum) + ")");
    }

    /// Inverse-CDF draw; never returns a zero-probability token.
    int sample(RngStream& rng) const {
        double u = rng.next_double();
        double cum = 0.0;
        int last_positive = -1;
        for (int i = 0; i < support_size(); ++i) {
            if (probs[static_cast<size_t>(i)] <= 0.0) continue;
            last_positive = i;
            cum += probs[static_cast<size_t>(i)];
            if (u < cum) return i;
        }
        require(last_positive >= 0, "distribution has no positive mass");
        return last_positive;
    }
};

/// Temperature softmax, numerically stable via max subtraction.
inline CategoricalDist softmax(const std::vector<double>& logits, double temperature = 1.0) {
    require(!logits.empty(), "softmax needs at least one logit");
    require(std::isfinite(temperature) && temperature > 0.0, "temperature must be positive");
    double max_scaled = -std::numeric_limits<double>::infinity();
    for (double l : logits) {
        require(std::isfinite(l), "logits must be finite");
        max_scaled = std::max(max_scaled, l / temperature);
    }
    CategoricalDist out;
    out.probs.resize(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out.probs[i] = std::exp(logits[i] / temperature - max_scaled);
        sum += out.probs[i];
    }
    for (double& p : out.probs) p /= sum;
    return out;
}

/// Log-probabilities of softmax(logits / temperature); stable form.
inline std::vector<double> log_softmax(const std::vector<double>& logits, double temperature = 1.0) {
    require(!logits.empty(), "log_softmax needs at least one logit");
    require(std::isfinite(temperature) && temperature > 0.0, "temperature must be positive");
    std::vector<double> scaled(logits.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < logits.size(); ++i) {
        require(std::isfinite(logits[i]), "logits must be finite");
        scaled[i] = logits[i] / temperature;
        mx = std::max(mx, scaled[i]);
    }
    double sum = 0.0;
    for (double s : scaled) sum += std::exp(s - mx);
    const double lse = mx + std::log(sum);
    for (double& s : scaled) s -= lse;
    return scaled;
}

/// Nucleus filter: keeps the smallest prefix of tokens, ordered by
/// descending probability (ties broken by ascending index), whose
/// cumulative mass reaches p; zeroes the rest and renormalizes.
inline CategoricalDist top_p_filter(const CategoricalDist& dist, double p) {
    dist.validate();
    require(std::isfinite(p) && p > 0.0 && p <= 1.0, "top-p must lie in (0, 1]");
    if (p >= 1.0) return dist;

    std::vector<int> order(dist.probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return dist.probs[static_cast<size_t>(a)] > dist.probs[static_cast<size_t>(b)];
    });

    CategoricalDist out;
    out.probs.assign(dist.probs.size(), 0.0);
    double kept = 0.0;
    for (int idx : order) {
        double pi = dist.probs[static_cast<size_t>(idx)];
        out.probs[static_cast<size_t>(idx)] = pi;
        kept += pi;
        if (kept >= p) break;
    }
    for (double& q : out.probs) q /= kept;
    return out;
}

/// -sum p log p with 0 log 0 := 0. Nats by default.
inline double shannon_entropy(const CategoricalDist& dist, EntropyBase base = EntropyBase::nats) {
    dist.validate();
    double h = 0.0;
    for (double p : dist.probs)
        if (p > 0.0) h -= p * std::log(p);
    if (base == EntropyBase::bits) h /= std::log(2.0);
    return h;
}

/// Direct-summation KL divergence sum p ln(p/q). Infinite when p places
/// mass where q has none.
inline double categorical_kl(const std::vector<double>& p, const std::vector<double>& q) {
    require(p.size() == q.size(), "KL requires equal support sizes");
    double kl = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return kl;
}

} // namespace seqrl
