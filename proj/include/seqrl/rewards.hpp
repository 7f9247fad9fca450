#pragma once

// Scalar reward oracles standing in for MIC classifiers, fitness assays and
// ddG predictors: variant lookup tables, synthetic NK landscapes, the
// 2*(f - lambda) threshold transform, and a deterministic noise wrapper for
// reward-accuracy experiments. All oracles are pure after construction and
// safe for concurrent reads.

#include <seqrl/core.hpp>
#include <seqrl/ioutil.hpp>

#include <functional>
#include <unordered_map>

namespace seqrl {

using RewardFn = std::function<double(const Sequence&)>;

// ------------------------------------------------------------- table

/// Variant lookup table over a fixed set of mutable sites. Annotated
/// variants return their table value, unannotated ones default_unlabeled
/// (-1), and sequences mutated outside the sites invalid_penalty (-100).
class TableLandscape {
public:
    TableLandscape(std::vector<int> site_positions, Sequence wild_type, int alphabet_size,
                   double default_unlabeled = -1.0, double invalid_penalty = -100.0)
        : sites_(std::move(site_positions)), wild_type_(std::move(wild_type)),
          alphabet_size_(alphabet_size), default_unlabeled_(default_unlabeled),
          invalid_penalty_(invalid_penalty) {
        require<InvalidConfig>(!sites_.empty(), "landscape needs at least one site");
        require<InvalidConfig>(sites_.size() <= 12, "at most 12 mutable sites supported");
        require<InvalidConfig>(alphabet_size_ >= 2 && alphabet_size_ <= 32,
                               "alphabet size must lie in [2, 32]");
        validate_sequence(wild_type_, alphabet_size_);
        for (int s : sites_)
            require<InvalidConfig>(s >= 0 && s < wild_type_.length(),
                                   "site position out of range");
    }

    const std::vector<int>& site_positions() const { return sites_; }
    const Sequence& wild_type() const { return wild_type_; }
    int alphabet_size() const { return alphabet_size_; }
    double default_unlabeled() const { return default_unlabeled_; }
    double invalid_penalty() const { return invalid_penalty_; }
    size_t size() const { return table_.size(); }

    uint64_t pack_variant(const std::vector<int>& residues) const {
        require(residues.size() == sites_.size(), "variant arity mismatch");
        uint64_t key = 0;
        for (int r : residues) {
            require(r >= 0 && r < alphabet_size_, "variant residue out of range");
            key = (key << 5) | static_cast<uint64_t>(r);
        }
        return key;
    }

    std::vector<int> unpack_variant(uint64_t key) const {
        std::vector<int> residues(sites_.size(), 0);
        for (size_t i = sites_.size(); i-- > 0;) {
            residues[i] = static_cast<int>(key & 0x1F);
            key >>= 5;
        }
        return residues;
    }

    void insert(const std::vector<int>& residues, double fitness) {
        uint64_t key = pack_variant(residues);
        require<DuplicateVariant>(table_.find(key) == table_.end(),
                                  "duplicate variant in landscape table");
        table_.emplace(key, fitness);
    }

    bool contains(const std::vector<int>& residues) const {
        return table_.find(pack_variant(residues)) != table_.end();
    }

    double fitness(const Sequence& seq) const {
        require(seq.length() == wild_type_.length(), "sequence length mismatch");
        for (int i = 0; i < seq.length(); ++i) {
            bool is_site = false;
            for (int s : sites_)
                if (s == i) { is_site = true; break; }
            if (!is_site && seq[i] != wild_type_[i]) return invalid_penalty_;
        }
        uint64_t key = 0;
        for (int s : sites_) key = (key << 5) | static_cast<uint64_t>(seq[s]);
        auto it = table_.find(key);
        return it == table_.end() ? default_unlabeled_ : it->second;
    }

    /// Variant keys in ascending packed order; the deterministic emission
    /// and pool-construction order.
    std::vector<uint64_t> sorted_keys() const {
        std::vector<uint64_t> keys;
        keys.reserve(table_.size());
        for (const auto& [k, v] : table_) keys.push_back(k);
        std::sort(keys.begin(), keys.end());
        return keys;
    }

    double value_of_key(uint64_t key) const { return table_.at(key); }

    Sequence sequence_of_key(uint64_t key) const {
        Sequence s = wild_type_;
        auto residues = unpack_variant(key);
        for (size_t i = 0; i < sites_.size(); ++i)
            s[sites_[i]] = residues[i];
        return s;
    }

private:
    std::vector<int> sites_;
    Sequence wild_type_;
    int alphabet_size_;
    double default_unlabeled_;
    double invalid_penalty_;
    std::unordered_map<uint64_t, double> table_;
};

inline double table_fitness(const TableLandscape& land, const Sequence& seq) {
    return land.fitness(seq);
}

// ---------------------------------------------------------------- NK

/// Synthetic rugged landscape: fitness is the mean of per-site contributions,
/// each a deterministic hash of the site's residue and its k interaction
/// partners. k=0 is purely additive; larger k adds ruggedness.
class NKLandscape {
public:
    NKLandscape(int n, int k, int alphabet_size, uint64_t seed)
        : n_(n), k_(k), alphabet_size_(alphabet_size), seed_(seed) {
        require<InvalidConfig>(n >= 1, "NK landscape needs n >= 1");
        require<InvalidConfig>(k >= 0 && k < n, "NK interaction order must satisfy 0 <= k < n");
        require<InvalidConfig>(alphabet_size >= 2, "alphabet size must be >= 2");
        neighbors_.resize(static_cast<size_t>(n));
        for (int site = 0; site < n; ++site) {
            RngStream rng(seed, static_cast<uint64_t>(site) + 1);
            std::vector<int> pool;
            for (int j = 0; j < n; ++j)
                if (j != site) pool.push_back(j);
            for (int pick = 0; pick < k; ++pick) {
                int idx = rng.next_below(static_cast<int>(pool.size()));
                neighbors_[static_cast<size_t>(site)].push_back(pool[static_cast<size_t>(idx)]);
                pool.erase(pool.begin() + idx);
            }
            std::sort(neighbors_[static_cast<size_t>(site)].begin(),
                      neighbors_[static_cast<size_t>(site)].end());
        }
    }

    int n() const { return n_; }
    int k() const { return k_; }
    int alphabet_size() const { return alphabet_size_; }
    uint64_t seed() const { return seed_; }
    const std::vector<int>& neighbors(int site) const { return neighbors_[static_cast<size_t>(site)]; }

    double contribution(int site, const Sequence& seq) const {
        uint64_t tuple = static_cast<uint64_t>(seq[site]);
        for (int nb : neighbors_[static_cast<size_t>(site)])
            tuple = tuple * static_cast<uint64_t>(alphabet_size_) + static_cast<uint64_t>(seq[nb]);
        uint64_t h = detail::hash_combine(detail::mix64(seed_ ^ 0xA5C152ull),
                                          (static_cast<uint64_t>(site) << 40) ^ tuple);
        return hash_u01(h);
    }

    double fitness(const Sequence& seq) const {
        require(seq.length() == n_, "sequence length mismatch");
        validate_sequence(seq, alphabet_size_);
        double sum = 0.0;
        for (int site = 0; site < n_; ++site) sum += contribution(site, seq);
        return sum / n_;
    }

private:
    int n_;
    int k_;
    int alphabet_size_;
    uint64_t seed_;
    std::vector<std::vector<int>> neighbors_;
};

inline double nk_fitness(const NKLandscape& land, const Sequence& seq) {
    return land.fitness(seq);
}

// ---------------------------------------------------------- threshold

/// R(s) = 2 * (f(s) - lambda): maps a [0,1] classifier score to a signed
/// reward that is zero exactly at the decision threshold.
struct ThresholdClassifierReward {
    RewardFn scorer;
    double lambda = 0.4;

    double reward(const Sequence& seq) const { return 2.0 * (scorer(seq) - lambda); }
};

inline double threshold_reward(const ThresholdClassifierReward& r, const Sequence& seq) {
    return r.reward(seq);
}

// -------------------------------------------------------------- noise

/// Deterministic reward corruption for the reward-accuracy axis. With
/// probability corruption_rate (decided by a hash of seed and sequence, so
/// a given sequence is consistently corrupted) the value is mirrored across
/// flip_threshold, flipping any success test against that threshold;
/// Gaussian noise with sd noise_sd is added on top. Zero noise and zero
/// corruption reproduce the base oracle exactly.
class NoisyOracle {
public:
    NoisyOracle(RewardFn base, double noise_sd, double corruption_rate, double flip_threshold,
                uint64_t seed)
        : base_(std::move(base)), noise_sd_(noise_sd), corruption_rate_(corruption_rate),
          flip_threshold_(flip_threshold), seed_(seed) {
        require<InvalidConfig>(noise_sd >= 0.0, "noise_sd must be >= 0");
        require<InvalidConfig>(corruption_rate >= 0.0 && corruption_rate <= 1.0,
                               "corruption_rate must lie in [0, 1]");
    }

    double reward(const Sequence& seq) const {
        double v = base_(seq);
        if (corruption_rate_ > 0.0) {
            double u = hash_u01(hash_sequence(seed_ ^ 0xF11Full, seq));
            if (u < corruption_rate_) v = 2.0 * flip_threshold_ - v;
        }
        if (noise_sd_ > 0.0) {
            uint64_t h = hash_sequence(seed_ ^ 0x5EEDull, seq);
            double u1 = 1.0 - hash_u01(h);
            double u2 = hash_u01(detail::mix64(h + 1));
            v += noise_sd_ * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        }
        return v;
    }

private:
    RewardFn base_;
    double noise_sd_;
    double corruption_rate_;
    double flip_threshold_;
    uint64_t seed_;
};

// ------------------------------------------------------------ csv io

/// Parses `variant,fitness` rows (variant as a residue string over the
/// alphabet, one character per site). `#` comment lines are skipped and an
/// optional single header row is ignored. Duplicate variants are rejected.
inline TableLandscape load_landscape_csv(const std::filesystem::path& path,
                                         std::vector<int> site_positions, Sequence wild_type,
                                         const Alphabet& alphabet) {
    TableLandscape land(std::move(site_positions), std::move(wild_type), alphabet.size());
    std::ifstream in(path);
    require<ParseError>(in.good(), "cannot open landscape CSV: " + path.string());

    std::string line;
    long line_no = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto fields = split(t, ',');
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        if (fields.size() != 2)
            throw ParseError("line " + std::to_string(line_no) + ": expected 2 fields, got " +
                             std::to_string(fields.size()));
        std::string variant(trim(fields[0]));
        std::string value(trim(fields[1]));

        char* end = nullptr;
        double fitness = std::strtod(value.c_str(), &end);
        bool numeric = end != value.c_str() && *end == '\0' && !value.empty();
        if (!numeric) {
            if (!seen_data) continue; // optional header row
            throw ParseError("line " + std::to_string(line_no) + ": cannot parse fitness '" +
                             value + "'");
        }

        if (variant.size() != land.site_positions().size())
            throw ParseError("line " + std::to_string(line_no) + ": variant '" + variant +
                             "' must have one residue per site (" +
                             std::to_string(land.site_positions().size()) + ")");
        std::vector<int> residues;
        residues.reserve(variant.size());
        for (char c : variant) {
            if (!alphabet.contains(c))
                throw ParseError("line " + std::to_string(line_no) + ": residue '" +
                                 std::string(1, c) + "' not in alphabet");
            residues.push_back(alphabet.index(c));
        }
        land.insert(residues, fitness);
        seen_data = true;
    }
    return land;
}

inline std::string landscape_to_csv(const TableLandscape& land, const Alphabet& alphabet) {
    std::ostringstream out;
    out << "# variant,fitness\n";
    for (uint64_t key : land.sorted_keys()) {
        auto residues = land.unpack_variant(key);
        for (int r : residues) out << alphabet.symbol(r);
        out << ',' << format_double(land.value_of_key(key)) << '\n';
    }
    return out.str();
}

inline void save_landscape_csv(const TableLandscape& land, const Alphabet& alphabet,
                               const std::filesystem::path& path) {
    atomic_write_file(path, landscape_to_csv(land, alphabet));
}

// -------------------------------------------------------- generators

struct PhoqLikeParams {
    int num_sites = 4;
    int sequence_length = 4;     // sites occupy the first num_sites positions
    double high_fraction = 0.01; // fraction of variants in the >10 fitness bin
    double mid_fraction = 0.20;  // fitness in (1, 10]
    double low_fraction = 0.30;  // fitness in (0, 1]; the rest sit exactly at 0
    double coverage = 1.0;       // fraction of variants annotated at all
};

/// Deterministic synthetic table with the PhoQ character: four mutable
/// sites over 20 residues, a long-tailed fitness distribution in bins
/// (=0, <=1, <=10, >10), and a sparse high-fitness set.
inline TableLandscape make_phoq_like(const PhoqLikeParams& params, const Alphabet& alphabet,
                                     uint64_t seed) {
    require<InvalidConfig>(params.num_sites >= 1 && params.num_sites <= 8,
                           "phoq_like supports 1..8 sites");
    require<InvalidConfig>(params.sequence_length >= params.num_sites,
                           "sequence_length must cover the sites");
    require<InvalidConfig>(params.high_fraction >= 0.0 && params.mid_fraction >= 0.0 &&
                               params.low_fraction >= 0.0 &&
                               params.high_fraction + params.mid_fraction + params.low_fraction <= 1.0,
                           "bin fractions must be non-negative and sum to at most 1");
    require<InvalidConfig>(params.coverage > 0.0 && params.coverage <= 1.0,
                           "coverage must lie in (0, 1]");

    const int A = alphabet.size();
    std::vector<int> sites(static_cast<size_t>(params.num_sites));
    std::iota(sites.begin(), sites.end(), 0);
    Sequence wild_type{std::vector<int>(static_cast<size_t>(params.sequence_length), 0)};
    TableLandscape land(sites, wild_type, A);

    uint64_t total = 1;
    for (int i = 0; i < params.num_sites; ++i) total *= static_cast<uint64_t>(A);

    std::vector<int> residues(static_cast<size_t>(params.num_sites), 0);
    for (uint64_t v = 0; v < total; ++v) {
        uint64_t rem = v;
        for (size_t i = residues.size(); i-- > 0;) {
            residues[i] = static_cast<int>(rem % static_cast<uint64_t>(A));
            rem /= static_cast<uint64_t>(A);
        }
        uint64_t h = detail::hash_combine(detail::mix64(seed + 0xB10B5ull), v);
        double u_keep = hash_u01(h);
        if (u_keep >= params.coverage) continue;

        double u_class = hash_u01(detail::mix64(h ^ 0xC1A55ull));
        double u_value = hash_u01(detail::mix64(h ^ 0x7A1Eull));
        double fitness;
        if (u_class < params.high_fraction) {
            fitness = 10.0 + 130.0 * u_value;           // rare top bin, peaks near 140
        } else if (u_class < params.high_fraction + params.mid_fraction) {
            fitness = 1.0 + 9.0 * u_value;              // (1, 10]
        } else if (u_class < params.high_fraction + params.mid_fraction + params.low_fraction) {
            fitness = u_value;                          // (0, 1]
        } else {
            fitness = 0.0;                              // dead variants
        }
        land.insert(residues, fitness);
    }
    return land;
}

} // namespace seqrl
