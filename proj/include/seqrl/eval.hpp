#pragma once

// The base-vs-tuned comparison suite: pass@k (plugin and unbiased
// estimators), the Preservation/Expansion/Shrinkage/Out-of-support
// partition with ESR, positional entropy, perplexity, diversity, novelty
// and recovery rate. All metrics are pure functions over immutable logs.

#include <seqrl/core.hpp>
#include <seqrl/ioutil.hpp>

#include <functional>
#include <map>

namespace seqrl {

// ---------------------------------------------------------- sample log

struct SampleRecord {
    Sequence sequence;
    double log_prob = 0.0;
};

/// Per-context generation samples with the generating model's
/// log-probabilities; contexts keep their emission order.
struct SampleLog {
    std::string model_tag;
    int k_max = 0;
    std::vector<std::pair<std::string, std::vector<SampleRecord>>> contexts;

    int context_count() const { return static_cast<int>(contexts.size()); }

    const std::vector<SampleRecord>* find(const std::string& context_id) const {
        for (const auto& [id, samples] : contexts)
            if (id == context_id) return &samples;
        return nullptr;
    }

    void validate() const {
        require(!contexts.empty(), "sample log has no contexts");
        for (const auto& [id, samples] : contexts)
            require(static_cast<int>(samples.size()) >= k_max,
                    "context '" + id + "' has fewer than k_max samples");
    }
};

inline std::string sample_log_to_csv(const SampleLog& log, const Alphabet& alphabet) {
    std::ostringstream out;
    out << "# context_id,model_tag,sample_index,sequence,log_prob\n";
    for (const auto& [id, samples] : log.contexts)
        for (size_t i = 0; i < samples.size(); ++i)
            out << id << ',' << log.model_tag << ',' << i << ','
                << decode(alphabet, samples[i].sequence) << ','
                << format_double(samples[i].log_prob) << '\n';
    return out.str();
}

inline void save_sample_log(const SampleLog& log, const Alphabet& alphabet,
                            const std::filesystem::path& path) {
    atomic_write_file(path, sample_log_to_csv(log, alphabet));
}

inline SampleLog load_sample_log(const std::filesystem::path& path, const Alphabet& alphabet) {
    SampleLog log;
    std::ifstream in(path);
    require<ParseError>(in.good(), "cannot open sample log: " + path.string());
    std::string line;
    long line_no = 0;
    std::map<std::string, size_t> index;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto fields = split(t, ',');
        if (fields.size() != 5)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 5 fields in sample log");
        const std::string& id = fields[0];
        if (log.model_tag.empty()) log.model_tag = fields[1];
        SampleRecord rec{encode(alphabet, trim(fields[3])),
                         parse_double(trim(fields[4]), "sample log log_prob")};
        auto it = index.find(id);
        if (it == index.end()) {
            index.emplace(id, log.contexts.size());
            log.contexts.emplace_back(id, std::vector<SampleRecord>{std::move(rec)});
        } else {
            log.contexts[it->second].second.push_back(std::move(rec));
        }
    }
    require<ParseError>(!log.contexts.empty(), "sample log is empty: " + path.string());
    size_t min_samples = std::numeric_limits<size_t>::max();
    for (const auto& [id, samples] : log.contexts)
        min_samples = std::min(min_samples, samples.size());
    log.k_max = static_cast<int>(min_samples);
    return log;
}

// -------------------------------------------------------------- pass@k

enum class PassAtKEstimator { plugin, unbiased };

struct PassAtKResult {
    std::vector<double> per_context;
    double mean = 0.0;
};

namespace detail {

inline double pass_at_k_plugin(int n, int c, int k) {
    const double p_hat = static_cast<double>(c) / static_cast<double>(n);
    return 1.0 - std::pow(1.0 - p_hat, k);
}

inline double pass_at_k_unbiased(int n, int c, int k) {
    if (n - c < k) return 1.0; // every size-k subset contains a success
    double ratio = 1.0;       // C(n-c, k) / C(n, k)
    for (int i = 0; i < k; ++i)
        ratio *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    return 1.0 - ratio;
}

} // namespace detail

/// Per-context probability of at least one success in k samples. The
/// plugin estimator is 1 - (1 - p_hat)^k over the empirical success rate;
/// the unbiased one is 1 - C(n-c, k)/C(n, k).
inline PassAtKResult pass_at_k(const std::vector<std::vector<bool>>& success_flags, int k,
                               PassAtKEstimator estimator) {
    require(!success_flags.empty(), "pass@k needs at least one context");
    require(k >= 1, "k must be >= 1");
    PassAtKResult out;
    out.per_context.reserve(success_flags.size());
    for (const auto& flags : success_flags) {
        const int n = static_cast<int>(flags.size());
        require(k <= n, "k exceeds the number of samples in a context");
        int c = 0;
        for (bool b : flags) c += b ? 1 : 0;
        const double v = (estimator == PassAtKEstimator::plugin)
                             ? detail::pass_at_k_plugin(n, c, k)
                             : detail::pass_at_k_unbiased(n, c, k);
        out.per_context.push_back(v);
        out.mean += v / static_cast<double>(success_flags.size());
    }
    return out;
}

// ------------------------------------------------------------- support

/// The four counts partition the context set; esr = expansion / shrinkage
/// (+inf when shrinkage is 0 with expansion > 0, NaN when both are 0).
struct SupportReport {
    long preservation = 0;
    long expansion = 0;
    long shrinkage = 0;
    long out_of_support = 0;
    double esr = 0.0;

    long total() const { return preservation + expansion + shrinkage + out_of_support; }
};

inline double esr_from_counts(long expansion, long shrinkage) {
    if (shrinkage == 0)
        return expansion > 0 ? std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(expansion) / static_cast<double>(shrinkage);
}

/// shrinkage / expansion, with the same undefined-handling; reported next
/// to esr so a transposed ratio is easy to spot.
inline double esr_reciprocal(const SupportReport& report) {
    return esr_from_counts(report.shrinkage, report.expansion);
}

using SuccessPredicate = std::function<bool(const Sequence&)>;

/// A context is solved by a model iff any of its first k samples satisfies
/// the predicate. Solved by both -> preservation, only tuned -> expansion,
/// only base -> shrinkage, neither -> out_of_support.
inline SupportReport support_partition(const SampleLog& base, const SampleLog& tuned,
                                       const SuccessPredicate& success, int k) {
    require(k >= 1, "k must be >= 1");
    require(base.context_count() == tuned.context_count(),
            "sample logs cover different numbers of contexts (" +
                std::to_string(base.context_count()) + " vs " +
                std::to_string(tuned.context_count()) + ")");
    std::string missing;
    for (const auto& [id, samples] : base.contexts)
        if (tuned.find(id) == nullptr) missing += (missing.empty() ? "" : ", ") + id;
    require(missing.empty(), "contexts missing from the tuned log: " + missing);

    auto solved = [&](const std::vector<SampleRecord>& samples) {
        require(static_cast<int>(samples.size()) >= k,
                "a context has fewer than k samples");
        for (int i = 0; i < k; ++i)
            if (success(samples[static_cast<size_t>(i)].sequence)) return true;
        return false;
    };

    SupportReport report;
    for (const auto& [id, base_samples] : base.contexts) {
        const auto* tuned_samples = tuned.find(id);
        const bool b = solved(base_samples);
        const bool t = solved(*tuned_samples);
        if (b && t) ++report.preservation;
        else if (!b && t) ++report.expansion;
        else if (b && !t) ++report.shrinkage;
        else ++report.out_of_support;
    }
    report.esr = esr_from_counts(report.expansion, report.shrinkage);
    return report;
}

// ------------------------------------------------------------- metrics

/// Shannon entropy of the empirical residue distribution at each of the
/// given positions.
inline std::vector<double> positional_entropy(const std::vector<Sequence>& samples,
                                              const std::vector<int>& positions,
                                              EntropyBase base = EntropyBase::nats) {
    require(!samples.empty(), "positional entropy needs samples");
    std::vector<double> out;
    out.reserve(positions.size());
    for (int pos : positions) {
        std::map<int, int> counts;
        for (const auto& s : samples) {
            require(pos >= 0 && pos < s.length(), "position out of range for a sample");
            counts[s[pos]]++;
        }
        CategoricalDist dist;
        dist.probs.reserve(counts.size());
        for (const auto& [tok, c] : counts)
            dist.probs.push_back(static_cast<double>(c) / static_cast<double>(samples.size()));
        out.push_back(shannon_entropy(dist, base));
    }
    return out;
}

/// exp(-sum log_probs / sum token_counts).
inline double perplexity(const std::vector<double>& log_probs,
                         const std::vector<int>& token_counts) {
    require(log_probs.size() == token_counts.size() && !log_probs.empty(),
            "perplexity needs matching log-probs and token counts");
    double lp = 0.0;
    long tokens = 0;
    for (size_t i = 0; i < log_probs.size(); ++i) {
        require(token_counts[i] > 0, "token counts must be positive");
        lp += log_probs[i];
        tokens += token_counts[i];
    }
    return std::exp(-lp / static_cast<double>(tokens));
}

/// Positional identity: matching positions over the aligned length for
/// equal lengths, matches over the shared prefix divided by the longer
/// length otherwise.
inline double sequence_identity(const Sequence& a, const Sequence& b) {
    const int shared = std::min(a.length(), b.length());
    int matches = 0;
    for (int i = 0; i < shared; ++i) matches += (a[i] == b[i]) ? 1 : 0;
    return static_cast<double>(matches) / static_cast<double>(std::max(a.length(), b.length()));
}

/// 1 - mean pairwise identity over unordered sample pairs.
inline double pairwise_diversity(const std::vector<Sequence>& samples) {
    require(samples.size() >= 2, "diversity needs at least two samples");
    double total = 0.0;
    long pairs = 0;
    for (size_t i = 0; i < samples.size(); ++i)
        for (size_t j = i + 1; j < samples.size(); ++j) {
            total += sequence_identity(samples[i], samples[j]);
            ++pairs;
        }
    return 1.0 - total / static_cast<double>(pairs);
}

/// Mean over samples of 1 - max identity against the reference set.
inline double novelty(const std::vector<Sequence>& samples,
                      const std::vector<Sequence>& reference) {
    require(!reference.empty(), "novelty needs a non-empty reference set");
    require(!samples.empty(), "novelty needs samples");
    double total = 0.0;
    for (const auto& s : samples) {
        double best = 0.0;
        for (const auto& r : reference) best = std::max(best, sequence_identity(s, r));
        total += 1.0 - best;
    }
    return total / static_cast<double>(samples.size());
}

/// Fraction of positions matching the native sequence.
inline double recovery_rate(const Sequence& generated, const Sequence& native) {
    require(generated.length() == native.length(), "recovery rate needs equal lengths");
    int matches = 0;
    for (int i = 0; i < generated.length(); ++i) matches += (generated[i] == native[i]) ? 1 : 0;
    return static_cast<double>(matches) / static_cast<double>(generated.length());
}

} // namespace seqrl
