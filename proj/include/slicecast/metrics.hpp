#pragma once

// Per-question performance metrics and the models x questions score matrix.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "error.hpp"
#include "format.hpp"
#include "ingest.hpp"

namespace slicecast {

enum class MetricKind {
    accuracy,
    brier_standard,
    binary_brier_raw,
    binary_brier_conditional,
    token_edit_distance,
    modified_cosine_similarity,
};

inline constexpr MetricKind kDefaultMetric = MetricKind::binary_brier_conditional;

inline std::string_view metric_name(MetricKind m) {
    switch (m) {
    case MetricKind::accuracy: return "accuracy";
    case MetricKind::brier_standard: return "brier_standard";
    case MetricKind::binary_brier_raw: return "binary_brier_raw";
    case MetricKind::binary_brier_conditional: return "binary_brier_conditional";
    case MetricKind::token_edit_distance: return "token_edit_distance";
    case MetricKind::modified_cosine_similarity: return "modified_cosine_similarity";
    }
    return "unknown";
}

// Short tag used in difficulty-group labels, e.g. "0_1404_brier".
inline std::string_view metric_tag(MetricKind m) {
    switch (m) {
    case MetricKind::accuracy: return "acc";
    case MetricKind::brier_standard: return "stdbrier";
    case MetricKind::binary_brier_raw: return "rawbrier";
    case MetricKind::binary_brier_conditional: return "brier";
    case MetricKind::token_edit_distance: return "ted";
    case MetricKind::modified_cosine_similarity: return "mcs";
    }
    return "unknown";
}

// Accepts canonical names, tags, and the CLI spellings (cond-brier, raw-brier, ...).
inline std::optional<MetricKind> parse_metric(std::string_view s) {
    struct Alias {
        std::string_view name;
        MetricKind kind;
    };
    static constexpr std::array<Alias, 16> kAliases{{
        {"accuracy", MetricKind::accuracy},
        {"acc", MetricKind::accuracy},
        {"brier_standard", MetricKind::brier_standard},
        {"stdbrier", MetricKind::brier_standard},
        {"std-brier", MetricKind::brier_standard},
        {"binary_brier_raw", MetricKind::binary_brier_raw},
        {"rawbrier", MetricKind::binary_brier_raw},
        {"raw-brier", MetricKind::binary_brier_raw},
        {"binary_brier_conditional", MetricKind::binary_brier_conditional},
        {"brier", MetricKind::binary_brier_conditional},
        {"cond-brier", MetricKind::binary_brier_conditional},
        {"token_edit_distance", MetricKind::token_edit_distance},
        {"ted", MetricKind::token_edit_distance},
        {"modified_cosine_similarity", MetricKind::modified_cosine_similarity},
        {"mcs", MetricKind::modified_cosine_similarity},
        {"conditional-brier", MetricKind::binary_brier_conditional},
    }};
    for (const auto& a : kAliases)
        if (a.name == s) return a.kind;
    return std::nullopt;
}

// Standard Brier and edit distance are losses; everything else is a score.
inline bool higher_is_better(MetricKind m) {
    return m != MetricKind::brier_standard && m != MetricKind::token_edit_distance;
}

inline bool needs_strings(MetricKind m) {
    return m == MetricKind::token_edit_distance || m == MetricKind::modified_cosine_similarity;
}

// Probability of the correct choice renormalized over the available choices.
inline double conditional_prob(std::span<const double> choice_probs, std::size_t correct_index) {
    if (correct_index >= choice_probs.size()) throw ValidationError("correct_index out of range");
    double sum = 0.0;
    for (double p : choice_probs) sum += p;
    if (!(sum > 0.0)) throw NumericalError("conditional probability undefined: choice probabilities sum to zero");
    return choice_probs[correct_index] / sum;
}

// -(p_hat - 1)^2; 0 is perfect, -1 is worst.
inline double binary_brier_question(double p_hat) {
    if (!(p_hat >= 0.0 && p_hat <= 1.0))
        throw ValidationError("binary Brier input " + format_double(p_hat) + " outside [0,1]");
    const double d = p_hat - 1.0;
    return -(d * d);
}

inline double standard_brier(std::span<const double> choice_probs, std::size_t correct_index) {
    if (correct_index >= choice_probs.size()) throw ValidationError("correct_index out of range");
    double total = 0.0;
    for (std::size_t i = 0; i < choice_probs.size(); ++i) {
        const double d = choice_probs[i] - (i == correct_index ? 1.0 : 0.0);
        total += d * d;
    }
    return total;
}

// 1 iff the correct choice is the argmax; ties go to the lowest index.
inline double accuracy_question(std::span<const double> choice_probs, std::size_t correct_index) {
    if (choice_probs.empty()) throw ValidationError("empty choice_probs");
    std::size_t best = 0;
    for (std::size_t i = 1; i < choice_probs.size(); ++i)
        if (choice_probs[i] > choice_probs[best]) best = i;
    return best == correct_index ? 1.0 : 0.0;
}

// Unit-cost Levenshtein distance over arbitrary token sequences. Strings are
// compared character by character.
template <typename SeqA, typename SeqB>
std::size_t token_edit_distance(const SeqA& a, const SeqB& b) {
    const std::size_t n = std::size(a);
    const std::size_t m = std::size(b);
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    auto ia = std::begin(a);
    for (std::size_t i = 1; i <= n; ++i, ++ia) {
        cur[0] = i;
        auto jb = std::begin(b);
        for (std::size_t j = 1; j <= m; ++j, ++jb) {
            const std::size_t subst = prev[j - 1] + (*ia == *jb ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

using Embedding = std::vector<double>;
using Embedder = std::function<Embedding(std::string_view)>;

// Counts of byte bigrams of "^" + s + "$", hashed into a fixed number of
// buckets. Boundary markers keep every string (including "") nonzero.
class BigramEmbedder {
public:
    explicit BigramEmbedder(std::size_t dimension = 4096) : dimension_(dimension) {}

    std::size_t dimension() const { return dimension_; }

    Embedding operator()(std::string_view s) const {
        Embedding v(dimension_, 0.0);
        constexpr unsigned kBoundary = 256;
        unsigned prev = kBoundary;
        for (unsigned char c : s) {
            v[bucket(prev, c)] += 1.0;
            prev = c;
        }
        v[bucket(prev, kBoundary)] += 1.0;
        return v;
    }

private:
    std::size_t bucket(unsigned a, unsigned b) const {
        std::uint64_t z = static_cast<std::uint64_t>(a) * 257u + b + 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return static_cast<std::size_t>(z % dimension_);
    }

    std::size_t dimension_;
};

// True when every byte of `needle` occurs in `haystack` at least as often.
inline bool multiset_contains(std::string_view haystack, std::string_view needle) {
    std::array<std::size_t, 256> counts{};
    for (unsigned char c : haystack) ++counts[c];
    for (unsigned char c : needle) {
        if (counts[c] == 0) return false;
        --counts[c];
    }
    return true;
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("embedding dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (!(na > 0.0) || !(nb > 0.0)) throw NumericalError("degenerate embedding: zero norm");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// Cosine similarity of the embeddings, zeroed unless s1's characters are a
// sub-multiset of s2's.
inline double modified_cosine_similarity(std::string_view s1, std::string_view s2, const Embedder& embed) {
    const auto e1 = embed(s1);
    const auto e2 = embed(s2);
    const double cos = cosine_similarity(e1, e2);
    return multiset_contains(s2, s1) ? cos : 0.0;
}

inline double modified_cosine_similarity(std::string_view s1, std::string_view s2) {
    return modified_cosine_similarity(s1, s2, Embedder(BigramEmbedder{}));
}

// Per-question value of `metric` for one record.
inline double score_record(MetricKind metric, const ChoiceEval& e, const Embedder& embed) {
    switch (metric) {
    case MetricKind::accuracy: return accuracy_question(e.choice_probs, e.correct_index);
    case MetricKind::brier_standard: return standard_brier(e.choice_probs, e.correct_index);
    case MetricKind::binary_brier_raw: return binary_brier_question(e.choice_probs[e.correct_index]);
    case MetricKind::binary_brier_conditional:
        return binary_brier_question(conditional_prob(e.choice_probs, e.correct_index));
    case MetricKind::token_edit_distance:
        return static_cast<double>(token_edit_distance(*e.prediction, *e.target));
    case MetricKind::modified_cosine_similarity:
        return modified_cosine_similarity(*e.prediction, *e.target, embed);
    }
    throw ValidationError("unknown metric");
}

struct ScoreMatrix {
    MetricKind metric = kDefaultMetric;
    std::vector<std::string> model_ids;    // ascending M
    std::vector<double> model_sizes;       // M per row
    std::vector<std::string> question_ids; // column order
    std::vector<double> values;            // row-major

    std::size_t rows() const { return model_ids.size(); }
    std::size_t cols() const { return question_ids.size(); }
    double operator()(std::size_t model, std::size_t question) const { return values[model * cols() + question]; }
    std::span<const double> row(std::size_t model) const {
        return std::span<const double>(values).subspan(model * cols(), cols());
    }
};

// Sequential left-to-right mean; fixed order keeps results bit-reproducible.
inline double ordered_mean(std::span<const double> xs) {
    if (xs.empty()) throw ValidationError("mean of an empty sequence");
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

inline std::vector<double> aggregate_scores(const ScoreMatrix& m) {
    std::vector<double> out;
    out.reserve(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(ordered_mean(m.row(r)));
    return out;
}

// Builds the score matrix. Rows follow the table's ascending-M order and
// columns its question order. Cells are independent, so `threads` only
// changes wall time, never the values.
inline ScoreMatrix score_matrix(const EvalTable& table, MetricKind metric,
                                const Embedder& embed = Embedder(BigramEmbedder{}), unsigned threads = 1) {
    if (needs_strings(metric)) {
        for (const auto& e : table.records) {
            const char* missing = !e.prediction ? "prediction" : (!e.target ? "target" : nullptr);
            if (missing)
                throw ValidationError(std::string("metric ") + std::string(metric_name(metric)) +
                                      " requires field '" + missing + "' but record (" + e.model_id + ", " +
                                      e.question_id + ") lacks it");
        }
    }

    ScoreMatrix out;
    out.metric = metric;
    for (const auto& m : table.models) {
        out.model_ids.push_back(m.model_id);
        out.model_sizes.push_back(m.effective_size);
    }
    out.question_ids = table.question_ids;
    out.values.assign(table.records.size(), 0.0);

    auto fill_rows = [&](std::size_t begin, std::size_t end) {
        const std::size_t nq = table.question_count();
        for (std::size_t r = begin; r < end; ++r)
            for (std::size_t q = 0; q < nq; ++q) out.values[r * nq + q] = score_record(metric, table.at(r, q), embed);
    };

    const std::size_t rows = table.model_count();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rows)));
    if (threads == 1) {
        fill_rows(0, rows);
        return out;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t b = rows * t / threads;
            const std::size_t e = rows * (t + 1) / threads;
            pool.emplace_back([&, b, e, t] {
                try {
                    fill_rows(b, e);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return out;
}

} // namespace slicecast
