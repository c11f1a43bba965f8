#pragma once

// Synthetic evaluation corpora with planted per-difficulty scaling shapes.
//
// Every question has a latent difficulty d in (0, 1). Its conditional
// probability on the correct choice follows
//     p*(M, d) = (1 - d) * easy(M) + d * hard(M)
// where, for the emergent scenario, easy() rises, dips just before the planted
// threshold and rises again, and hard() falls to a trough before the threshold
// and then recovers. All randomness is a pure function of
// (seed, model, question, stream), so cells can be generated in any order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "format.hpp"
#include "ingest.hpp"

namespace slicecast::synth {

enum class Scenario { emergent, non_emergent, flat };

inline std::string_view scenario_name(Scenario s) {
    switch (s) {
    case Scenario::emergent: return "emergent";
    case Scenario::non_emergent: return "non_emergent";
    case Scenario::flat: return "flat";
    }
    return "unknown";
}

inline std::optional<Scenario> parse_scenario(std::string_view s) {
    if (s == "emergent") return Scenario::emergent;
    if (s == "non_emergent" || s == "non-emergent") return Scenario::non_emergent;
    if (s == "flat") return Scenario::flat;
    return std::nullopt;
}

struct ScenarioSpec {
    Scenario scenario = Scenario::emergent;
    std::size_t n_models = 30;
    std::size_t n_questions = 600;
    double m_lo = -1.0;
    double m_hi = 3.0;
    double planted_threshold = 1.5;
    double noise_sd = 0.01;
    std::uint64_t seed = 0;
    std::size_t n_choices = 4;
    std::size_t group_count = 3;
};

// Archetype constants for the emergent scenario, in s = (M - T) / (M_hi - M_lo).
// easy(s) is a cubic with a local maximum at kEasyPeak and a local minimum at
// kEasyDip; hard(s) is a parabola with its trough at kHardTrough.
inline constexpr double kEasyPeak = -0.38;
inline constexpr double kEasyDip = -0.065;
inline constexpr double kEasyPeakValue = 0.72;
inline constexpr double kEasyAmplitude = 5.0;
inline constexpr double kHardTrough = -0.27;
inline constexpr double kHardTroughValue = 0.13;
inline constexpr double kHardCurvature = 0.49;

// Total probability mass on the choices is drawn from [kMassLo, 1].
inline constexpr double kMassLo = 0.6;

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t a, std::uint64_t b, std::uint64_t stream) const {
        std::uint64_t h = mix(seed_ ^ 0x243f6a8885a308d3ull);
        h = mix(h ^ (a * 0x9e3779b97f4a7c15ull));
        h = mix(h ^ (b * 0xc2b2ae3d27d4eb4full));
        return mix(h ^ (stream * 0x165667b19e3779f9ull));
    }

    // [0, 1)
    double uniform(std::uint64_t a, std::uint64_t b, std::uint64_t stream) const {
        return static_cast<double>(bits(a, b, stream) >> 11) * 0x1.0p-53;
    }

    double normal(std::uint64_t a, std::uint64_t b, std::uint64_t stream) const {
        const double u1 = 1.0 - uniform(a, b, stream);
        const double u2 = uniform(a, b, stream + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

namespace detail {

// Streams. Question-level draws use model slot 0; cells use model index + 1.
enum : std::uint64_t {
    kStreamCorrect = 1,
    kStreamDistractor = 2,
    kStreamRank = 3,
    kStreamThresholdOffset = 4,
    kStreamNoise = 5, // and 6
    kStreamMass = 7,
};

inline double easy_cubic(double s) {
    return s * s * s / 3.0 - 0.5 * (kEasyPeak + kEasyDip) * s * s + kEasyPeak * kEasyDip * s;
}

} // namespace detail

inline void validate(const ScenarioSpec& spec) {
    if (spec.n_models < 6) throw ValidationError("synth: need at least 6 models");
    if (spec.group_count < 2) throw ValidationError("synth: group count must be at least 2");
    if (spec.n_questions < 3 * spec.group_count)
        throw ValidationError("synth: need at least " + std::to_string(3 * spec.group_count) + " questions for " +
                              std::to_string(spec.group_count) + " groups");
    if (spec.n_choices < 2) throw ValidationError("synth: need at least 2 choices");
    if (!(spec.m_lo < spec.m_hi) || !std::isfinite(spec.m_lo) || !std::isfinite(spec.m_hi))
        throw ValidationError("synth: invalid M range");
    if (!(spec.planted_threshold > spec.m_lo && spec.planted_threshold < spec.m_hi))
        throw ValidationError("synth: planted threshold must lie inside the M range");
    if (!(spec.noise_sd >= 0.0) || !std::isfinite(spec.noise_sd)) throw ValidationError("synth: invalid noise_sd");
}

inline double easy_archetype(const ScenarioSpec& spec, double m) {
    switch (spec.scenario) {
    case Scenario::emergent: {
        const double s = (m - spec.planted_threshold) / (spec.m_hi - spec.m_lo);
        return kEasyPeakValue + kEasyAmplitude * (detail::easy_cubic(s) - detail::easy_cubic(kEasyPeak));
    }
    case Scenario::non_emergent: return 0.55 + 0.4 * (m - spec.m_lo) / (spec.m_hi - spec.m_lo);
    case Scenario::flat: return 0.8;
    }
    return 0.0;
}

inline double hard_archetype(const ScenarioSpec& spec, double m) {
    switch (spec.scenario) {
    case Scenario::emergent: {
        const double s = (m - spec.planted_threshold) / (spec.m_hi - spec.m_lo);
        return kHardTroughValue + kHardCurvature * (s - kHardTrough) * (s - kHardTrough);
    }
    case Scenario::non_emergent: return 0.15 + 0.3 * (m - spec.m_lo) / (spec.m_hi - spec.m_lo);
    case Scenario::flat: return 0.2;
    }
    return 0.0;
}

// Noise-free conditional probability of the correct choice.
inline double planted_probability(const ScenarioSpec& spec, double difficulty, double m) {
    const double p = (1.0 - difficulty) * easy_archetype(spec, m) + difficulty * hard_archetype(spec, m);
    return std::clamp(p, 0.0, 1.0);
}

struct Corpus {
    std::vector<ModelRecord> models;          // ascending M
    std::vector<std::string> question_ids;    // ascending
    std::vector<double> latent_difficulty;    // per question
    std::vector<ChoiceEval> evals;            // model-major, question order
};

inline std::vector<double> model_grid(const ScenarioSpec& spec) {
    std::vector<double> m(spec.n_models);
    for (std::size_t i = 0; i < spec.n_models; ++i)
        m[i] = spec.m_lo + (spec.m_hi - spec.m_lo) * static_cast<double>(i) / static_cast<double>(spec.n_models - 1);
    return m;
}

namespace detail {

inline std::string padded(std::string_view prefix, std::size_t i, std::size_t count) {
    const std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
    auto s = std::to_string(i);
    return std::string(prefix) + std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

} // namespace detail

inline Corpus generate(const ScenarioSpec& spec) {
    validate(spec);
    const CounterRng rng(spec.seed);
    const std::size_t nq = spec.n_questions;
    const std::size_t nc = spec.n_choices;

    Corpus c;
    const auto sizes = model_grid(spec);
    for (std::size_t i = 0; i < spec.n_models; ++i) {
        ModelRecord m;
        m.model_id = detail::padded("m", i, spec.n_models);
        m.explicit_size = sizes[i];
        m.effective_size = sizes[i];
        c.models.push_back(std::move(m));
    }
    for (std::size_t q = 0; q < nq; ++q) c.question_ids.push_back(detail::padded("q", q, nq));

    // Latent difficulty: evenly spaced levels dealt out by a seeded shuffle.
    std::vector<std::size_t> perm(nq);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        const auto ha = rng.bits(0, a, detail::kStreamRank), hb = rng.bits(0, b, detail::kStreamRank);
        return ha != hb ? ha < hb : a < b;
    });
    c.latent_difficulty.resize(nq);
    for (std::size_t r = 0; r < nq; ++r)
        c.latent_difficulty[perm[r]] = (static_cast<double>(r) + 0.5) / static_cast<double>(nq);

    // Share of the wrong-answer mass taken by the strongest distractor. The
    // correct choice wins the argmax iff p > w / (1 + w). Values are spread
    // by a golden-ratio sequence so aggregate accuracy varies smoothly.
    const double w_min = nc > 2 ? 1.0 / static_cast<double>(nc - 1) : 1.0;
    const double offset = rng.uniform(0, 0, detail::kStreamThresholdOffset);
    std::vector<double> distractor_share(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        double u = (static_cast<double>(q) + 0.5) * 0.6180339887498949 + offset;
        u -= std::floor(u);
        distractor_share[q] = w_min + (1.0 - w_min) * u;
    }

    c.evals.reserve(spec.n_models * nq);
    for (std::size_t mi = 0; mi < spec.n_models; ++mi) {
        for (std::size_t q = 0; q < nq; ++q) {
            const std::size_t correct = rng.bits(0, q, detail::kStreamCorrect) % nc;
            const std::size_t distractor = (correct + 1 + rng.bits(0, q, detail::kStreamDistractor) % (nc - 1)) % nc;

            double p = planted_probability(spec, c.latent_difficulty[q], sizes[mi]);
            if (spec.noise_sd > 0.0) p += spec.noise_sd * rng.normal(mi + 1, q, detail::kStreamNoise);
            p = std::clamp(p, 0.0, 1.0);
            const double mass = kMassLo + (1.0 - kMassLo) * rng.uniform(mi + 1, q, detail::kStreamMass);

            ChoiceEval e;
            e.model_id = c.models[mi].model_id;
            e.question_id = c.question_ids[q];
            e.correct_index = correct;
            e.choice_probs.assign(nc, 0.0);
            const double wrong = (1.0 - p) * mass;
            const double w = distractor_share[q];
            for (std::size_t k = 0; k < nc; ++k) {
                if (k == correct)
                    e.choice_probs[k] = p * mass;
                else if (k == distractor)
                    e.choice_probs[k] = nc == 2 ? wrong : wrong * w;
                else
                    e.choice_probs[k] = wrong * (1.0 - w) / static_cast<double>(nc - 2);
            }
            c.evals.push_back(std::move(e));
        }
    }
    return c;
}

inline void write_evals(std::ostream& out, const std::vector<ChoiceEval>& evals) {
    for (const auto& e : evals) {
        out << "{\"model_id\":" << nlohmann::json(e.model_id).dump() << ",\"question_id\":"
            << nlohmann::json(e.question_id).dump() << ",\"choice_probs\":[";
        for (std::size_t k = 0; k < e.choice_probs.size(); ++k) {
            if (k) out << ',';
            out << format_double(e.choice_probs[k]);
        }
        out << "],\"correct_index\":" << e.correct_index;
        if (e.prediction) out << ",\"prediction\":" << nlohmann::json(*e.prediction).dump();
        if (e.target) out << ",\"target\":" << nlohmann::json(*e.target).dump();
        out << "}\n";
    }
}

inline EvalTable to_table(const Corpus& c) {
    EvalTable t;
    t.models = c.models;
    t.question_ids = c.question_ids;
    t.records = c.evals;
    return t;
}

} // namespace slicecast::synth
