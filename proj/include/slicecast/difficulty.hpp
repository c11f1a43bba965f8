#pragma once

// Question difficulty from small-model performance, easiest-first sorting, and
// slicing into G labeled groups.

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"
#include "metrics.hpp"

namespace slicecast {

inline constexpr std::size_t kPhenomenonGroups = 10;
inline constexpr std::size_t kForecastGroups = 3;

struct DifficultyGrouping {
    MetricKind metric = kDefaultMetric;
    std::vector<std::size_t> order;      // question indices, easiest first
    std::vector<std::size_t> boundaries; // G + 1 sorted positions
    std::vector<std::string> labels;     // "<lo>_<hi>_<tag>"
    std::vector<double> difficulty;      // per question index (column order)

    std::size_t group_count() const { return labels.size(); }

    // Question indices of group g in ascending index order.
    std::vector<std::size_t> members(std::size_t g) const {
        std::vector<std::size_t> m(order.begin() + static_cast<std::ptrdiff_t>(boundaries[g]),
                                   order.begin() + static_cast<std::ptrdiff_t>(boundaries[g + 1]));
        std::sort(m.begin(), m.end());
        return m;
    }
};

// Mean score of one question over the training models.
inline double question_difficulty(std::span<const double> train_scores) {
    if (train_scores.empty()) throw ValidationError("question difficulty needs at least one training model");
    return ordered_mean(train_scores);
}

inline std::vector<double> question_difficulties(const ScoreMatrix& scores, std::span<const std::size_t> train) {
    if (train.empty()) throw ValidationError("question difficulty needs at least one training model");
    std::vector<double> out(scores.cols());
    std::vector<double> column(train.size());
    for (std::size_t q = 0; q < scores.cols(); ++q) {
        for (std::size_t i = 0; i < train.size(); ++i) column[i] = scores(train[i], q);
        out[q] = question_difficulty(column);
    }
    return out;
}

// Group i spans sorted positions [floor(i*N/G), floor((i+1)*N/G)).
inline std::vector<std::size_t> group_boundaries(std::size_t n, std::size_t groups) {
    if (groups < 2) throw ValidationError("group count must be at least 2");
    if (groups > n)
        throw ValidationError("group count " + std::to_string(groups) + " exceeds question count " +
                              std::to_string(n));
    std::vector<std::size_t> b(groups + 1);
    for (std::size_t i = 0; i <= groups; ++i)
        b[i] = static_cast<std::size_t>((static_cast<unsigned long long>(i) * n) / groups);
    return b;
}

inline std::string group_label(std::size_t lo, std::size_t hi, MetricKind metric) {
    return std::to_string(lo) + "_" + std::to_string(hi) + "_" + std::string(metric_tag(metric));
}

// Sorts easiest first (best average performance first, respecting the
// metric's orientation), breaking ties by ascending question id.
inline DifficultyGrouping sort_and_group(std::span<const double> difficulties,
                                         std::span<const std::string> question_ids, std::size_t groups,
                                         MetricKind metric) {
    const std::size_t n = difficulties.size();
    if (question_ids.size() != n) throw ValidationError("difficulty and question id counts differ");
    DifficultyGrouping g;
    g.metric = metric;
    g.boundaries = group_boundaries(n, groups);
    g.difficulty.assign(difficulties.begin(), difficulties.end());
    g.order.resize(n);
    std::iota(g.order.begin(), g.order.end(), std::size_t{0});
    const bool higher = higher_is_better(metric);
    std::sort(g.order.begin(), g.order.end(), [&](std::size_t a, std::size_t b) {
        const double da = difficulties[a], db = difficulties[b];
        if (da != db) return higher ? da > db : da < db;
        return question_ids[a] < question_ids[b];
    });
    for (std::size_t i = 0; i < groups; ++i)
        g.labels.push_back(group_label(g.boundaries[i], g.boundaries[i + 1], metric));
    return g;
}

inline DifficultyGrouping group_questions(const ScoreMatrix& scores, const Split& split, std::size_t groups) {
    const auto d = question_difficulties(scores, split.train);
    return sort_and_group(d, scores.question_ids, groups, scores.metric);
}

struct GroupSeries {
    std::string label;
    std::vector<double> m;     // per model, ascending
    std::vector<double> score; // group mean per model
};

// Per-group mean score for every model.
inline std::vector<GroupSeries> group_series(const ScoreMatrix& scores, const DifficultyGrouping& grouping) {
    if (grouping.order.size() != scores.cols())
        throw ValidationError("grouping was built for a different question set");
    std::vector<GroupSeries> out;
    for (std::size_t g = 0; g < grouping.group_count(); ++g) {
        const auto members = grouping.members(g);
        GroupSeries s;
        s.label = grouping.labels[g];
        s.m = scores.model_sizes;
        s.score.reserve(scores.rows());
        for (std::size_t r = 0; r < scores.rows(); ++r) {
            double sum = 0.0;
            for (std::size_t q : members) sum += scores(r, q);
            s.score.push_back(sum / static_cast<double>(members.size()));
        }
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace slicecast
