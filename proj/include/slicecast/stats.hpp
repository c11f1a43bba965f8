#pragma once

// Pearson, Spearman (midranks) and Kendall tau-b correlation.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "error.hpp"
#include "metrics.hpp"

namespace slicecast {

namespace detail {

inline void check_pair(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("correlation: samples differ in length");
    if (x.size() < 2) throw ValidationError("correlation needs at least 2 samples");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw ValidationError("correlation: non-finite sample");
}

} // namespace detail

inline double pearson(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw NumericalError("correlation: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// 1-based fractional ranks; tied values share the mean of their positions.
inline std::vector<double> midranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = rank;
        i = j + 1;
    }
    return r;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y);
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    return pearson(rx, ry);
}

namespace detail {

// Sorts v[lo, hi) and returns the number of inversions (Knight's merge step).
inline unsigned long long merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    unsigned long long swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

// Number of pairs tied within runs of equal values in a sorted sequence.
inline unsigned long long tied_pairs(std::span<const double> sorted) {
    unsigned long long t = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const unsigned long long run = j - i + 1;
        t += run * (run - 1) / 2;
        i = j + 1;
    }
    return t;
}

} // namespace detail

// Kendall tau-b in O(n log n).
inline double kendall(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y);
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[idx[i]];
        ys[i] = y[idx[i]];
    }

    const unsigned long long total = static_cast<unsigned long long>(n) * (n - 1) / 2;
    const unsigned long long ties_x = detail::tied_pairs(xs);
    unsigned long long ties_xy = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && xs[j + 1] == xs[i] && ys[j + 1] == ys[i]) ++j;
        const unsigned long long run = j - i + 1;
        ties_xy += run * (run - 1) / 2;
        i = j + 1;
    }

    std::vector<double> buf(n);
    const unsigned long long swaps = detail::merge_count(ys, buf, 0, n);
    const unsigned long long ties_y = detail::tied_pairs(ys);

    if (total == ties_x || total == ties_y) throw NumericalError("kendall: all pairs tied in one variable");
    const double numer = static_cast<double>(total) - static_cast<double>(ties_x) - static_cast<double>(ties_y) +
                         static_cast<double>(ties_xy) - 2.0 * static_cast<double>(swaps);
    const double denom = std::sqrt(static_cast<double>(total - ties_x)) * std::sqrt(static_cast<double>(total - ties_y));
    return std::clamp(numer / denom, -1.0, 1.0);
}

struct CorrelationReport {
    MetricKind metric_a = MetricKind::accuracy;
    MetricKind metric_b = kDefaultMetric;
    double pearson = 0.0;
    double spearman = 0.0;
    double kendall = 0.0;
    std::size_t n = 0;
};

inline CorrelationReport correlate(MetricKind metric_a, std::span<const double> a, MetricKind metric_b,
                                   std::span<const double> b) {
    CorrelationReport r;
    r.metric_a = metric_a;
    r.metric_b = metric_b;
    r.n = a.size();
    r.pearson = pearson(a, b);
    r.spearman = spearman(a, b);
    r.kendall = kendall(a, b);
    return r;
}

} // namespace slicecast
