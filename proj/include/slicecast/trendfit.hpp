#pragma once

// Scaling-trend fits and forecasts:
//  - polynomial trends of the easy and hard difficulty groups,
//  - Slice-and-Sandwich: average the two group fits, map the continuous
//    metric to accuracy with an OLS line, shift so the mean prediction over
//    the training models equals their mean true accuracy,
//  - Hard-Lift: the hard-group fit alone, lifted to pass through the
//    aggregate score of the largest training model,
//  - a four-parameter logistic fitted directly to accuracy as the baseline.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "difficulty.hpp"
#include "error.hpp"
#include "format.hpp"
#include "ingest.hpp"
#include "linalg.hpp"
#include "metrics.hpp"

namespace slicecast {

inline constexpr std::size_t kDefaultEasyDegree = 5;
inline constexpr std::size_t kDefaultHardDegree = 2;

// -------------------------------------------------------------------------
// Polynomials

struct PolyFit {
    std::size_t degree = 0;
    std::vector<double> coefficients; // x basis, constant term first
    double domain_lo = 0.0;
    double domain_hi = 0.0;

    // The fit is solved in t = (x - center) / scale; evaluation uses that
    // basis, `coefficients` is the same polynomial expanded in x.
    double center = 0.0;
    double scale = 1.0;
    std::vector<double> scaled_coefficients;

    double operator()(double x) const {
        const double t = (x - center) / scale;
        double acc = 0.0;
        for (std::size_t k = scaled_coefficients.size(); k-- > 0;) acc = acc * t + scaled_coefficients[k];
        return acc;
    }
};

namespace detail {

inline std::size_t distinct_count(std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

// Expands sum_k a_k ((x - c) / h)^k into powers of x.
inline std::vector<double> expand_shifted(std::span<const double> a, double c, double h) {
    const std::size_t n = a.size();
    std::vector<double> out(n, 0.0);
    std::vector<double> binom(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        // binom holds C(k, j) for the current k
        binom[k] = 1.0;
        for (std::size_t j = k; j-- > 1;) binom[j] += binom[j - 1];
        const double hk = std::pow(h, -static_cast<double>(k));
        for (std::size_t j = 0; j <= k; ++j)
            out[j] += a[k] * hk * binom[j] * std::pow(-c, static_cast<double>(k - j));
    }
    return out;
}

} // namespace detail

// Least-squares polynomial of the given degree. The Vandermonde system is
// built in centered/scaled coordinates and solved by Householder QR.
inline PolyFit fit_polynomial(std::span<const double> xs, std::span<const double> ys, std::size_t degree) {
    if (xs.size() != ys.size()) throw ValidationError("fit_polynomial: x and y lengths differ");
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw ValidationError("fit_polynomial: non-finite point");
    const std::size_t distinct = detail::distinct_count(xs);
    if (distinct < degree + 1)
        throw ValidationError("fit_polynomial: degree " + std::to_string(degree) + " needs " +
                              std::to_string(degree + 1) + " distinct x values, got " + std::to_string(distinct));

    PolyFit f;
    f.degree = degree;
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    f.domain_lo = *lo;
    f.domain_hi = *hi;
    f.center = 0.5 * (f.domain_lo + f.domain_hi);
    f.scale = 0.5 * (f.domain_hi - f.domain_lo);
    if (!(f.scale > 0.0)) f.scale = 1.0;

    linalg::Matrix v(xs.size(), degree + 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double t = (xs[i] - f.center) / f.scale;
        double p = 1.0;
        for (std::size_t k = 0; k <= degree; ++k) {
            v(i, k) = p;
            p *= t;
        }
    }
    f.scaled_coefficients = linalg::least_squares(std::move(v), std::vector<double>(ys.begin(), ys.end()));
    f.coefficients = detail::expand_shifted(f.scaled_coefficients, f.center, f.scale);
    for (double c : f.coefficients)
        if (!std::isfinite(c)) throw NumericalError("fit_polynomial: non-finite coefficient");
    return f;
}

inline double residual_norm(const PolyFit& f, std::span<const double> xs, std::span<const double> ys) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - f(xs[i]);
        s += r * r;
    }
    return std::sqrt(s);
}

// Aggregate forecast sandwiched between the easy and hard group trends.
inline double sandwich(const PolyFit& easy, const PolyFit& hard, double x) { return 0.5 * (easy(x) + hard(x)); }

// -------------------------------------------------------------------------
// Linear link from the continuous metric to accuracy

struct LinearMap {
    double slope = 0.0;
    double intercept = 0.0;

    double operator()(double x) const { return slope * x + intercept; }
};

inline LinearMap fit_linear_map(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ValidationError("OLS map: x and y lengths differ");
    if (xs.size() < 2) throw ValidationError("OLS map needs at least 2 training models");
    const double mx = ordered_mean(xs);
    const double my = ordered_mean(ys);
    double sxx = 0.0, sxy = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        scale = std::max(scale, std::abs(xs[i]));
    }
    // spread at rounding level of the mean counts as no spread
    const double floor = static_cast<double>(xs.size()) * std::pow(64.0 * std::numeric_limits<double>::epsilon() * scale, 2);
    if (!(sxx > floor)) throw NumericalError("OLS map: all regressor values are identical");
    LinearMap m;
    m.slope = sxy / sxx;
    m.intercept = my - m.slope * mx;
    return m;
}

// Brier -> accuracy link fitted on training-model aggregates.
inline LinearMap fit_brier_to_acc_map(std::span<const double> train_brier, std::span<const double> train_accuracy) {
    return fit_linear_map(train_brier, train_accuracy);
}

// -------------------------------------------------------------------------
// Logistic baseline

struct SigmoidFit {
    double lower = 0.0;    // L
    double upper = 1.0;    // U
    double rate = 1.0;     // k
    double midpoint = 0.0; // x0
    double sse = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool degenerate = false; // L ~= U; predictions are constant

    double operator()(double x) const { return lower + (upper - lower) * logistic(rate * (x - midpoint)); }

    static double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
};

struct SigmoidOptions {
    std::size_t rate_steps = 49;
    std::size_t midpoint_steps = 81;
    std::size_t max_iterations = 200;
    double tolerance = 1e-10;
};

namespace detail {

struct LevelFit {
    double lower, upper, sse;
};

// min sum (y - L(1-s) - U s)^2 subject to 0 <= L <= U <= 1. Checks the
// interior solution, then the three edges of the feasible triangle.
inline std::optional<LevelFit> fit_levels(std::span<const double> s, std::span<const double> y) {
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double u = 1.0 - s[i];
        a11 += u * u;
        a12 += u * s[i];
        a22 += s[i] * s[i];
        b1 += u * y[i];
        b2 += s[i] * y[i];
    }
    const double det = a11 * a22 - a12 * a12;
    if (!(det > 1e-12 * a11 * a22)) return std::nullopt;

    auto sse = [&](double lo, double up) {
        double t = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double r = y[i] - lo * (1.0 - s[i]) - up * s[i];
            t += r * r;
        }
        return t;
    };

    const double lo = (b1 * a22 - b2 * a12) / det;
    const double up = (a11 * b2 - a12 * b1) / det;
    if (lo >= 0.0 && up <= 1.0 && lo <= up) return LevelFit{lo, up, sse(lo, up)};

    std::array<std::pair<double, double>, 3> candidates{{
        {0.0, std::clamp(b2 / a22, 0.0, 1.0)},                                   // L = 0
        {std::clamp((b1 - a12) / a11, 0.0, 1.0), 1.0},                           // U = 1
        {0.0, 0.0},                                                              // L = U, filled below
    }};
    double mean = 0.0;
    for (double v : y) mean += v;
    mean = std::clamp(mean / static_cast<double>(y.size()), 0.0, 1.0);
    candidates[2] = {mean, mean};

    std::optional<LevelFit> best;
    for (const auto& [l, u] : candidates) {
        const double e = sse(l, u);
        if (!best || e < best->sse) best = LevelFit{l, u, e};
    }
    return best;
}

inline double sigmoid_sse(const SigmoidFit& f, std::span<const double> xs, std::span<const double> ys) {
    double t = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - f(xs[i]);
        t += r * r;
    }
    return t;
}

} // namespace detail

// Least-squares fit of y = L + (U - L) / (1 + exp(-k (x - x0))) with
// 0 <= L < U <= 1 and k > 0. A (k, x0) grid with closed-form levels seeds a
// damped Gauss-Newton refinement. If refinement does not converge within the
// iteration cap, the best grid solution is returned with converged = false.
inline SigmoidFit fit_sigmoid(std::span<const double> xs, std::span<const double> ys,
                              const SigmoidOptions& opt = {}) {
    if (xs.size() != ys.size()) throw ValidationError("sigmoid fit: x and y lengths differ");
    if (xs.size() < 4) throw ValidationError("sigmoid fit needs at least 4 training points");
    const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
    const double span = *xhi - *xlo;
    if (!(span > 0.0)) throw ValidationError("sigmoid fit needs at least two distinct x values");

    SigmoidFit grid_best;
    grid_best.sse = std::numeric_limits<double>::infinity();
    std::vector<double> s(xs.size());
    for (std::size_t ik = 0; ik < opt.rate_steps; ++ik) {
        const double k = (0.25 / span) * std::pow(1000.0, static_cast<double>(ik) / static_cast<double>(opt.rate_steps - 1));
        for (std::size_t ix = 0; ix < opt.midpoint_steps; ++ix) {
            const double x0 = *xlo - span + 3.0 * span * static_cast<double>(ix) / static_cast<double>(opt.midpoint_steps - 1);
            for (std::size_t i = 0; i < xs.size(); ++i) s[i] = SigmoidFit::logistic(k * (xs[i] - x0));
            auto lv = detail::fit_levels(s, ys);
            if (!lv || !(lv->sse < grid_best.sse)) continue;
            grid_best.lower = lv->lower;
            grid_best.upper = lv->upper;
            grid_best.rate = k;
            grid_best.midpoint = x0;
            grid_best.sse = lv->sse;
        }
    }
    if (!std::isfinite(grid_best.sse)) throw NumericalError("sigmoid fit: no admissible grid cell");

    const double level_eps = 1e-9;
    if (grid_best.upper - grid_best.lower <= level_eps) {
        grid_best.degenerate = true;
        return grid_best;
    }

    // Gauss-Newton on (L, U, k, x0) with step halving.
    SigmoidFit cur = grid_best;
    auto clamp_params = [&](SigmoidFit& f) {
        f.lower = std::max(f.lower, 0.0);
        f.upper = std::min(f.upper, 1.0);
        f.rate = std::max(f.rate, 1e-12);
        if (f.upper - f.lower <= level_eps) {
            const double mid = std::clamp(0.5 * (f.lower + f.upper), level_eps, 1.0 - level_eps);
            f.lower = mid - 0.5 * level_eps;
            f.upper = mid + 0.5 * level_eps;
        }
    };

    bool converged = false;
    std::size_t it = 0;
    for (; it < opt.max_iterations; ++it) {
        linalg::Matrix jac(xs.size(), 4);
        std::vector<double> r(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double si = SigmoidFit::logistic(cur.rate * (xs[i] - cur.midpoint));
            const double ds = si * (1.0 - si);
            const double amp = cur.upper - cur.lower;
            jac(i, 0) = 1.0 - si;
            jac(i, 1) = si;
            jac(i, 2) = amp * ds * (xs[i] - cur.midpoint);
            jac(i, 3) = -amp * ds * cur.rate;
            r[i] = ys[i] - cur(xs[i]);
        }
        std::vector<double> delta;
        try {
            delta = linalg::least_squares(std::move(jac), std::move(r));
        } catch (const NumericalError&) {
            break;
        }

        bool accepted = false;
        double change = 0.0;
        for (double t = 1.0; t >= 1.0 / 1024.0 / 1024.0; t *= 0.5) {
            SigmoidFit next = cur;
            next.lower += t * delta[0];
            next.upper += t * delta[1];
            next.rate += t * delta[2];
            next.midpoint += t * delta[3];
            clamp_params(next);
            next.sse = detail::sigmoid_sse(next, xs, ys);
            if (next.sse <= cur.sse) {
                change = std::max({std::abs(next.lower - cur.lower), std::abs(next.upper - cur.upper),
                                   std::abs(next.rate - cur.rate), std::abs(next.midpoint - cur.midpoint)});
                cur = next;
                accepted = true;
                break;
            }
        }
        if (!accepted || change < opt.tolerance) {
            // No descent direction left, or the step has become negligible.
            converged = true;
            ++it;
            break;
        }
    }

    if (!converged || !(cur.sse <= grid_best.sse)) {
        grid_best.iterations = it;
        grid_best.converged = false;
        return grid_best;
    }
    cur.iterations = it;
    cur.converged = true;
    cur.degenerate = cur.upper - cur.lower <= 10 * level_eps;
    return cur;
}

// -------------------------------------------------------------------------
// Forecasts

enum class ForecastMethod { sandwich, hard_lift, sigmoid_baseline };

inline std::string_view method_name(ForecastMethod m) {
    switch (m) {
    case ForecastMethod::sandwich: return "sandwich";
    case ForecastMethod::hard_lift: return "hard_lift";
    case ForecastMethod::sigmoid_baseline: return "sigmoid_baseline";
    }
    return "unknown";
}

inline std::optional<ForecastMethod> parse_method(std::string_view s) {
    if (s == "sandwich" || s == "slice-and-sandwich") return ForecastMethod::sandwich;
    if (s == "hard-lift" || s == "hard_lift") return ForecastMethod::hard_lift;
    if (s == "sigmoid" || s == "sigmoid_baseline" || s == "sigmoid-baseline") return ForecastMethod::sigmoid_baseline;
    return std::nullopt;
}

struct ForecastPoint {
    double m = 0.0;
    std::optional<double> brier; // absent for the accuracy-only baseline
    double accuracy = 0.0;
    bool train_region = false;
};

struct ForecastSeries {
    ForecastMethod method = ForecastMethod::sandwich;
    std::vector<ForecastPoint> points; // ascending m
    std::optional<double> calibration_constant;
};

// Uniform grid over [min train M, max test M + pad] merged with every model's M.
inline std::vector<double> forecast_grid(std::span<const double> model_m, std::size_t points = 200, double pad = 0.2) {
    if (model_m.empty()) throw ValidationError("forecast grid needs at least one model");
    const auto [lo_it, hi_it] = std::minmax_element(model_m.begin(), model_m.end());
    const double lo = *lo_it, hi = *hi_it + pad;
    std::vector<double> g(model_m.begin(), model_m.end());
    if (points >= 2)
        for (std::size_t i = 0; i < points; ++i)
            g.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

// Maps a continuous-metric forecast through the link and adds the constant
// that makes the mean prediction over the training models equal their mean
// true accuracy.
inline ForecastSeries project_to_accuracy(const std::function<double(double)>& forecast_metric, const LinearMap& link,
                                          std::span<const double> train_m, std::span<const double> train_accuracy,
                                          std::span<const double> grid, double threshold,
                                          ForecastMethod method = ForecastMethod::sandwich) {
    if (train_m.size() != train_accuracy.size() || train_m.empty())
        throw ValidationError("projection needs matching, nonempty training sizes and accuracies");
    std::vector<double> fitted(train_m.size());
    for (std::size_t i = 0; i < train_m.size(); ++i) fitted[i] = link(forecast_metric(train_m[i]));
    const double calibration = ordered_mean(train_accuracy) - ordered_mean(fitted);

    ForecastSeries out;
    out.method = method;
    out.calibration_constant = calibration;
    out.points.reserve(grid.size());
    for (double x : grid) {
        const double b = forecast_metric(x);
        out.points.push_back({x, b, link(b) + calibration, x < threshold});
    }
    return out;
}

// Per-model series a forecast consumes, all indexed by model (ascending M).
struct TrendInputs {
    Split split;
    std::vector<double> m;
    std::vector<double> aggregate; // continuous metric over all questions
    std::vector<double> accuracy;
    std::vector<double> easy;      // first (easiest) group mean
    std::vector<double> hard;      // last (hardest) group mean
};

inline std::vector<double> select(std::span<const double> values, std::span<const std::size_t> idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(values[i]);
    return out;
}

inline TrendInputs make_trend_inputs(const ScoreMatrix& scores, std::span<const double> accuracy,
                                     const DifficultyGrouping& grouping, const Split& split) {
    if (accuracy.size() != scores.rows()) throw ValidationError("accuracy vector does not match the score matrix");
    if (grouping.group_count() < 2) throw ValidationError("forecasting needs at least 2 difficulty groups");
    const auto series = group_series(scores, grouping);
    TrendInputs in;
    in.split = split;
    in.m = scores.model_sizes;
    in.aggregate = aggregate_scores(scores);
    in.accuracy.assign(accuracy.begin(), accuracy.end());
    in.easy = series.front().score;
    in.hard = series.back().score;
    return in;
}

struct ForecastOptions {
    std::size_t easy_degree = kDefaultEasyDegree;
    std::size_t hard_degree = kDefaultHardDegree;
    std::size_t grid_points = 200;
    double grid_pad = 0.2;
};

struct Forecast {
    ForecastSeries series;
    double threshold = 0.0;
    ForecastOptions options;
    std::optional<PolyFit> easy_fit;
    std::optional<PolyFit> hard_fit;
    std::optional<LinearMap> link;
    std::optional<double> lift;
    std::optional<double> anchor_m;
    std::optional<SigmoidFit> sigmoid;

    std::vector<double> test_m;
    std::vector<double> test_accuracy;   // observed
    std::vector<double> test_prediction; // forecast at test_m

    double test_rmse() const {
        double s = 0.0;
        for (std::size_t i = 0; i < test_m.size(); ++i) {
            const double d = test_prediction[i] - test_accuracy[i];
            s += d * d;
        }
        return test_m.empty() ? 0.0 : std::sqrt(s / static_cast<double>(test_m.size()));
    }
};

namespace detail {

inline void require_training(const TrendInputs& in, std::size_t degree, std::string_view what) {
    if (in.split.train.size() < degree + 1)
        throw ValidationError(std::string(what) + " degree " + std::to_string(degree) + " needs at least " +
                              std::to_string(degree + 1) + " training models, have " +
                              std::to_string(in.split.train.size()) + " below threshold " +
                              format_double(in.split.threshold));
}

inline Forecast project_forecast(const TrendInputs& in, const ForecastOptions& opt, ForecastMethod method,
                                 const std::function<double(double)>& metric_forecast, Forecast f) {
    const auto train_m = select(in.m, in.split.train);
    const auto train_agg = select(in.aggregate, in.split.train);
    const auto train_acc = select(in.accuracy, in.split.train);

    f.link = fit_brier_to_acc_map(train_agg, train_acc);
    const auto grid = forecast_grid(in.m, opt.grid_points, opt.grid_pad);
    f.series = project_to_accuracy(metric_forecast, *f.link, train_m, train_acc, grid, in.split.threshold, method);
    const double c = *f.series.calibration_constant;
    for (std::size_t i : in.split.test) {
        f.test_m.push_back(in.m[i]);
        f.test_accuracy.push_back(in.accuracy[i]);
        f.test_prediction.push_back((*f.link)(metric_forecast(in.m[i])) + c);
    }
    return f;
}

} // namespace detail

// Fits the easiest and hardest group trends on the training models, averages
// them, and projects to accuracy. Middle groups are not used.
inline Forecast slice_and_sandwich(const TrendInputs& in, const ForecastOptions& opt = {}) {
    detail::require_training(in, std::max(opt.easy_degree, opt.hard_degree), "polynomial");
    const auto train_m = select(in.m, in.split.train);
    const auto easy = select(in.easy, in.split.train);
    const auto hard = select(in.hard, in.split.train);

    Forecast f;
    f.threshold = in.split.threshold;
    f.options = opt;
    f.easy_fit = fit_polynomial(train_m, easy, opt.easy_degree);
    f.hard_fit = fit_polynomial(train_m, hard, opt.hard_degree);
    const PolyFit fe = *f.easy_fit, fh = *f.hard_fit;
    return detail::project_forecast(in, opt, ForecastMethod::sandwich,
                                     [fe, fh](double x) { return sandwich(fe, fh, x); }, std::move(f));
}

// Hard-group trend shifted so it passes through the aggregate score of the
// largest training model, then projected like Slice-and-Sandwich.
inline Forecast hard_lift(const TrendInputs& in, const ForecastOptions& opt = {}) {
    detail::require_training(in, opt.hard_degree, "polynomial");
    const auto train_m = select(in.m, in.split.train);
    const auto hard = select(in.hard, in.split.train);

    Forecast f;
    f.threshold = in.split.threshold;
    f.options = opt;
    f.hard_fit = fit_polynomial(train_m, hard, opt.hard_degree);
    const std::size_t anchor = in.split.train.back();
    f.anchor_m = in.m[anchor];
    f.lift = in.aggregate[anchor] - (*f.hard_fit)(in.m[anchor]);
    const PolyFit fh = *f.hard_fit;
    const double lift = *f.lift;
    return detail::project_forecast(in, opt, ForecastMethod::hard_lift, [fh, lift](double x) { return fh(x) + lift; },
                                    std::move(f));
}

// Logistic regression of accuracy on M over the training models. No
// calibration constant is applied.
inline Forecast sigmoid_baseline(const TrendInputs& in, const ForecastOptions& opt = {},
                                 const SigmoidOptions& sopt = {}) {
    const auto train_m = select(in.m, in.split.train);
    const auto train_acc = select(in.accuracy, in.split.train);
    Forecast f;
    f.threshold = in.split.threshold;
    f.options = opt;
    f.sigmoid = fit_sigmoid(train_m, train_acc, sopt);
    const SigmoidFit sg = *f.sigmoid;
    f.series.method = ForecastMethod::sigmoid_baseline;
    for (double x : forecast_grid(in.m, opt.grid_points, opt.grid_pad))
        f.series.points.push_back({x, std::nullopt, sg(x), x < in.split.threshold});
    for (std::size_t i : in.split.test) {
        f.test_m.push_back(in.m[i]);
        f.test_accuracy.push_back(in.accuracy[i]);
        f.test_prediction.push_back(sg(in.m[i]));
    }
    return f;
}

inline Forecast run_forecast(ForecastMethod method, const TrendInputs& in, const ForecastOptions& opt = {}) {
    switch (method) {
    case ForecastMethod::sandwich: return slice_and_sandwich(in, opt);
    case ForecastMethod::hard_lift: return hard_lift(in, opt);
    case ForecastMethod::sigmoid_baseline: return sigmoid_baseline(in, opt);
    }
    throw ValidationError("unknown forecast method");
}

// -------------------------------------------------------------------------
// Robustness sweep

inline constexpr std::array<std::size_t, 3> kSweepEasyDegrees{3, 5, 7};
inline constexpr std::array<std::size_t, 3> kSweepHardDegrees{2, 4, 6};

struct SweepThresholdPreset {
    std::string_view name;
    std::array<double, 3> thresholds;
};

inline constexpr std::array<SweepThresholdPreset, 3> kSweepThresholdPresets{{
    {"mmlu", {1.5, 1.3, 1.1}},
    {"arithmetic", {1.8, 1.6, 1.4}},
    {"persian-qa", {2.3, 2.1, 1.9}},
}};

inline std::optional<std::vector<double>> sweep_threshold_preset(std::string_view name) {
    for (const auto& p : kSweepThresholdPresets)
        if (p.name == name) return std::vector<double>(p.thresholds.begin(), p.thresholds.end());
    return std::nullopt;
}

struct SweepConfig {
    std::vector<double> thresholds;
    std::vector<std::size_t> easy_degrees{kSweepEasyDegrees.begin(), kSweepEasyDegrees.end()};
    std::vector<std::size_t> hard_degrees{kSweepHardDegrees.begin(), kSweepHardDegrees.end()};
    std::size_t groups = kForecastGroups;
    ForecastMethod method = ForecastMethod::sandwich;
    std::size_t grid_points = 200;
    double grid_pad = 0.2;
};

struct SweepCell {
    double threshold = 0.0;
    std::size_t easy_degree = 0;
    std::size_t hard_degree = 0;
    std::optional<Forecast> forecast;
    std::string error;
    int error_code = 0; // 1 validation, 2 numerical

    bool ok() const { return forecast.has_value(); }
};

// Cartesian product thresholds x easy degrees x hard degrees. Each threshold
// regroups the questions using its own training set. Failing cells carry the
// error text instead of aborting the sweep.
inline std::vector<SweepCell> robustness_sweep(const ScoreMatrix& scores, std::span<const double> accuracy,
                                               const SweepConfig& cfg) {
    std::vector<SweepCell> cells;
    for (double t : cfg.thresholds) {
        std::optional<TrendInputs> inputs;
        std::string setup_error;
        int setup_code = 0;
        try {
            const auto split = split_train_test(std::span<const double>(scores.model_sizes), t);
            const auto grouping = group_questions(scores, split, cfg.groups);
            inputs = make_trend_inputs(scores, accuracy, grouping, split);
        } catch (const ValidationError& e) {
            setup_error = e.what();
            setup_code = 1;
        } catch (const NumericalError& e) {
            setup_error = e.what();
            setup_code = 2;
        }
        for (std::size_t ed : cfg.easy_degrees) {
            for (std::size_t hd : cfg.hard_degrees) {
                SweepCell c;
                c.threshold = t;
                c.easy_degree = ed;
                c.hard_degree = hd;
                if (!inputs) {
                    c.error = setup_error;
                    c.error_code = setup_code;
                } else {
                    ForecastOptions opt;
                    opt.easy_degree = ed;
                    opt.hard_degree = hd;
                    opt.grid_points = cfg.grid_points;
                    opt.grid_pad = cfg.grid_pad;
                    try {
                        c.forecast = run_forecast(cfg.method, *inputs, opt);
                    } catch (const ValidationError& e) {
                        c.error = e.what();
                        c.error_code = 1;
                    } catch (const NumericalError& e) {
                        c.error = e.what();
                        c.error_code = 2;
                    }
                }
                cells.push_back(std::move(c));
            }
        }
    }
    return cells;
}

} // namespace slicecast
