// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <slicecast/slicecast.hpp>

using namespace slicecast;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

double horner(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// ---------------------------------------------------------------- 1

Outcome grouping_boundaries() {
    Outcome o;
    auto labels = [](std::size_t n) {
        std::vector<double> d(n, 0.0);
        std::vector<std::string> ids(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
        return sort_and_group(d, ids, kPhenomenonGroups, MetricKind::binary_brier_conditional).labels;
    };
    const auto a = labels(14042), b = labels(1050), c = labels(15023);
    o.require(a.front() == "0_1404_brier" && a.back() == "12637_14042_brier", "N=14042 labels: " + a.front() + " / " + a.back());
    o.require(b.front() == "0_105_brier" && b.back() == "945_1050_brier", "N=1050 labels: " + b.front() + " / " + b.back());
    o.require(c.back() == "13520_15023_brier", "N=15023 last label: " + c.back());
    if (o.pass) o.detail = a.front() + " .. " + a.back() + ", " + b.front() + " .. " + b.back() + ", .. " + c.back();
    return o;
}

// ---------------------------------------------------------------- 2

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t k) {
    std::uniform_real_distribution<double> u(0.001, 1.0);
    std::vector<double> p(k);
    double s = 0.0;
    for (auto& x : p) s += (x = u(rng));
    const double mass = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    for (auto& x : p) x = x / s * mass;
    return p;
}

Outcome metric_units() {
    Outcome o;
    o.require(binary_brier_question(1.0) == 0.0, "binary_brier(1) != 0");
    o.require(binary_brier_question(0.0) == -1.0, "binary_brier(0) != -1");
    o.require(binary_brier_question(0.5) == -0.25, "binary_brier(0.5) != -0.25");

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> scale(1e-3, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 2 + i % 6;
        auto p = random_probs(rng, k);
        const std::size_t c = static_cast<std::size_t>(i) % k;
        const double base = conditional_prob(p, c);
        const double a = scale(rng);
        for (auto& x : p) x *= a;
        worst = std::max(worst, std::abs(conditional_prob(p, c) - base));
    }
    o.require(worst < 1e-12, "scale invariance deviation " + fmt(worst));

    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::size_t k = 2 + i % 5;
        const auto p = random_probs(rng, k);
        const std::size_t c = static_cast<std::size_t>(i) % k;
        violations += binary_brier_question(conditional_prob(p, c)) < binary_brier_question(p[c]);
    }
    o.require(violations == 0, std::to_string(violations) + " records with conditional < raw");
    if (o.pass) o.detail = "max scaling deviation " + fmt(worst) + ", 0/10000 ordering violations";
    return o;
}

// ---------------------------------------------------------------- 3

TrendInputs random_trend_inputs(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.02);
    TrendInputs in;
    const std::size_t n = 14 + rng() % 20;
    in.m = linspace(-1.0 + 0.2 * u(rng), 3.0 + 0.2 * u(rng), n);
    for (double x : in.m) {
        in.easy.push_back(-0.2 + 0.05 * u(rng) + 0.02 * x);
        in.hard.push_back(-0.7 + 0.05 * x * x + noise(rng));
        in.aggregate.push_back(0.5 * (in.easy.back() + in.hard.back()) + noise(rng));
        in.accuracy.push_back(0.3 + 0.5 * (in.aggregate.back() + 0.45) + noise(rng));
    }
    in.split = split_train_test(in.m, 1.0 + 0.5 * u(rng));
    return in;
}

Outcome fit_exactness() {
    Outcome o;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uy(-1.0, 1.0), jitter(-0.05, 0.05);
    double worst_interp = 0.0;
    for (std::size_t degree = 0; degree <= 7; ++degree)
        for (int t = 0; t < 20; ++t) {
            std::vector<double> xs, ys;
            for (std::size_t i = 0; i <= degree; ++i) {
                xs.push_back(-1.0 + 4.0 * static_cast<double>(i) / static_cast<double>(degree + 1) + jitter(rng));
                ys.push_back(uy(rng));
            }
            worst_interp = std::max(worst_interp, residual_norm(fit_polynomial(xs, ys, degree), xs, ys));
        }
    o.require(worst_interp < 1e-8, "interpolation residual " + fmt(worst_interp));

    double worst_ols = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double a = 2.0 * uy(rng), b = uy(rng);
        std::vector<double> xs, ys;
        for (int i = 0; i < 15; ++i) {
            xs.push_back(-0.8 + 0.04 * i + 0.01 * uy(rng));
            ys.push_back(a * xs.back() + b);
        }
        const auto m = fit_linear_map(xs, ys);
        worst_ols = std::max({worst_ols, std::abs(m.slope - a), std::abs(m.intercept - b)});
    }
    o.require(worst_ols < 1e-12, "OLS recovery error " + fmt(worst_ols));

    double worst_cal = 0.0, worst_anchor = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto in = random_trend_inputs(rng);
        ForecastOptions opt;
        opt.easy_degree = 3;
        const auto train_m = select(in.m, in.split.train);
        const double target = ordered_mean(select(in.accuracy, in.split.train));
        for (const auto& f : {slice_and_sandwich(in, opt), hard_lift(in, opt)}) {
            double mean = 0.0;
            for (double x : train_m) {
                const auto it = std::find_if(f.series.points.begin(), f.series.points.end(),
                                             [&](const ForecastPoint& p) { return p.m == x; });
                mean += it->accuracy;
            }
            mean /= static_cast<double>(train_m.size());
            worst_cal = std::max(worst_cal, std::abs(mean - target));
        }
        const auto h = hard_lift(in, opt);
        const std::size_t anchor = in.split.train.back();
        worst_anchor = std::max(worst_anchor, std::abs((*h.hard_fit)(in.m[anchor]) + *h.lift - in.aggregate[anchor]));
    }
    o.require(worst_cal < 1e-12, "calibration identity error " + fmt(worst_cal));
    o.require(worst_anchor < 1e-12, "anchor identity error " + fmt(worst_anchor));
    if (o.pass)
        o.detail = "interp " + fmt(worst_interp) + ", OLS " + fmt(worst_ols) + ", calibration " + fmt(worst_cal) +
                   ", anchor " + fmt(worst_anchor);
    return o;
}

// ---------------------------------------------------------------- 4

Outcome planted_forecast() {
    Outcome o;
    // Three bands of 100 questions. Per-question offsets cancel within a band,
    // so band means follow the planted curves exactly.
    const std::vector<double> easy{-0.12, 0.05, -0.03, 0.02, 0.01, -0.015}; // degree 5 in s
    const std::vector<double> hard{-0.7, 0.08, 0.1};                        // degree 2 in s
    auto s_of = [](double m) { return (m - 1.0) / 2.0; };
    auto band_score = [&](int band, double m) {
        const double s = s_of(m);
        return band == 0 ? horner(easy, s) : band == 1 ? -0.4 + 0.01 * s : horner(hard, s);
    };

    EvalTable table;
    const auto m = linspace(-1.0, 3.0, 25);
    for (std::size_t i = 0; i < m.size(); ++i) {
        ModelRecord r;
        r.model_id = "m" + std::to_string(100 + i);
        r.effective_size = m[i];
        table.models.push_back(r);
    }
    const std::size_t per_band = 100;
    for (std::size_t q = 0; q < 3 * per_band; ++q) table.question_ids.push_back("q" + std::to_string(1000 + q));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t q = 0; q < 3 * per_band; ++q) {
            const int band = static_cast<int>(q % 3);
            const double offset = 0.01 * (static_cast<double>((q / 3) % 5) - 2.0);
            const double score = band_score(band, m[i]) + offset;
            const double p = 1.0 - std::sqrt(-score); // conditional Brier -(p-1)^2 == score
            ChoiceEval e;
            e.model_id = table.models[i].model_id;
            e.question_id = table.question_ids[q];
            e.choice_probs = {0.8 * p, 0.8 * (1.0 - p)};
            e.correct_index = 0;
            table.records.push_back(e);
        }

    const auto scores = score_matrix(table, MetricKind::binary_brier_conditional);
    const auto acc = aggregate_scores(score_matrix(table, MetricKind::accuracy));
    const auto split = split_train_test(std::span<const double>(scores.model_sizes), 1.5);
    const auto f = slice_and_sandwich(make_trend_inputs(scores, acc, group_questions(scores, split, 3), split));

    double worst = 0.0;
    for (std::size_t i : split.test) {
        const double planted = 0.5 * (band_score(0, m[i]) + band_score(2, m[i]));
        const auto it = std::find_if(f.series.points.begin(), f.series.points.end(),
                                     [&](const ForecastPoint& p) { return p.m == m[i]; });
        o.require(it != f.series.points.end(), "test M missing from forecast grid");
        if (it != f.series.points.end()) worst = std::max(worst, std::abs(*it->brier - planted));
    }
    o.require(worst < 1e-6, "max |predicted - planted| = " + fmt(worst));
    if (o.pass) o.detail = std::to_string(split.test.size()) + " test models, max |predicted - planted| " + fmt(worst);
    return o;
}

// ---------------------------------------------------------------- 5

struct EmergenceResult {
    double rmse_sandwich, rmse_sigmoid, lift_sandwich, lift_sigmoid;
    bool ok() const { return rmse_sandwich < rmse_sigmoid && lift_sandwich >= 0.15 && lift_sigmoid < 0.05; }
};

EmergenceResult emergence_on_seed(std::uint64_t seed) {
    synth::ScenarioSpec spec;
    spec.seed = seed;
    spec.noise_sd = 0.01;
    const auto corpus = synth::generate(spec);
    const auto table = synth::to_table(corpus);
    const auto scores = score_matrix(table, MetricKind::binary_brier_conditional);
    const auto acc = aggregate_scores(score_matrix(table, MetricKind::accuracy));
    const auto split = split_train_test(std::span<const double>(scores.model_sizes), spec.planted_threshold);
    const auto in = make_trend_inputs(scores, acc, group_questions(scores, split, kForecastGroups), split);
    const auto sw = slice_and_sandwich(in);
    const auto sg = sigmoid_baseline(in);
    const double plateau = ordered_mean(select(acc, split.train));
    return {sw.test_rmse(), sg.test_rmse(), sw.test_prediction.back() - plateau, sg.test_prediction.back() - plateau};
}

Outcome emergence_detection() {
    Outcome o;
    const auto r = emergence_on_seed(0);
    o.require(r.rmse_sandwich < r.rmse_sigmoid,
              "sandwich RMSE " + fmt(r.rmse_sandwich) + " not below sigmoid " + fmt(r.rmse_sigmoid));
    o.require(r.lift_sandwich >= 0.15, "sandwich rise over plateau " + fmt(r.lift_sandwich) + " < 0.15");
    o.require(r.lift_sigmoid < 0.05, "sigmoid rise over plateau " + fmt(r.lift_sigmoid) + " >= 0.05");
    int other = 0;
    for (std::uint64_t seed = 1; seed <= 9; ++seed) other += emergence_on_seed(seed).ok();
    o.detail = (o.pass ? "" : o.detail + "; ") + "seed 0: RMSE " + fmt(r.rmse_sandwich) + " vs " + fmt(r.rmse_sigmoid) +
               ", rise " + fmt(r.lift_sandwich) + " vs " + fmt(r.lift_sigmoid) + "; seeds 1-9 also pass: " +
               std::to_string(other) + "/9";
    return o;
}

// ---------------------------------------------------------------- 6

double kendall_pairs(const std::vector<double>& x, const std::vector<double>& y) {
    long long conc = 0, disc = 0, tx = 0, ty = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const int sx = (x[i] > x[j]) - (x[i] < x[j]);
            const int sy = (y[i] > y[j]) - (y[i] < y[j]);
            if (sx == 0 && sy == 0) continue;
            if (sx == 0) ++tx;
            else if (sy == 0) ++ty;
            else if (sx == sy) ++conc;
            else ++disc;
        }
    return (conc - disc) / std::sqrt(static_cast<double>(conc + disc + tx) * static_cast<double>(conc + disc + ty));
}

std::vector<double> rank_quadratic(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (double w : v) {
            less += w < v[i];
            equal += w == v[i];
        }
        r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
}

double pearson_direct(const std::vector<double>& x, const std::vector<double>& y) {
    long double n = x.size(), sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const long double mx = sx / n, my = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

Outcome correlation_oracle() {
    Outcome o;
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> len(2, 8), level(0, 3);
    std::normal_distribution<double> g;
    double worst = 0.0, worst_invariance = 0.0;
    int instances = 0, tied = 0;
    while (instances < 1000) {
        const std::size_t n = len(rng);
        const bool ties = instances % 2 == 0;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = ties ? level(rng) : g(rng);
            y[i] = ties ? level(rng) : g(rng);
        }
        auto constant = [](const std::vector<double>& v) {
            return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; });
        };
        if (constant(x) || constant(y)) continue;
        ++instances;
        tied += ties;
        worst = std::max({worst, std::abs(pearson(x, y) - pearson_direct(x, y)),
                          std::abs(spearman(x, y) - pearson_direct(rank_quadratic(x), rank_quadratic(y))),
                          std::abs(kendall(x, y) - kendall_pairs(x, y))});
        std::vector<double> fx(n), fy(n);
        for (std::size_t i = 0; i < n; ++i) {
            fx[i] = std::exp(x[i]);
            fy[i] = y[i] * y[i] * y[i] + 2.0;
        }
        worst_invariance = std::max({worst_invariance, std::abs(spearman(x, y) - spearman(fx, fy)),
                                     std::abs(kendall(x, y) - kendall(fx, fy))});
    }
    o.require(worst < 1e-12, "oracle deviation " + fmt(worst));
    o.require(worst_invariance < 1e-12, "monotone invariance deviation " + fmt(worst_invariance));
    if (o.pass)
        o.detail = std::to_string(instances) + " instances (" + std::to_string(tied) + " with ties), max deviation " +
                   fmt(worst) + ", invariance " + fmt(worst_invariance);
    return o;
}

// ---------------------------------------------------------------- 7

Outcome sigmoid_recovery() {
    Outcome o;
    const SigmoidFit planted{0.25, 0.9, 3.0, 2.0};
    const auto xs = linspace(0.0, 4.0, 12);
    std::vector<double> ys;
    for (double x : xs) ys.push_back(planted(x));
    const auto f = fit_sigmoid(xs, ys);
    const double err = std::max({std::abs(f.lower - 0.25), std::abs(f.upper - 0.9), std::abs(f.rate - 3.0),
                                 std::abs(f.midpoint - 2.0)});
    o.require(err < 1e-3, "max parameter error " + fmt(err));
    if (o.pass)
        o.detail = "L=" + fmt(f.lower) + " U=" + fmt(f.upper) + " k=" + fmt(f.rate) + " x0=" + fmt(f.midpoint) +
                   ", max error " + fmt(err) + ", " + std::to_string(f.iterations) + " iterations";
    return o;
}

// ---------------------------------------------------------------- 8

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void pipeline(const fs::path& d) {
    cmd::SynthOptions syn;
    syn.seed = 8;
    syn.out = (d / "synth").string();
    cmd::run_synth(syn);

    cmd::ScoreOptions sc;
    sc.models = (d / "synth/models.csv").string();
    sc.evals = (d / "synth/evals.jsonl").string();
    sc.out = (d / "scores.csv").string();
    sc.threads = 4;
    cmd::run_score(sc);

    cmd::GroupOptions gr;
    gr.scores = sc.out;
    gr.threshold = "1.5";
    gr.groups = 3;
    gr.out = (d / "groups").string();
    cmd::run_group(gr);

    std::vector<std::string> series{sc.out};
    for (const char* method : {"sandwich", "hard-lift", "sigmoid"}) {
        cmd::ForecastCmdOptions fc;
        fc.scores = sc.out;
        fc.grouping = (d / "groups/grouping.json").string();
        fc.method = method;
        fc.out = (d / (std::string("forecast_") + method)).string();
        cmd::run_forecast_cmd(fc);
        series.push_back(fc.out + "/forecast.csv");
    }

    cmd::PlotOptions pl;
    pl.series = series;
    pl.threshold = 1.5;
    pl.out = (d / "forecast.svg").string();
    cmd::run_plot(pl);
}

Outcome determinism() {
    Outcome o;
    const fs::path root = fs::path(SLICECAST_TEST_TMP) / "acceptance_determinism";
    fs::remove_all(root);
    pipeline(root / "a");
    pipeline(root / "b");
    std::size_t files = 0, bytes = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), root / "a");
        const auto a = slurp(e.path());
        o.require(fs::exists(root / "b" / rel) && a == slurp(root / "b" / rel), rel.string() + " differs between runs");
        ++files;
        bytes += a.size();
    }
    o.require(files >= 12, "expected at least 12 artifacts, found " + std::to_string(files));
    if (o.pass) o.detail = std::to_string(files) + " files (" + std::to_string(bytes) + " bytes) identical across runs";
    return o;
}

// ---------------------------------------------------------------- 9

Outcome sweep_harness() {
    Outcome o;
    o.require(std::vector<std::size_t>(kSweepEasyDegrees.begin(), kSweepEasyDegrees.end()) ==
                  std::vector<std::size_t>{3, 5, 7},
              "easy degree preset");
    o.require(std::vector<std::size_t>(kSweepHardDegrees.begin(), kSweepHardDegrees.end()) ==
                  std::vector<std::size_t>{2, 4, 6},
              "hard degree preset");
    o.require(sweep_threshold_preset("mmlu") == std::vector<double>{1.5, 1.3, 1.1}, "mmlu threshold preset");

    synth::ScenarioSpec spec;
    const auto table = synth::to_table(synth::generate(spec));
    const auto scores = score_matrix(table, MetricKind::binary_brier_conditional);
    const auto acc = aggregate_scores(score_matrix(table, MetricKind::accuracy));
    SweepConfig cfg;
    cfg.thresholds = *sweep_threshold_preset("mmlu");
    const auto cells = robustness_sweep(scores, acc, cfg);
    std::size_t ok = 0;
    for (const auto& c : cells) ok += c.ok();
    o.require(cells.size() == 27, "expected 27 cells, got " + std::to_string(cells.size()));
    o.require(ok > 0, "no sweep cell succeeded");
    if (o.pass) o.detail = "27 cells on the synth fixture, " + std::to_string(ok) + " fitted, " + std::to_string(27 - ok) + " recorded errors";
    return o;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "grouping-boundary fidelity", 1.0, grouping_boundaries},
        {2, "metric unit suite", 0.0, metric_units},
        {3, "fit exactness", 0.0, fit_exactness},
        {4, "planted-forecast oracle", 10.0, planted_forecast},
        {5, "emergence detection", 30.0, emergence_detection},
        {6, "correlation oracle", 0.0, correlation_oracle},
        {7, "sigmoid recovery", 0.0, sigmoid_recovery},
        {8, "determinism", 0.0, determinism},
        {9, "robustness-sweep harness", 120.0, sweep_harness},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0 && secs >= c.budget_s) {
            o.pass = false;
            o.detail += " [over the " + fmt(c.budget_s) + " s budget]";
        }
        failures += !o.pass;
        std::printf("%s  %d  %-28s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
