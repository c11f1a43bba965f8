#pragma once

// File-level commands behind the CLI. Each run_* reads its inputs, writes its
// outputs and throws ValidationError / NumericalError on failure; run_guarded
// turns those into exit codes.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "difficulty.hpp"
#include "error.hpp"
#include "format.hpp"
#include "ingest.hpp"
#include "metrics.hpp"
#include "report.hpp"
#include "stats.hpp"
#include "svg.hpp"
#include "synth.hpp"
#include "trendfit.hpp"

namespace slicecast::cmd {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2 };

inline int run_guarded(const std::function<void()>& body, std::ostream& err = std::cerr) {
    try {
        body();
        return kOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    }
}

// ------------------------------------------------------------------ helpers

inline std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError(p.string() + ": cannot open for writing");
    return out;
}

inline void write_text(const fs::path& p, const std::string& text) {
    auto out = open_out(p);
    out << text;
    if (!out) throw ValidationError(p.string() + ": write failed");
}

// A number or one of the dataset preset names.
inline double resolve_threshold(std::string_view s) {
    if (auto v = parse_double(s); v && std::isfinite(*v)) return *v;
    if (auto v = threshold_preset(trim(s))) return *v;
    throw ValidationError("threshold '" + std::string(s) + "' is neither a number nor a preset (mmlu, arithmetic, persian-qa)");
}

inline MetricKind resolve_metric(std::string_view s) {
    if (auto m = parse_metric(s)) return *m;
    throw ValidationError("unknown metric '" + std::string(s) + "'");
}

inline const ScoreMatrix& require_matrix(const ScoresTable& t, const std::string& source) {
    if (!t.matrix)
        throw ValidationError(source + ": no per-question columns; rerun score without --aggregate-only");
    return *t.matrix;
}

// ------------------------------------------------------------------- score

struct ScoreOptions {
    std::string models;
    std::string evals;
    std::string metric{metric_name(kDefaultMetric)};
    std::string out = "scores.csv";
    bool aggregate_only = false;
    unsigned threads = 1;
};

inline ScoresTable compute_scores(const std::vector<ModelRecord>& manifest, const EvalTable& table, MetricKind metric,
                                  unsigned threads, bool keep_matrix = true) {
    (void)manifest;
    const Embedder embed{BigramEmbedder{}};
    const auto scores = score_matrix(table, metric, embed, threads);
    const auto accuracy = aggregate_scores(score_matrix(table, MetricKind::accuracy, embed, threads));
    return make_scores_table(scores, accuracy, keep_matrix);
}

inline void run_score(const ScoreOptions& o) {
    const auto metric = resolve_metric(o.metric);
    const auto manifest = load_manifest(o.models);
    const auto table = load_evals(o.evals, manifest);
    const auto t = compute_scores(manifest, table, metric, o.threads, !o.aggregate_only);
    auto out = open_out(o.out);
    write_scores(out, t);
}

// ------------------------------------------------------------------- group

struct GroupOptions {
    std::string scores;
    std::string threshold;
    std::size_t groups = kPhenomenonGroups;
    std::string out = "groups";
};

inline void run_group(const GroupOptions& o) {
    const auto t = read_scores_file(o.scores);
    const auto& mat = require_matrix(t, o.scores);
    const double threshold = resolve_threshold(o.threshold);
    const auto split = split_train_test(std::span<const double>(mat.model_sizes), threshold);
    const auto grouping = group_questions(mat, split, o.groups);

    const fs::path dir(o.out);
    fs::create_directories(dir);
    write_text(dir / "grouping.json", grouping_to_json(grouping, mat.question_ids, threshold).dump(2) + "\n");
    for (const auto& s : group_series(mat, grouping)) {
        auto out = open_out(dir / (s.label + ".csv"));
        write_group_series(out, s, mat.model_ids);
    }
}

// ---------------------------------------------------------------- forecast

struct ForecastCmdOptions {
    std::string scores;
    std::string threshold;
    std::string method = "sandwich";
    std::size_t easy_degree = kDefaultEasyDegree;
    std::size_t hard_degree = kDefaultHardDegree;
    std::size_t groups = kForecastGroups;
    std::string grouping; // optional grouping.json from the group command
    std::size_t grid_points = 200;
    std::string out = "forecast";
};

inline TrendInputs trend_inputs_for(const ScoresTable& t, const std::string& source, double threshold,
                                    ForecastMethod method, std::size_t groups, const std::string& grouping_path) {
    const auto split = split_train_test(std::span<const double>(t.m), threshold);
    if (method == ForecastMethod::sigmoid_baseline) {
        TrendInputs in;
        in.split = split;
        in.m = t.m;
        in.aggregate = t.aggregate;
        in.accuracy = t.accuracy;
        return in;
    }
    const auto& mat = require_matrix(t, source);
    if (grouping_path.empty()) return make_trend_inputs(mat, t.accuracy, group_questions(mat, split, groups), split);

    const auto g = read_grouping_file(grouping_path);
    if (g.question_ids != mat.question_ids)
        throw ValidationError(grouping_path + ": question ids do not match " + source);
    if (g.grouping.metric != mat.metric)
        throw ValidationError(grouping_path + ": grouping metric differs from the scores metric");
    return make_trend_inputs(mat, t.accuracy, g.grouping, split);
}

inline Forecast forecast_from_scores(const ScoresTable& t, const std::string& source, const ForecastCmdOptions& o) {
    const auto method = parse_method(o.method);
    if (!method) throw ValidationError("unknown method '" + o.method + "' (sandwich, hard-lift, sigmoid)");
    double threshold;
    if (!o.grouping.empty() && o.threshold.empty())
        threshold = read_grouping_file(o.grouping).threshold;
    else
        threshold = resolve_threshold(o.threshold);
    const auto in = trend_inputs_for(t, source, threshold, *method, o.groups, o.grouping);
    ForecastOptions opt;
    opt.easy_degree = o.easy_degree;
    opt.hard_degree = o.hard_degree;
    opt.grid_points = o.grid_points;
    return run_forecast(*method, in, opt);
}

inline void write_forecast_outputs(const fs::path& dir, const Forecast& f) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "forecast.csv");
        write_forecast_csv(out, f.series);
    }
    write_text(dir / "fit.json", forecast_to_json(f).dump(2) + "\n");
}

inline void run_forecast_cmd(const ForecastCmdOptions& o) {
    const auto t = read_scores_file(o.scores);
    write_forecast_outputs(o.out, forecast_from_scores(t, o.scores, o));
}

// ------------------------------------------------------------------- sweep

struct SweepCmdOptions {
    std::string scores;
    std::vector<std::string> thresholds{"mmlu"}; // numbers or sweep preset names
    std::vector<std::size_t> easy_degrees{kSweepEasyDegrees.begin(), kSweepEasyDegrees.end()};
    std::vector<std::size_t> hard_degrees{kSweepHardDegrees.begin(), kSweepHardDegrees.end()};
    std::size_t groups = kForecastGroups;
    std::string method = "sandwich";
    std::size_t grid_points = 200;
    std::string out = "sweep";
};

inline std::vector<double> expand_thresholds(const std::vector<std::string>& items) {
    std::vector<double> out;
    for (const auto& s : items) {
        if (auto preset = sweep_threshold_preset(trim(s))) {
            out.insert(out.end(), preset->begin(), preset->end());
        } else if (auto v = parse_double(s); v && std::isfinite(*v)) {
            out.push_back(*v);
        } else {
            throw ValidationError("threshold '" + s + "' is neither a number nor a sweep preset");
        }
    }
    if (out.empty()) throw ValidationError("sweep needs at least one threshold");
    return out;
}

// Returns the exit code: 0 when at least one cell succeeded.
inline int run_sweep(const SweepCmdOptions& o, std::ostream& err = std::cerr) {
    const auto t = read_scores_file(o.scores);
    const auto& mat = require_matrix(t, o.scores);
    const auto method = parse_method(o.method);
    if (!method) throw ValidationError("unknown method '" + o.method + "'");
    if (o.easy_degrees.empty() || o.hard_degrees.empty()) throw ValidationError("sweep needs at least one degree of each kind");

    SweepConfig cfg;
    cfg.thresholds = expand_thresholds(o.thresholds);
    cfg.easy_degrees = o.easy_degrees;
    cfg.hard_degrees = o.hard_degrees;
    cfg.groups = o.groups;
    cfg.method = *method;
    cfg.grid_points = o.grid_points;
    const auto cells = robustness_sweep(mat, t.accuracy, cfg);

    const fs::path dir(o.out);
    fs::create_directories(dir);
    int first_error = kOk;
    bool any_ok = false;
    for (const auto& c : cells) {
        if (c.ok()) {
            any_ok = true;
            auto out = open_out(dir / sweep_cell_name(c));
            write_forecast_csv(out, c.forecast->series);
        } else {
            if (first_error == kOk) first_error = c.error_code;
            err << "cell T=" << format_double(c.threshold) << " easy=" << c.easy_degree << " hard=" << c.hard_degree
                << ": " << c.error << '\n';
        }
    }
    auto out = open_out(dir / "summary.csv");
    write_sweep_summary(out, cells);
    return any_ok ? kOk : (first_error == kOk ? kValidation : first_error);
}

// --------------------------------------------------------------- correlate

struct CorrelateDataset {
    std::string name;
    std::string models;
    std::string evals;
};

struct CorrelateOptions {
    std::vector<CorrelateDataset> datasets;
    std::string out = "correlations.csv";
};

inline const std::array<MetricKind, 2> kCorrelationVariants{MetricKind::binary_brier_raw,
                                                            MetricKind::binary_brier_conditional};

inline CorrelationTable correlation_table(const std::vector<std::string>& names, const std::vector<EvalTable>& tables) {
    CorrelationTable t;
    t.datasets = names;
    t.variants = {"unconditionalized", "conditionalized"};
    t.cells.assign(kCorrelationVariants.size(), {});
    for (const auto& table : tables) {
        const auto acc = aggregate_scores(score_matrix(table, MetricKind::accuracy));
        for (std::size_t v = 0; v < kCorrelationVariants.size(); ++v) {
            const auto brier = aggregate_scores(score_matrix(table, kCorrelationVariants[v]));
            CorrelationCell cell;
            try {
                cell.report = correlate(MetricKind::accuracy, acc, kCorrelationVariants[v], brier);
            } catch (const NumericalError& e) {
                cell.error = e.what();
            }
            t.cells[v].push_back(std::move(cell));
        }
    }
    return t;
}

inline void run_correlate(const CorrelateOptions& o, std::ostream& err = std::cerr) {
    if (o.datasets.empty()) throw ValidationError("correlate needs at least one --models/--evals pair");
    std::vector<std::string> names;
    std::vector<EvalTable> tables;
    for (const auto& d : o.datasets) {
        names.push_back(d.name.empty() ? fs::path(d.evals).stem().string() : d.name);
        tables.push_back(load_evals(d.evals, load_manifest(d.models)));
    }
    const auto t = correlation_table(names, tables);
    for (std::size_t v = 0; v < t.variants.size(); ++v)
        for (std::size_t d = 0; d < t.datasets.size(); ++d)
            if (!t.cells[v][d].report)
                err << "cell " << t.variants[v] << '/' << t.datasets[d] << ": " << t.cells[v][d].error << '\n';
    auto out = open_out(o.out);
    write_correlations(out, t);
}

// -------------------------------------------------------------------- plot

struct PlotOptions {
    std::vector<std::string> series;
    std::optional<double> threshold;
    std::string title;
    std::string y_label;
    std::string out = "chart.svg";
};

// Recognized inputs: group series (model_id,M,score), forecast.csv, and
// scores.csv (plots per-model accuracy).
inline svg::Series load_plot_series(const std::string& path, std::string& y_kind) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open series file");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty series file");
    const auto header = split_csv_line(line);
    if (!header || header->size() < 2) throw ValidationError(path + ":1: malformed header");

    svg::Series s;
    std::size_t xcol = 1, ycol = 2;
    const auto& h = *header;
    if (h.size() == 3 && h[0] == "model_id" && h[1] == "M" && h[2] == "score") {
        s.style = svg::Style::points;
        s.label = fs::path(path).stem().string();
        y_kind = y_kind.empty() || y_kind == "score" ? "score" : "value";
    } else if (h.size() == 5 && h[0] == "method" && h[1] == "M" && h[3] == "predicted_accuracy") {
        s.style = svg::Style::line;
        ycol = 3;
        y_kind = y_kind.empty() || y_kind == "accuracy" ? "accuracy" : "value";
    } else if (h.size() >= kScoresFixedColumns && h[0] == "model_id" && h[1] == "M" && h[3] == "accuracy") {
        s.style = svg::Style::points;
        s.label = "accuracy";
        ycol = 3;
        y_kind = y_kind.empty() || y_kind == "accuracy" ? "accuracy" : "value";
    } else {
        throw ValidationError(path + ":1: unrecognized series header");
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (!cells || cells->size() != h.size())
            throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(h.size()) + " fields");
        const auto x = parse_double((*cells)[xcol]);
        const auto y = parse_double((*cells)[ycol]);
        if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y))
            throw ValidationError(path + ":" + std::to_string(line_no) + ": non-numeric point");
        if (s.label.empty()) s.label = (*cells)[0];
        s.points.push_back({*x, *y});
    }
    if (s.points.empty()) throw ValidationError(path + ": series file has no data rows");
    return s;
}

inline std::string render_plot(const PlotOptions& o) {
    if (o.series.empty()) throw ValidationError("plot needs at least one --series file");
    svg::ChartSpec spec;
    spec.title = o.title;
    spec.threshold = o.threshold;
    std::string y_kind;
    for (const auto& p : o.series) spec.series.push_back(load_plot_series(p, y_kind));
    spec.y_label = o.y_label.empty() ? y_kind : o.y_label;
    return svg::render(spec);
}

inline void run_plot(const PlotOptions& o) { write_text(o.out, render_plot(o)); }

// ------------------------------------------------------------------- synth

struct SynthOptions {
    std::string scenario = "emergent";
    std::uint64_t seed = 0;
    std::size_t models = synth::ScenarioSpec{}.n_models;
    std::size_t questions = synth::ScenarioSpec{}.n_questions;
    double noise_sd = synth::ScenarioSpec{}.noise_sd;
    double threshold = synth::ScenarioSpec{}.planted_threshold;
    std::string out = "synth";
};

inline synth::ScenarioSpec synth_spec(const SynthOptions& o) {
    const auto sc = synth::parse_scenario(o.scenario);
    if (!sc) throw ValidationError("unknown scenario '" + o.scenario + "' (emergent, non-emergent, flat)");
    synth::ScenarioSpec spec;
    spec.scenario = *sc;
    spec.seed = o.seed;
    spec.n_models = o.models;
    spec.n_questions = o.questions;
    spec.noise_sd = o.noise_sd;
    spec.planted_threshold = o.threshold;
    return spec;
}

inline void run_synth(const SynthOptions& o) {
    const auto corpus = synth::generate(synth_spec(o));
    const fs::path dir(o.out);
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "models.csv");
        write_manifest(out, corpus.models);
    }
    auto out = open_out(dir / "evals.jsonl");
    synth::write_evals(out, corpus.evals);
}

} // namespace slicecast::cmd
