#pragma once

// File formats: scores.csv, grouping.json, per-group series CSVs,
// forecast.csv, fit.json, sweep summaries and correlation tables. Numbers are
// written in shortest round-trip form so reruns are byte-identical and
// rereading loses nothing.

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "difficulty.hpp"
#include "error.hpp"
#include "format.hpp"
#include "metrics.hpp"
#include "stats.hpp"
#include "trendfit.hpp"

namespace slicecast {

// ---------------------------------------------------------------- scores.csv

inline constexpr std::size_t kScoresFixedColumns = 5; // model_id,M,metric,accuracy,aggregate

struct ScoresTable {
    MetricKind metric = kDefaultMetric;
    std::vector<std::string> model_ids;
    std::vector<double> m;
    std::vector<double> accuracy;
    std::vector<double> aggregate;
    std::optional<ScoreMatrix> matrix; // present when per-question columns were written
};

inline ScoresTable make_scores_table(const ScoreMatrix& scores, std::span<const double> accuracy,
                                     bool keep_matrix = true) {
    ScoresTable t;
    t.metric = scores.metric;
    t.model_ids = scores.model_ids;
    t.m = scores.model_sizes;
    t.accuracy.assign(accuracy.begin(), accuracy.end());
    t.aggregate = aggregate_scores(scores);
    if (keep_matrix) t.matrix = scores;
    return t;
}

inline void write_scores(std::ostream& out, const ScoresTable& t) {
    out << "model_id,M,metric,accuracy,aggregate";
    if (t.matrix)
        for (const auto& q : t.matrix->question_ids) out << ',' << csv_escape(q);
    out << '\n';
    for (std::size_t r = 0; r < t.model_ids.size(); ++r) {
        out << csv_escape(t.model_ids[r]) << ',' << format_double(t.m[r]) << ',' << metric_name(t.metric) << ','
            << format_double(t.accuracy[r]) << ',' << format_double(t.aggregate[r]);
        if (t.matrix)
            for (double v : t.matrix->row(r)) out << ',' << format_double(v);
        out << '\n';
    }
}

inline ScoresTable read_scores(std::istream& in, std::string_view source = "scores.csv") {
    auto fail = [&](std::size_t line, const std::string& msg) -> ValidationError {
        return ValidationError(std::string(source) + ":" + std::to_string(line) + ": " + msg);
    };
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ValidationError(std::string(source) + ": empty scores file");
    ++line_no;
    auto header = split_csv_line(line);
    static constexpr std::array<std::string_view, kScoresFixedColumns> kFixed{"model_id", "M", "metric", "accuracy",
                                                                              "aggregate"};
    if (!header || header->size() < kScoresFixedColumns) throw fail(line_no, "malformed scores header");
    for (std::size_t i = 0; i < kFixed.size(); ++i)
        if (trim((*header)[i]) != kFixed[i])
            throw fail(line_no, "expected column '" + std::string(kFixed[i]) + "' at position " + std::to_string(i + 1));

    ScoresTable t;
    const std::size_t nq = header->size() - kScoresFixedColumns;
    ScoreMatrix mat;
    mat.question_ids.assign(header->begin() + kScoresFixedColumns, header->end());
    std::optional<MetricKind> metric;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (!cells || cells->size() != header->size())
            throw fail(line_no, "expected " + std::to_string(header->size()) + " fields");
        auto num = [&](std::size_t i) {
            auto v = parse_double((*cells)[i]);
            if (!v || !std::isfinite(*v)) throw fail(line_no, "field " + std::to_string(i + 1) + " is not a finite number");
            return *v;
        };
        auto mk = parse_metric(trim((*cells)[2]));
        if (!mk) throw fail(line_no, "unknown metric '" + (*cells)[2] + "'");
        if (metric && *metric != *mk) throw fail(line_no, "mixed metrics in one scores file");
        metric = mk;
        t.model_ids.push_back((*cells)[0]);
        t.m.push_back(num(1));
        t.accuracy.push_back(num(3));
        t.aggregate.push_back(num(4));
        for (std::size_t q = 0; q < nq; ++q) mat.values.push_back(num(kScoresFixedColumns + q));
    }
    if (t.model_ids.empty()) throw ValidationError(std::string(source) + ": no model rows");
    for (std::size_t i = 1; i < t.m.size(); ++i)
        if (t.m[i] < t.m[i - 1]) throw ValidationError(std::string(source) + ": rows are not sorted by ascending M");
    t.metric = *metric;
    if (nq > 0) {
        mat.metric = t.metric;
        mat.model_ids = t.model_ids;
        mat.model_sizes = t.m;
        t.matrix = std::move(mat);
    }
    return t;
}

inline ScoresTable read_scores_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open scores file");
    return read_scores(in, path);
}

// ------------------------------------------------------------- grouping.json

inline nlohmann::json grouping_to_json(const DifficultyGrouping& g, std::span<const std::string> question_ids,
                                       double threshold) {
    nlohmann::json j;
    j["metric"] = std::string(metric_name(g.metric));
    j["threshold"] = threshold;
    j["group_count"] = g.group_count();
    j["question_ids"] = std::vector<std::string>(question_ids.begin(), question_ids.end());
    j["difficulty"] = g.difficulty;
    j["order"] = g.order;
    j["boundaries"] = g.boundaries;
    j["labels"] = g.labels;
    return j;
}

struct GroupingFile {
    DifficultyGrouping grouping;
    std::vector<std::string> question_ids;
    double threshold = 0.0;
};

inline GroupingFile grouping_from_json(const nlohmann::json& j, std::string_view source = "grouping.json") {
    try {
        GroupingFile f;
        auto mk = parse_metric(j.at("metric").get<std::string>());
        if (!mk) throw ValidationError(std::string(source) + ": unknown metric");
        f.grouping.metric = *mk;
        f.threshold = j.at("threshold").get<double>();
        f.question_ids = j.at("question_ids").get<std::vector<std::string>>();
        f.grouping.difficulty = j.at("difficulty").get<std::vector<double>>();
        f.grouping.order = j.at("order").get<std::vector<std::size_t>>();
        f.grouping.boundaries = j.at("boundaries").get<std::vector<std::size_t>>();
        f.grouping.labels = j.at("labels").get<std::vector<std::string>>();
        const std::size_t n = f.question_ids.size();
        const auto& b = f.grouping.boundaries;
        bool ok = f.grouping.order.size() == n && b.size() == f.grouping.labels.size() + 1 && b.size() >= 3 &&
                  b.front() == 0 && b.back() == n;
        for (std::size_t i = 1; ok && i < b.size(); ++i) ok = b[i] > b[i - 1];
        std::vector<bool> seen(n, false);
        for (std::size_t i = 0; ok && i < f.grouping.order.size(); ++i) {
            const auto q = f.grouping.order[i];
            ok = q < n && !seen[q];
            if (ok) seen[q] = true;
        }
        if (!ok) throw ValidationError(std::string(source) + ": inconsistent grouping");
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string(source) + ": " + e.what());
    }
}

inline GroupingFile read_grouping_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open grouping file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return grouping_from_json(j, path);
}

// One group's series: model_id,M,score
inline void write_group_series(std::ostream& out, const GroupSeries& s, std::span<const std::string> model_ids) {
    out << "model_id,M,score\n";
    for (std::size_t i = 0; i < s.m.size(); ++i)
        out << csv_escape(model_ids[i]) << ',' << format_double(s.m[i]) << ',' << format_double(s.score[i]) << '\n';
}

// ------------------------------------------------------ forecast.csv, fit.json

inline void write_forecast_header(std::ostream& out) {
    out << "method,M,predicted_brier,predicted_accuracy,is_train_region\n";
}

inline void write_forecast_rows(std::ostream& out, const ForecastSeries& s) {
    for (const auto& p : s.points) {
        out << method_name(s.method) << ',' << format_double(p.m) << ',';
        if (p.brier) out << format_double(*p.brier);
        out << ',' << format_double(p.accuracy) << ',' << (p.train_region ? 1 : 0) << '\n';
    }
}

inline void write_forecast_csv(std::ostream& out, const ForecastSeries& s) {
    write_forecast_header(out);
    write_forecast_rows(out, s);
}

inline nlohmann::json poly_to_json(const PolyFit& f) {
    return {{"degree", f.degree},
            {"coefficients", f.coefficients},
            {"domain", {f.domain_lo, f.domain_hi}},
            {"center", f.center},
            {"scale", f.scale},
            {"scaled_coefficients", f.scaled_coefficients}};
}

inline nlohmann::json forecast_to_json(const Forecast& f) {
    nlohmann::json j;
    j["method"] = std::string(method_name(f.series.method));
    j["threshold"] = f.threshold;
    if (f.easy_fit) j["easy_fit"] = poly_to_json(*f.easy_fit);
    if (f.hard_fit) j["hard_fit"] = poly_to_json(*f.hard_fit);
    if (f.link) j["link"] = {{"slope", f.link->slope}, {"intercept", f.link->intercept}};
    if (f.series.calibration_constant) j["calibration_constant"] = *f.series.calibration_constant;
    if (f.lift) j["lift"] = {{"constant", *f.lift}, {"anchor_M", *f.anchor_m}};
    if (f.sigmoid) {
        const auto& s = *f.sigmoid;
        j["sigmoid"] = {{"lower", s.lower},       {"upper", s.upper},
                        {"rate", s.rate},         {"midpoint", s.midpoint},
                        {"sse", s.sse},           {"iterations", s.iterations},
                        {"converged", s.converged}, {"degenerate", s.degenerate}};
    }
    j["test"] = {{"M", f.test_m},
                 {"accuracy", f.test_accuracy},
                 {"predicted_accuracy", f.test_prediction},
                 {"rmse", f.test_rmse()}};
    return j;
}

// -------------------------------------------------------------- sweep summary

inline std::string sweep_cell_name(const SweepCell& c) {
    return "forecast_T" + format_double(c.threshold) + "_e" + std::to_string(c.easy_degree) + "_h" +
           std::to_string(c.hard_degree) + ".csv";
}

inline void write_sweep_summary(std::ostream& out, std::span<const SweepCell> cells) {
    out << "threshold,easy_degree,hard_degree,status,test_rmse,forecast_file,message\n";
    for (const auto& c : cells) {
        out << format_double(c.threshold) << ',' << c.easy_degree << ',' << c.hard_degree << ',';
        if (c.ok())
            out << "ok," << format_double(c.forecast->test_rmse()) << ',' << sweep_cell_name(c) << ",\n";
        else
            out << "error,,," << csv_escape(c.error) << '\n';
    }
}

// ----------------------------------------------------------- correlations.csv

struct CorrelationCell {
    std::optional<CorrelationReport> report;
    std::string error;
};

struct CorrelationTable {
    std::vector<std::string> datasets;
    std::vector<std::string> variants;
    std::vector<std::vector<CorrelationCell>> cells; // [variant][dataset]
};

inline void write_correlations(std::ostream& out, const CorrelationTable& t) {
    out << "variant";
    for (const auto& d : t.datasets)
        for (const char* k : {".P", ".S", ".K"}) out << ',' << csv_escape(d + k);
    out << '\n';
    for (std::size_t v = 0; v < t.variants.size(); ++v) {
        out << csv_escape(t.variants[v]);
        for (const auto& c : t.cells[v]) {
            if (c.report)
                out << ',' << format_double(c.report->pearson) << ',' << format_double(c.report->spearman) << ','
                    << format_double(c.report->kendall);
            else
                out << ",degenerate,degenerate,degenerate";
        }
        out << '\n';
    }
}

} // namespace slicecast
