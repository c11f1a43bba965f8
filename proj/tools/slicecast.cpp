// slicecast: score benchmark evaluations, group questions by difficulty,
// forecast emergent accuracy, and render the results.

#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <slicecast/slicecast.hpp>

namespace cmd = slicecast::cmd;

int main(int argc, char** argv) {
    CLI::App app{"Difficulty-sliced scaling trends and emergence forecasts"};
    app.require_subcommand(1);
    int code = 0;

    cmd::ScoreOptions score;
    score.threads = std::max(1u, std::thread::hardware_concurrency());
    auto* s = app.add_subcommand("score", "Compute a per-question metric matrix and per-model aggregates");
    s->add_option("--models", score.models, "Model manifest CSV")->required();
    s->add_option("--evals", score.evals, "Evaluation records (JSONL)")->required();
    s->add_option("--metric", score.metric, "cond-brier, raw-brier, std-brier, accuracy, ted, mcs")
        ->capture_default_str();
    s->add_option("--out", score.out, "Output scores CSV")->capture_default_str();
    s->add_flag("--aggregate-only", score.aggregate_only, "Omit the per-question columns");
    s->add_option("--threads", score.threads, "Worker threads");
    s->callback([&] { code = cmd::run_guarded([&] { cmd::run_score(score); }); });

    cmd::GroupOptions group;
    auto* g = app.add_subcommand("group", "Sort questions by difficulty and slice them into groups");
    g->add_option("--scores", group.scores, "scores.csv")->required();
    g->add_option("--threshold", group.threshold, "Emergence threshold (number or preset)")->required();
    g->add_option("--groups", group.groups, "Number of groups")->capture_default_str();
    g->add_option("--out", group.out, "Output directory")->capture_default_str();
    g->callback([&] { code = cmd::run_guarded([&] { cmd::run_group(group); }); });

    cmd::ForecastCmdOptions fc;
    auto* f = app.add_subcommand("forecast", "Fit below the threshold and forecast accuracy above it");
    f->add_option("--scores", fc.scores, "scores.csv")->required();
    f->add_option("--threshold", fc.threshold, "Emergence threshold (number or preset)");
    f->add_option("--method", fc.method, "sandwich, hard-lift or sigmoid")->capture_default_str();
    f->add_option("--easy-degree", fc.easy_degree, "Polynomial degree for the easy group")->capture_default_str();
    f->add_option("--hard-degree", fc.hard_degree, "Polynomial degree for the hard group")->capture_default_str();
    f->add_option("--groups", fc.groups, "Groups when regrouping from scores")->capture_default_str();
    f->add_option("--grouping", fc.grouping, "grouping.json written by the group command");
    f->add_option("--grid-points", fc.grid_points, "Uniform forecast grid size")->capture_default_str();
    f->add_option("--out", fc.out, "Output directory")->capture_default_str();
    f->callback([&] {
        code = cmd::run_guarded([&] {
            if (fc.threshold.empty() && fc.grouping.empty())
                throw slicecast::ValidationError("forecast needs --threshold or --grouping");
            cmd::run_forecast_cmd(fc);
        });
    });

    cmd::SweepCmdOptions sw;
    auto* w = app.add_subcommand("sweep", "Forecast over a grid of thresholds and degrees");
    w->add_option("--scores", sw.scores, "scores.csv")->required();
    w->add_option("--thresholds", sw.thresholds, "Thresholds or presets (mmlu, arithmetic, persian-qa)")
        ->delimiter(',')
        ->capture_default_str();
    w->add_option("--easy-degrees", sw.easy_degrees, "Easy-group degrees")->delimiter(',')->capture_default_str();
    w->add_option("--hard-degrees", sw.hard_degrees, "Hard-group degrees")->delimiter(',')->capture_default_str();
    w->add_option("--groups", sw.groups, "Number of groups")->capture_default_str();
    w->add_option("--method", sw.method, "sandwich, hard-lift or sigmoid")->capture_default_str();
    w->add_option("--grid-points", sw.grid_points, "Uniform forecast grid size")->capture_default_str();
    w->add_option("--out-dir,--out", sw.out, "Output directory")->capture_default_str();
    w->callback([&] {
        int sweep_code = 0;
        code = cmd::run_guarded([&] { sweep_code = cmd::run_sweep(sw); });
        if (code == 0) code = sweep_code;
    });

    std::vector<std::string> corr_models, corr_evals, corr_names;
    cmd::CorrelateOptions corr;
    auto* c = app.add_subcommand("correlate", "Correlate Brier variants with accuracy across models");
    c->add_option("--models", corr_models, "Model manifest CSV (repeat per dataset)")->required();
    c->add_option("--evals", corr_evals, "Evaluation records (repeat per dataset)")->required();
    c->add_option("--name", corr_names, "Dataset names (default: evals file stem)");
    c->add_option("--out", corr.out, "Output CSV")->capture_default_str();
    c->callback([&] {
        code = cmd::run_guarded([&] {
            if (corr_models.size() != corr_evals.size())
                throw slicecast::ValidationError("--models and --evals must be given the same number of times");
            if (!corr_names.empty() && corr_names.size() != corr_evals.size())
                throw slicecast::ValidationError("--name must be given once per dataset");
            for (std::size_t i = 0; i < corr_models.size(); ++i)
                corr.datasets.push_back({corr_names.empty() ? "" : corr_names[i], corr_models[i], corr_evals[i]});
            cmd::run_correlate(corr);
        });
    });

    cmd::PlotOptions plot;
    std::optional<double> marker;
    auto* p = app.add_subcommand("plot", "Render series CSVs as an SVG line chart");
    p->add_option("--series", plot.series, "Series CSV files")->required();
    p->add_option("--threshold-marker", marker, "Draw a vertical line at this M");
    p->add_option("--title", plot.title, "Chart title");
    p->add_option("--y-label", plot.y_label, "Y axis label");
    p->add_option("--out", plot.out, "Output SVG")->capture_default_str();
    p->callback([&] {
        plot.threshold = marker;
        code = cmd::run_guarded([&] { cmd::run_plot(plot); });
    });

    cmd::SynthOptions syn;
    auto* y = app.add_subcommand("synth", "Generate a seeded synthetic benchmark");
    y->add_option("--scenario", syn.scenario, "emergent, non-emergent or flat")->capture_default_str();
    y->add_option("--seed", syn.seed, "Random seed")->capture_default_str();
    y->add_option("--models", syn.models, "Number of models")->capture_default_str();
    y->add_option("--questions", syn.questions, "Number of questions")->capture_default_str();
    y->add_option("--noise", syn.noise_sd, "Per-record noise standard deviation")->capture_default_str();
    y->add_option("--planted-threshold", syn.threshold, "Effective size where the curves turn")
        ->capture_default_str();
    y->add_option("--out-dir,--out", syn.out, "Output directory")->capture_default_str();
    y->callback([&] { code = cmd::run_guarded([&] { cmd::run_synth(syn); }); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cmd::kValidation;
    }
    return code;
}
