#include <catch_amalgamated.hpp>

#include <regex>
#include <sstream>

#include "support.hpp"

using namespace slicecast;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;

namespace {

ScoreMatrix small_matrix() {
    ScoreMatrix s;
    s.metric = MetricKind::binary_brier_conditional;
    s.model_ids = {"a", "b,c", "d"};
    s.model_sizes = {-0.5, 0.1, 1.0 / 3.0};
    s.question_ids = {"q1", "q2"};
    s.values = {-0.1, -0.2 / 3.0, -0.7, -1.0, 0.0, -0.123456789012345678};
    return s;
}

} // namespace

TEST_CASE("scores.csv round-trips bit for bit", "[report]") {
    const auto s = small_matrix();
    const std::vector<double> acc{0.25, 0.5, 2.0 / 3.0};
    const auto t = make_scores_table(s, acc);
    std::ostringstream out;
    write_scores(out, t);
    CHECK_THAT(out.str(), StartsWith("model_id,M,metric,accuracy,aggregate,q1,q2\n"));
    CHECK_THAT(out.str(), ContainsSubstring("\"b,c\""));

    std::istringstream in(out.str());
    const auto back = read_scores(in);
    CHECK(back.metric == s.metric);
    CHECK(back.model_ids == s.model_ids);
    CHECK(back.m == s.model_sizes);
    CHECK(back.accuracy == acc);
    CHECK(back.aggregate == t.aggregate);
    REQUIRE(back.matrix);
    CHECK(back.matrix->values == s.values);
    CHECK(back.matrix->question_ids == s.question_ids);

    const auto agg_only = make_scores_table(s, acc, false);
    std::ostringstream out2;
    write_scores(out2, agg_only);
    std::istringstream in2(out2.str());
    CHECK_FALSE(read_scores(in2).matrix);
}

TEST_CASE("scores.csv reader rejects malformed files", "[report]") {
    auto read = [](const std::string& text) {
        std::istringstream in(text);
        return read_scores(in, "s.csv");
    };
    const std::string header = "model_id,M,metric,accuracy,aggregate\n";
    CHECK_THROWS_WITH(read("id,M,metric,accuracy,aggregate\n"), ContainsSubstring("model_id"));
    CHECK_THROWS_WITH(read(header + "a,1,accuracy,1,1\nb,0,accuracy,1,1\n"), ContainsSubstring("sorted"));
    CHECK_THROWS_WITH(read(header + "a,1,accuracy,1,1\nb,2,ted,1,1\n"), ContainsSubstring("s.csv:3:"));
    CHECK_THROWS_WITH(read(header + "a,x,accuracy,1,1\n"), ContainsSubstring("field 2"));
    CHECK_THROWS_WITH(read(header + "a,1,f1,1,1\n"), ContainsSubstring("unknown metric"));
    CHECK_THROWS_AS(read(header), ValidationError);
    CHECK_THROWS_AS(read(""), ValidationError);
}

TEST_CASE("grouping.json round-trips and is validated", "[report]") {
    const auto s = small_matrix();
    const auto split = split_train_test(s.model_sizes, 0.2);
    const auto g = group_questions(s, split, 2);
    const auto j = grouping_to_json(g, s.question_ids, 0.2);
    const auto back = grouping_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.threshold == 0.2);
    CHECK(back.question_ids == s.question_ids);
    CHECK(back.grouping.order == g.order);
    CHECK(back.grouping.labels == g.labels);
    CHECK(back.grouping.difficulty == g.difficulty);

    auto broken = j;
    broken["order"] = {0, 0};
    CHECK_THROWS_WITH(grouping_from_json(broken), ContainsSubstring("inconsistent"));
    broken = j;
    broken.erase("labels");
    CHECK_THROWS_AS(grouping_from_json(broken), ValidationError);
}

TEST_CASE("forecast.csv layout", "[report]") {
    ForecastSeries s;
    s.method = ForecastMethod::sigmoid_baseline;
    s.points = {{0.5, std::nullopt, 0.25, true}, {1.5, std::nullopt, 0.75, false}};
    std::ostringstream out;
    write_forecast_csv(out, s);
    CHECK(out.str() ==
          "method,M,predicted_brier,predicted_accuracy,is_train_region\n"
          "sigmoid_baseline,0.5,,0.25,1\n"
          "sigmoid_baseline,1.5,,0.75,0\n");
}

TEST_CASE("correlation table layout", "[report]") {
    CorrelationTable t;
    t.datasets = {"mmlu", "arith"};
    t.variants = {"unconditionalized", "conditionalized"};
    CorrelationReport r;
    r.pearson = 0.5;
    r.spearman = 0.25;
    r.kendall = 1.0;
    t.cells = {{{r, ""}, {std::nullopt, "zero variance"}}, {{r, ""}, {r, ""}}};
    std::ostringstream out;
    write_correlations(out, t);
    CHECK(out.str() ==
          "variant,mmlu.P,mmlu.S,mmlu.K,arith.P,arith.S,arith.K\n"
          "unconditionalized,0.5,0.25,1,degenerate,degenerate,degenerate\n"
          "conditionalized,0.5,0.25,1,0.5,0.25,1\n");
}

namespace {

// Checks that every tag is closed in order; enough for the generated subset of XML.
bool balanced_xml(const std::string& doc) {
    std::vector<std::string> stack;
    const std::regex tag(R"(<(/?)([A-Za-z][A-Za-z0-9]*)[^>]*?(/?)>)");
    for (auto it = std::sregex_iterator(doc.begin(), doc.end(), tag); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        if (m[3] == "/") continue;
        if (m[1] == "/") {
            if (stack.empty() || stack.back() != m[2]) return false;
            stack.pop_back();
        } else {
            stack.push_back(m[2]);
        }
    }
    return stack.empty();
}

std::vector<std::string> polyline_points(const std::string& doc) {
    const std::regex re(R"re(<polyline[^>]* points="([^"]*)")re");
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(doc.begin(), doc.end(), re); it != std::sregex_iterator(); ++it)
        out.push_back((*it)[1]);
    return out;
}

} // namespace

TEST_CASE("constant series draws a horizontal line at the mapped pixel", "[svg]") {
    svg::ChartSpec spec;
    spec.series.push_back({"flat", {{0.0, 0.5}, {1.0, 0.5}, {2.0, 0.5}}, svg::Style::line});
    const auto doc = svg::render(spec);
    // y axis becomes [0.44, 0.56] (step 0.02); 0.5 sits at the plot's mid-height,
    // 44 + 434 / 2 = 261.
    const auto lines = polyline_points(doc);
    REQUIRE(lines.size() == 1);
    CHECK(lines[0] == "72.00,261.00 391.00,261.00 710.00,261.00");
    CHECK(balanced_xml(doc));
    CHECK_THAT(doc, StartsWith("<?xml"));
    CHECK_THAT(doc, ContainsSubstring("width=\"900\" height=\"540\""));
}

TEST_CASE("legend lists every series in order", "[svg]") {
    svg::ChartSpec spec;
    for (int g = 0; g < 10; ++g) {
        svg::Series s;
        s.label = "group " + std::to_string(g);
        s.style = svg::Style::points;
        for (int i = 0; i < 5; ++i) s.points.push_back({i * 0.5, -0.1 * g - 0.01 * i});
        spec.series.push_back(s);
    }
    spec.threshold = 1.0;
    const auto doc = svg::render(spec);
    std::size_t pos = 0;
    for (int g = 0; g < 10; ++g) {
        const auto at = doc.find(">group " + std::to_string(g) + "<", pos);
        REQUIRE(at != std::string::npos);
        pos = at;
    }
    CHECK(doc.find(">group 10<") == std::string::npos);
    CHECK_THAT(doc, ContainsSubstring("stroke-dasharray"));
    CHECK_THAT(doc, ContainsSubstring("T = 1"));
    CHECK(balanced_xml(doc));
    CHECK(doc == svg::render(spec));
}

TEST_CASE("chart input validation and escaping", "[svg]") {
    svg::ChartSpec empty;
    CHECK_THROWS_AS(svg::render(empty), ValidationError);
    svg::ChartSpec nan;
    nan.series.push_back({"bad", {{0.0, NAN}}, svg::Style::line});
    CHECK_THROWS_AS(svg::render(nan), ValidationError);
    svg::ChartSpec none;
    none.series.push_back({"none", {}, svg::Style::line});
    CHECK_THROWS_AS(svg::render(none), ValidationError);

    svg::ChartSpec amp;
    amp.title = "a < b & c";
    amp.series.push_back({"x\"y", {{0.0, 0.0}, {1.0, 1.0}}, svg::Style::line});
    const auto doc = svg::render(amp);
    CHECK_THAT(doc, ContainsSubstring("a &lt; b &amp; c"));
    CHECK_THAT(doc, ContainsSubstring("x&quot;y"));
    CHECK(balanced_xml(doc));
}

TEST_CASE("tick helpers pick round numbers", "[svg]") {
    CHECK(svg::nice_step(1.0) == Catch::Approx(0.2));
    CHECK(svg::nice_step(4.2) == Catch::Approx(1.0));
    CHECK(svg::nice_step(0.07) == Catch::Approx(0.01));
    const auto a = svg::nice_axis(-1.0, 3.2);
    CHECK(a.lo == Catch::Approx(-1.0));
    CHECK(a.hi == Catch::Approx(4.0));
    CHECK(svg::tick_label(0.30000000000000004, 0.1) == "0.3");
    CHECK(svg::tick_label(-0.0, 1.0) == "0");
}
