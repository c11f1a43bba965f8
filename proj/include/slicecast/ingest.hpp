#pragma once

// Model manifest and evaluation-record ingestion.
//
// models.csv   header `model_id,effective_size,compute_flops,n_params,n_tokens`
//              (any column order; empty cells mean absent)
// evals.jsonl  one object per line:
//              {"model_id":..,"question_id":..,"choice_probs":[..],"correct_index":..}
//              with optional "prediction" / "target" strings.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "format.hpp"

namespace slicecast {

// Training compute is normalized so that 1e21 FLOPs maps to M = 0.
inline constexpr double kComputeNormalizer = 1e21;
inline constexpr double kProbabilitySumTolerance = 1e-6;

struct ModelRecord {
    std::string model_id;
    std::optional<double> explicit_size;
    std::optional<double> compute_flops;
    std::optional<std::uint64_t> n_params;
    std::optional<std::uint64_t> n_tokens;
    double effective_size = 0.0; // resolved M
};

struct ChoiceEval {
    std::string model_id;
    std::string question_id;
    std::vector<double> choice_probs;
    std::size_t correct_index = 0;
    std::optional<std::string> prediction;
    std::optional<std::string> target;
};

// Dense models x questions table. Models ascend by M, questions by id.
struct EvalTable {
    std::vector<ModelRecord> models;
    std::vector<std::string> question_ids;
    std::vector<ChoiceEval> records; // row-major

    std::size_t model_count() const { return models.size(); }
    std::size_t question_count() const { return question_ids.size(); }
    const ChoiceEval& at(std::size_t model, std::size_t question) const {
        return records[model * question_ids.size() + question];
    }
};

// Named emergence thresholds for the three reference multiple-choice datasets.
struct ThresholdPreset {
    std::string_view name;
    double threshold;
};

inline constexpr std::array<ThresholdPreset, 3> kThresholdPresets{{
    {"mmlu", 1.5},
    {"arithmetic", 1.8},
    {"persian-qa", 2.3},
}};

inline std::optional<double> threshold_preset(std::string_view name) {
    for (const auto& p : kThresholdPresets)
        if (p.name == name) return p.threshold;
    return std::nullopt;
}

// M = log10(C / 1e21).
inline double effective_model_size(double compute_flops, std::string_view model_id = {}) {
    if (!std::isfinite(compute_flops) || compute_flops <= 0.0) {
        std::string msg = "compute_flops must be positive and finite";
        if (!model_id.empty()) msg += " (model '" + std::string(model_id) + "')";
        throw ValidationError(msg);
    }
    return std::log10(compute_flops / kComputeNormalizer);
}

// C ~= 6 * n_params * n_tokens.
inline double training_compute(std::uint64_t n_params, std::uint64_t n_tokens) {
    return 6.0 * static_cast<double>(n_params) * static_cast<double>(n_tokens);
}

namespace detail {

inline std::string at_line(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

inline std::optional<std::uint64_t> parse_count(std::string_view cell) {
    auto v = parse_double(cell);
    if (!v || !std::isfinite(*v) || *v <= 0.0 || *v != std::floor(*v) || *v > 1.8e19)
        return std::nullopt;
    return static_cast<std::uint64_t>(*v);
}

inline void resolve_size(ModelRecord& m, std::string_view where) {
    if (m.explicit_size) {
        if (!std::isfinite(*m.explicit_size))
            throw ValidationError(std::string(where) + "effective_size is not finite for model '" +
                                  m.model_id + "'");
        m.effective_size = *m.explicit_size;
    } else if (m.compute_flops) {
        m.effective_size = effective_model_size(*m.compute_flops, m.model_id);
    } else if (m.n_params && m.n_tokens) {
        m.effective_size = effective_model_size(training_compute(*m.n_params, *m.n_tokens), m.model_id);
    } else {
        throw ValidationError(std::string(where) + "model '" + m.model_id +
                              "' has no resolvable size (need effective_size, compute_flops, or "
                              "n_params and n_tokens)");
    }
}

} // namespace detail

inline void sort_models(std::vector<ModelRecord>& models) {
    std::sort(models.begin(), models.end(), [](const ModelRecord& a, const ModelRecord& b) {
        if (a.effective_size != b.effective_size) return a.effective_size < b.effective_size;
        return a.model_id < b.model_id;
    });
}

inline std::vector<ModelRecord> parse_manifest(std::istream& in, std::string_view source = "models.csv") {
    static constexpr std::array<std::string_view, 5> kColumns{
        "model_id", "effective_size", "compute_flops", "n_params", "n_tokens"};

    std::string line;
    std::size_t line_no = 0;
    std::array<std::optional<std::size_t>, 5> col{};
    std::size_t header_width = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw ValidationError(std::string(source) + ": empty manifest");
    {
        auto header = split_csv_line(line);
        if (!header) throw ValidationError(detail::at_line(source, line_no) + "malformed header");
        header_width = header->size();
        for (std::size_t i = 0; i < header->size(); ++i) {
            const auto name = trim((*header)[i]);
            for (std::size_t c = 0; c < kColumns.size(); ++c) {
                if (name != kColumns[c]) continue;
                if (col[c])
                    throw ValidationError(detail::at_line(source, line_no) + "duplicate column '" +
                                          std::string(name) + "'");
                col[c] = i;
            }
        }
        if (!col[0]) throw ValidationError(detail::at_line(source, line_no) + "missing model_id column");
    }

    std::vector<ModelRecord> models;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto where = detail::at_line(source, line_no);
        auto cells = split_csv_line(line);
        if (!cells) throw ValidationError(where + "unterminated quoted field");
        if (cells->size() != header_width)
            throw ValidationError(where + "expected " + std::to_string(header_width) + " fields, got " +
                                  std::to_string(cells->size()));
        auto cell = [&](std::size_t c) -> std::string_view {
            return col[c] ? trim((*cells)[*col[c]]) : std::string_view{};
        };

        ModelRecord m;
        m.model_id = std::string(cell(0));
        if (m.model_id.empty()) throw ValidationError(where + "empty model_id");
        if (!seen.insert(m.model_id).second)
            throw ValidationError(where + "duplicate model_id '" + m.model_id + "'");

        if (auto s = cell(1); !s.empty()) {
            m.explicit_size = parse_double(s);
            if (!m.explicit_size) throw ValidationError(where + "effective_size is not a number");
        }
        if (auto s = cell(2); !s.empty()) {
            m.compute_flops = parse_double(s);
            if (!m.compute_flops || !std::isfinite(*m.compute_flops) || *m.compute_flops <= 0.0)
                throw ValidationError(where + "compute_flops must be a positive number for model '" +
                                      m.model_id + "'");
        }
        if (auto s = cell(3); !s.empty()) {
            m.n_params = detail::parse_count(s);
            if (!m.n_params) throw ValidationError(where + "n_params must be a positive integer");
        }
        if (auto s = cell(4); !s.empty()) {
            m.n_tokens = detail::parse_count(s);
            if (!m.n_tokens) throw ValidationError(where + "n_tokens must be a positive integer");
        }
        detail::resolve_size(m, where);
        models.push_back(std::move(m));
    }
    if (models.empty()) throw ValidationError(std::string(source) + ": manifest has no models");
    sort_models(models);
    return models;
}

inline std::vector<ModelRecord> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open manifest");
    return parse_manifest(in, path);
}

// Writes the resolved manifest. Reloading the output yields identical records.
inline void write_manifest(std::ostream& out, std::span<const ModelRecord> models) {
    out << "model_id,effective_size,compute_flops,n_params,n_tokens\n";
    for (const auto& m : models) {
        out << csv_escape(m.model_id) << ',' << format_double(m.effective_size) << ',';
        if (m.compute_flops) out << format_double(*m.compute_flops);
        out << ',';
        if (m.n_params) out << *m.n_params;
        out << ',';
        if (m.n_tokens) out << *m.n_tokens;
        out << '\n';
    }
}

namespace detail {

inline ChoiceEval parse_eval_line(const std::string& line, const std::string& where) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(where + "invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ValidationError(where + "record is not a JSON object");

    auto require_string = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string())
            throw ValidationError(where + "missing or non-string field '" + key + "'");
        return it->get<std::string>();
    };

    ChoiceEval e;
    e.model_id = require_string("model_id");
    e.question_id = require_string("question_id");

    auto probs = j.find("choice_probs");
    if (probs == j.end() || !probs->is_array())
        throw ValidationError(where + "missing or non-array field 'choice_probs'");
    for (const auto& p : *probs) {
        if (!p.is_number()) throw ValidationError(where + "choice_probs must contain numbers");
        e.choice_probs.push_back(p.get<double>());
    }
    if (e.choice_probs.size() < 2) throw ValidationError(where + "choice_probs needs at least 2 entries");
    double sum = 0.0;
    for (double p : e.choice_probs) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0)
            throw ValidationError(where + "choice probability " + format_double(p) + " outside [0,1]");
        sum += p;
    }
    if (sum > 1.0 + kProbabilitySumTolerance)
        throw ValidationError(where + "choice_probs sum to " + format_double(sum) + " > 1");

    auto ci = j.find("correct_index");
    if (ci == j.end() || !ci->is_number_integer())
        throw ValidationError(where + "missing or non-integer field 'correct_index'");
    const auto idx = ci->get<long long>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= e.choice_probs.size())
        throw ValidationError(where + "correct_index " + std::to_string(idx) + " out of range");
    e.correct_index = static_cast<std::size_t>(idx);

    for (const char* key : {"prediction", "target"}) {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) continue;
        if (!it->is_string()) throw ValidationError(where + "field '" + key + "' must be a string");
        (std::string_view(key) == "prediction" ? e.prediction : e.target) = it->get<std::string>();
    }
    return e;
}

} // namespace detail

inline EvalTable parse_evals(std::istream& in, std::span<const ModelRecord> manifest,
                             std::string_view source = "evals.jsonl") {
    std::unordered_map<std::string, std::size_t> model_index;
    for (std::size_t i = 0; i < manifest.size(); ++i) model_index.emplace(manifest[i].model_id, i);

    std::vector<std::map<std::string, ChoiceEval>> per_model(manifest.size());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto where = detail::at_line(source, line_no);
        auto e = detail::parse_eval_line(line, where);
        auto it = model_index.find(e.model_id);
        if (it == model_index.end())
            throw ValidationError(where + "model_id '" + e.model_id + "' is not in the manifest");
        auto& bucket = per_model[it->second];
        const auto qid = e.question_id;
        if (!bucket.emplace(qid, std::move(e)).second)
            throw ValidationError(where + "duplicate record for (" + manifest[it->second].model_id + ", " +
                                  qid + ")");
    }

    std::set<std::string> all_questions;
    for (const auto& b : per_model)
        for (const auto& [q, _] : b) all_questions.insert(q);
    if (all_questions.empty()) throw ValidationError(std::string(source) + ": no evaluation records");

    for (std::size_t m = 0; m < per_model.size(); ++m) {
        if (per_model[m].size() == all_questions.size()) continue;
        std::vector<std::string> missing;
        for (const auto& q : all_questions)
            if (!per_model[m].contains(q)) missing.push_back(q);
        std::string msg = std::string(source) + ": question sets differ across models; model '" +
                          manifest[m].model_id + "' lacks " + std::to_string(missing.size()) +
                          " question(s):";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
        if (missing.size() > 10) msg += " ...";
        throw ValidationError(msg);
    }

    EvalTable table;
    table.models.assign(manifest.begin(), manifest.end());
    table.question_ids.assign(all_questions.begin(), all_questions.end());
    table.records.reserve(manifest.size() * all_questions.size());
    for (auto& bucket : per_model)
        for (auto& [_, e] : bucket) table.records.push_back(std::move(e));
    return table;
}

inline EvalTable load_evals(const std::string& path, std::span<const ModelRecord> manifest) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open evaluation file");
    return parse_evals(in, manifest, path);
}

// Indices into an ascending-M model list. Train is M < T, test is M >= T.
struct Split {
    double threshold = 0.0;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

inline Split split_train_test(std::span<const double> sizes, double threshold) {
    if (!std::isfinite(threshold)) throw ValidationError("threshold must be finite");
    Split s;
    s.threshold = threshold;
    std::size_t i = 0;
    for (double m : sizes) {
        (m < threshold ? s.train : s.test).push_back(i);
        ++i;
    }
    if (s.train.empty())
        throw ValidationError("threshold " + format_double(threshold) + " leaves the training set empty");
    if (s.test.empty())
        throw ValidationError("threshold " + format_double(threshold) + " leaves the test set empty");
    return s;
}

inline std::vector<double> model_sizes(std::span<const ModelRecord> models) {
    std::vector<double> out;
    out.reserve(models.size());
    for (const auto& m : models) out.push_back(m.effective_size);
    return out;
}

inline Split split_train_test(std::span<const ModelRecord> models, double threshold) {
    return split_train_test(model_sizes(models), threshold);
}

} // namespace slicecast
