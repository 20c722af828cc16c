#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "saliency/csv.hpp"
#include "saliency/importance.hpp"
#include "saliency/pipeline.hpp"
#include "saliency/stats.hpp"
#include "saliency/version.hpp"

namespace saliency {

// FNV-1a 64-bit content hash; recorded in run manifests so a bundle can be
// traced back to the exact input bytes it was computed from.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    return hash;
}

inline std::string fnv1a64_hex(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

inline std::string hash_file(const std::filesystem::path& path) { return fnv1a64_hex(read_text_file(path)); }

// Named input files of a run, with their content hashes.
struct InputManifest {
    std::vector<std::pair<std::string, std::filesystem::path>> files;

    void add(const std::string& role, const std::filesystem::path& path) { files.emplace_back(role, path); }
};

inline nlohmann::json manifest_json(const std::string& command, const InputManifest& inputs,
                                    const nlohmann::json& config) {
    nlohmann::json doc;
    doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    doc["command"] = command;
    doc["config"] = config;
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [role, path] : inputs.files)
        files[role] = {{"path", path.string()}, {"fnv1a64", hash_file(path)}};
    doc["inputs"] = std::move(files);
    return doc;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline nlohmann::json importance_report_to_json(const ImportanceReport& report) {
    nlohmann::json doc;
    doc["method"] = importance_method_name(report.method);
    doc["per_dim"] = report.per_dim;
    doc["groups"] = nlohmann::json::array();
    for (const auto& g : report.groups)
        doc["groups"].push_back({{"name", g.name},
                                 {"kind", g.kind == GroupKind::Feedback ? "feedback" : "feedforward"},
                                 {"I", g.importance},
                                 {"r", g.relative}});
    return doc;
}

// Doughnut data: one row per group included in the share denominator,
// percentages in ranking order. Percentages sum to 100 (within rounding of
// the printed digits).
inline std::string doughnut_csv(const ImportanceReport& report, bool include_feedforward) {
    std::ostringstream out;
    out << "group,percent\n";
    for (const auto& g : report.groups) {
        if (!include_feedforward && g.kind == GroupKind::Feedforward) continue;
        out << g.name << ',' << format_double(g.relative * 100.0) << '\n';
    }
    return out.str();
}

inline nlohmann::json box_stats_json(const std::vector<std::pair<std::string, BoxStats>>& stats) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& [name, box] : stats)
        doc.push_back({{"name", name},
                       {"median", box.median},
                       {"q1", box.q1},
                       {"q3", box.q3},
                       {"whisker_low", box.whisker_low},
                       {"whisker_high", box.whisker_high},
                       {"outliers", box.outliers}});
    return doc;
}

inline nlohmann::json saliency_meta_json(const SaliencyMap& map, const IgConfig& cfg, std::size_t input_dim,
                                         const std::vector<std::size_t>& outputs) {
    nlohmann::json doc;
    doc["epsilon"] = map.epsilon;
    doc["p"] = cfg.steps;
    doc["baseline"] = cfg.resolved_baseline(input_dim);
    doc["mask"] = outputs;
    return doc;
}

inline nlohmann::json chord_links_json(const std::vector<ChordLink>& links) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& link : links) doc.push_back({{"a", link.a}, {"b", link.b}, {"value", link.value}});
    return doc;
}

// Writes the analyze bundle into `dir`: saliency.csv, saliency_meta.json,
// importance.json, doughnut.csv, boxstats.json and manifest.json.
inline void write_analysis_bundle(const std::filesystem::path& dir, const AnalysisResult& result,
                                  const MlpPolicy& policy, const AnalysisOptions& opts, const InputManifest& inputs) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "saliency.csv", matrix_to_csv(result.map.normalized));

    IgConfig cfg;
    cfg.steps = opts.steps;
    cfg.baseline = opts.baseline;
    cfg.output_mask = opts.output_mask;
    write_text_file(dir / "saliency_meta.json",
                    saliency_meta_json(result.map, cfg, policy.input_dim, cfg.resolved_outputs(policy)).dump(2) + "\n");
    write_text_file(dir / "importance.json", importance_report_to_json(result.report).dump(2) + "\n");
    write_text_file(dir / "doughnut.csv", doughnut_csv(result.report, opts.include_feedforward));
    write_text_file(dir / "boxstats.json", box_stats_json(aggregate_trials({result.report})).dump(2) + "\n");

    nlohmann::json config;
    config["p"] = opts.steps;
    config["baseline"] = opts.baseline.empty() ? "zero" : "file";
    config["method"] = importance_method_name(opts.method);
    config["include_ff"] = opts.include_feedforward;
    write_text_file(dir / "manifest.json", manifest_json("analyze", inputs, config).dump(2) + "\n");
}

} // namespace saliency
