#pragma once

#include "saliency/ig.hpp"
#include "saliency/importance.hpp"
#include "saliency/mlp.hpp"
#include "saliency/schema.hpp"
#include "saliency/trajectory.hpp"

namespace saliency {

// Options for a full analysis run; mirrors the analyze command line.
struct AnalysisOptions {
    std::size_t steps = 25;
    std::vector<double> baseline;  // empty = all-zero
    std::optional<std::vector<std::size_t>> output_mask;
    ImportanceMethod method = ImportanceMethod::Mean;
    bool include_feedforward = false;
    unsigned threads = 0;  // 0 = all cores
};

struct AnalysisResult {
    SaliencyMap map;
    ImportanceReport report;
};

// Saliency over the trajectory, then importance aggregation against the
// schema. The one-stop entry point behind `analyze`.
inline AnalysisResult run_analysis(const MlpPolicy& policy, const Trajectory& trajectory, const StateSchema& schema,
                                   const AnalysisOptions& opts = {}) {
    require_valid_schema(schema, policy.input_dim);
    if (trajectory.state_dim() != schema.total_dim)
        throw InputError("trajectory state dim does not match schema total_dim");
    IgConfig cfg;
    cfg.steps = opts.steps;
    cfg.baseline = opts.baseline;
    cfg.output_mask = opts.output_mask;
    AnalysisResult result;
    result.map = saliency_pipeline(policy, trajectory, cfg, opts.threads);
    result.report = build_report(result.map, schema, opts.method, opts.include_feedforward);
    return result;
}

} // namespace saliency
