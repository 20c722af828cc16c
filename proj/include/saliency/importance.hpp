#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "saliency/errors.hpp"
#include "saliency/ig.hpp"
#include "saliency/schema.hpp"
#include "saliency/stats.hpp"

namespace saliency {

enum class ImportanceMethod { Mean, Max };

inline std::string importance_method_name(ImportanceMethod m) {
    return m == ImportanceMethod::Mean ? "mean" : "max";
}

// Overall per-dimension importance: column sums of the normalized saliency.
inline std::vector<double> dimension_importance(const SaliencyMap& map) {
    std::vector<double> importance(map.normalized.cols(), 0.0);
    for (std::size_t t = 0; t < map.normalized.rows(); ++t)
        for (std::size_t i = 0; i < map.normalized.cols(); ++i) importance[i] += map.normalized(t, i);
    return importance;
}

// Per-group importance, aligned with schema group order. The mean method
// averages the per-dimension sums over the group's dims; the max method
// takes the peak normalized saliency over the group's dims and all steps.
inline std::vector<double> group_importance(const std::vector<double>& per_dim, const StateSchema& schema,
                                            ImportanceMethod method, const SaliencyMap& map) {
    require_valid_schema(schema, per_dim.size());
    std::vector<double> out;
    out.reserve(schema.groups.size());
    for (const auto& group : schema.groups) {
        if (method == ImportanceMethod::Mean) {
            double sum = 0.0;
            for (std::size_t d : group.dims) {
                if (d >= per_dim.size()) throw ComputeError("group '" + group.name + "' dim out of range");
                sum += per_dim[d];
            }
            out.push_back(sum / static_cast<double>(group.dims.size()));
        } else {
            double peak = 0.0;
            for (std::size_t d : group.dims) {
                if (d >= map.normalized.cols()) throw ComputeError("group '" + group.name + "' dim out of range");
                for (std::size_t t = 0; t < map.normalized.rows(); ++t)
                    peak = std::max(peak, map.normalized(t, d));
            }
            out.push_back(peak);
        }
    }
    return out;
}

// Shares of total group importance. Feedforward groups are excluded from the
// denominator unless requested; excluded groups report share 0.
inline std::vector<double> relative_importance(const std::vector<double>& group_imp, const StateSchema& schema,
                                               bool include_feedforward = false) {
    if (group_imp.size() != schema.groups.size())
        throw ComputeError("group importance size does not match schema");
    double total = 0.0;
    std::size_t included = 0;
    for (std::size_t g = 0; g < group_imp.size(); ++g) {
        const bool in = include_feedforward || schema.groups[g].kind == GroupKind::Feedback;
        if (!in) continue;
        ++included;
        total += group_imp[g];
    }
    if (included == 0) throw ComputeError("no groups included in relative importance");
    if (total == 0.0) throw ComputeError("all-zero importance: relative shares are undefined");
    std::vector<double> shares(group_imp.size(), 0.0);
    for (std::size_t g = 0; g < group_imp.size(); ++g) {
        const bool in = include_feedforward || schema.groups[g].kind == GroupKind::Feedback;
        shares[g] = in ? group_imp[g] / total : 0.0;
    }
    return shares;
}

struct GroupImportance {
    std::string name;
    GroupKind kind = GroupKind::Feedback;
    double importance = 0.0;  // I_o
    double relative = 0.0;    // r_o
};

struct ImportanceReport {
    ImportanceMethod method = ImportanceMethod::Mean;
    std::vector<double> per_dim;
    // Ranked: descending relative share, ties in schema order.
    std::vector<GroupImportance> groups;
};

inline ImportanceReport build_report(const SaliencyMap& map, const StateSchema& schema, ImportanceMethod method,
                                     bool include_feedforward = false) {
    ImportanceReport report;
    report.method = method;
    report.per_dim = dimension_importance(map);
    const auto group_imp = group_importance(report.per_dim, schema, method, map);
    const auto shares = relative_importance(group_imp, schema, include_feedforward);
    std::vector<std::size_t> order(schema.groups.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return shares[a] > shares[b]; });
    for (std::size_t g : order)
        report.groups.push_back({schema.groups[g].name, schema.groups[g].kind, group_imp[g], shares[g]});
    return report;
}

// Summed feedforward vs feedback share, with feedforward groups included in
// the denominator. The two shares add to 1.
inline std::pair<double, double> feedforward_share(const SaliencyMap& map, const StateSchema& schema) {
    if (!schema.has_feedforward()) throw ComputeError("schema has no feedforward group");
    const auto per_dim = dimension_importance(map);
    const auto group_imp = group_importance(per_dim, schema, ImportanceMethod::Mean, map);
    const auto shares = relative_importance(group_imp, schema, /*include_feedforward=*/true);
    double ff = 0.0, fb = 0.0;
    for (std::size_t g = 0; g < shares.size(); ++g)
        (schema.groups[g].kind == GroupKind::Feedforward ? ff : fb) += shares[g];
    return {ff, fb};
}

// ---------------------------------------------------------------------------
// Sensor-noise sensitivity composition
// ---------------------------------------------------------------------------

struct NoiseSpec {
    std::vector<double> sigma;  // per-dimension sensor noise, in sensor units

    void validate(std::size_t n) const {
        if (sigma.size() != n)
            throw InputError("noise spec has " + std::to_string(sigma.size()) + " sigmas, expected " +
                             std::to_string(n));
        for (double s : sigma)
            if (!(s >= 0.0)) throw InputError("noise sigma must be >= 0");
    }
};

// Element-wise composition of the saliency map with the per-dimension sensor
// sensitivity sigma / (range width). Dimensions with zero sigma need no
// range and contribute zero.
inline Matrix compose_sensitivity(const SaliencyMap& map, const NoiseSpec& noise, const StateSchema& schema) {
    const std::size_t n = map.normalized.cols();
    noise.validate(n);
    require_valid_schema(schema, n);
    std::vector<double> sensor(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (noise.sigma[i] == 0.0) continue;
        const auto range = schema.range_of_dim(i);
        if (!range) throw InputError("dim " + std::to_string(i) + " has sensor noise but no range in the schema");
        const double width = range->max - range->min;
        if (!(width > 0.0)) throw InputError("dim " + std::to_string(i) + " has zero-width range");
        sensor[i] = noise.sigma[i] / width;
    }
    Matrix out(map.normalized.rows(), n);
    for (std::size_t t = 0; t < out.rows(); ++t)
        for (std::size_t i = 0; i < n; ++i) out(t, i) = map.normalized(t, i) * sensor[i];
    return out;
}

// Sensor noise levels measured on the real robot (standard deviations),
// mapped onto a schema by group name; unlisted groups get zero.
inline NoiseSpec default_noise(const StateSchema& schema) {
    NoiseSpec noise;
    noise.sigma.assign(schema.total_dim, 0.0);
    auto assign = [&](const char* name, double sigma) {
        if (const StateGroup* g = schema.find(name))
            for (std::size_t d : g->dims) noise.sigma[d] = sigma;
    };
    assign("joint_position", 0.02);
    assign("gravity_vector", 0.01);
    assign("base_linear_velocity", 0.02);
    assign("base_angular_velocity", 0.4);
    return noise;
}

// ---------------------------------------------------------------------------
// Aggregation across trials
// ---------------------------------------------------------------------------

// Distribution of relative importance per group across repeated trials.
// All reports must cover the same set of group names; output follows the
// first report's group order.
inline std::vector<std::pair<std::string, BoxStats>> aggregate_trials(const std::vector<ImportanceReport>& reports) {
    if (reports.empty()) throw ComputeError("no reports to aggregate");
    std::vector<std::string> names;
    for (const auto& g : reports.front().groups) names.push_back(g.name);
    std::vector<std::pair<std::string, BoxStats>> out;
    for (const auto& name : names) {
        std::vector<double> values;
        values.reserve(reports.size());
        for (const auto& report : reports) {
            auto it = std::find_if(report.groups.begin(), report.groups.end(),
                                   [&](const GroupImportance& g) { return g.name == name; });
            if (it == report.groups.end())
                throw ComputeError("report group sets differ: missing group '" + name + "'");
            values.push_back(it->relative);
        }
        out.emplace_back(name, box_stats(values));
    }
    for (const auto& report : reports)
        if (report.groups.size() != names.size()) throw ComputeError("report group sets differ in size");
    return out;
}

} // namespace saliency
