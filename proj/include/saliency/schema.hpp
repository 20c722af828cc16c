#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "saliency/csv.hpp"
#include "saliency/errors.hpp"

namespace saliency {

enum class GroupKind { Feedback, Feedforward };

struct DimRange {
    double min = 0.0;
    double max = 0.0;
};

// One named feedback (or feedforward) state: the state-vector dimensions it
// occupies, in saliency-map order. Ranges are optional and only required by
// the sensor-noise composition.
struct StateGroup {
    std::string name;
    std::vector<std::size_t> dims;
    GroupKind kind = GroupKind::Feedback;
    std::optional<std::vector<DimRange>> range;  // aligned with dims
};

struct StateSchema {
    std::vector<StateGroup> groups;
    std::size_t total_dim = 0;

    const StateGroup* find(const std::string& name) const {
        for (const auto& g : groups)
            if (g.name == name) return &g;
        return nullptr;
    }

    bool has_feedforward() const {
        return std::any_of(groups.begin(), groups.end(),
                           [](const StateGroup& g) { return g.kind == GroupKind::Feedforward; });
    }

    std::optional<DimRange> range_of_dim(std::size_t dim) const {
        for (const auto& g : groups) {
            if (!g.range) continue;
            for (std::size_t q = 0; q < g.dims.size(); ++q)
                if (g.dims[q] == dim) return (*g.range)[q];
        }
        return std::nullopt;
    }
};

struct SchemaValidation {
    bool ok = true;
    std::vector<std::string> problems;
};

// Accepts iff the groups disjointly cover [0, n) and total_dim == n.
inline SchemaValidation validate_schema(const StateSchema& schema, std::size_t n) {
    SchemaValidation result;
    auto fail = [&](std::string msg) {
        result.ok = false;
        result.problems.push_back(std::move(msg));
    };

    if (schema.total_dim != n)
        fail("total_dim " + std::to_string(schema.total_dim) + " does not match expected " + std::to_string(n));
    if (schema.groups.empty()) fail("schema has no groups");

    bool any_feedback = false;
    std::vector<const StateGroup*> owner(n, nullptr);
    for (const auto& g : schema.groups) {
        if (g.kind == GroupKind::Feedback) any_feedback = true;
        if (g.dims.empty()) fail("group '" + g.name + "' has no dims");
        if (g.range) {
            if (g.range->size() != g.dims.size())
                fail("group '" + g.name + "' range list does not align with dims");
            for (const auto& r : *g.range)
                if (!(r.min < r.max))
                    fail("group '" + g.name + "' has range with min >= max");
        }
        for (std::size_t d : g.dims) {
            if (d >= n) {
                fail("group '" + g.name + "' dim " + std::to_string(d) + " out of range");
                continue;
            }
            if (owner[d] != nullptr)
                fail("overlap: dim " + std::to_string(d) + " claimed by both '" + owner[d]->name + "' and '" +
                     g.name + "'");
            else
                owner[d] = &g;
        }
    }
    if (!any_feedback) fail("schema needs at least one feedback group");
    std::string missing;
    for (std::size_t d = 0; d < n; ++d) {
        if (owner[d] == nullptr) missing += (missing.empty() ? "" : ",") + std::to_string(d);
    }
    if (!missing.empty()) fail("gap: dims {" + missing + "} not covered by any group");
    return result;
}

inline void require_valid_schema(const StateSchema& schema, std::size_t n) {
    auto v = validate_schema(schema, n);
    if (!v.ok) {
        std::string msg = "invalid schema:";
        for (const auto& p : v.problems) msg += "\n  " + p;
        throw InputError(msg);
    }
}

// The 64-dim full-state layout: nine feedback states in saliency-map order
// (12,3,3,3,12,3,4,12,12).
inline StateSchema default_schema() {
    StateSchema schema;
    schema.total_dim = 64;
    auto add = [&](const std::string& name, std::size_t first, std::size_t count, GroupKind kind) {
        StateGroup g;
        g.name = name;
        g.kind = kind;
        for (std::size_t d = first; d < first + count; ++d) g.dims.push_back(d);
        schema.groups.push_back(std::move(g));
    };
    add("joint_position", 0, 12, GroupKind::Feedback);
    add("gravity_vector", 12, 3, GroupKind::Feedback);
    add("base_linear_velocity", 15, 3, GroupKind::Feedback);
    add("base_angular_velocity", 18, 3, GroupKind::Feedback);
    add("foot_position", 21, 12, GroupKind::Feedback);
    add("base_position", 33, 3, GroupKind::Feedback);
    add("foot_contact", 36, 4, GroupKind::Feedback);
    add("joint_torque", 40, 12, GroupKind::Feedback);
    add("joint_velocity", 52, 12, GroupKind::Feedback);
    return schema;
}

// Gait variant: the 64 feedback dims plus the 2-dim feedforward phase vector.
inline StateSchema default_schema_with_phase() {
    StateSchema schema = default_schema();
    StateGroup phase;
    phase.name = "phase_vector";
    phase.kind = GroupKind::Feedforward;
    phase.dims = {64, 65};
    schema.groups.push_back(std::move(phase));
    schema.total_dim = 66;
    return schema;
}

// ---------------------------------------------------------------------------
// Derived input signals
// ---------------------------------------------------------------------------

// Sigmoid foot-contact shaping: slope c1 (1/N) and offset force c2 (N).
struct ContactConfig {
    double c1 = 2.0;
    double c2 = 2.0;

    void validate() const {
        if (!(c1 > 0.0)) throw InputError("contact config requires c1 > 0");
    }
};

inline double sigmoid_contact(double force_norm, const ContactConfig& cfg) {
    cfg.validate();
    if (force_norm < 0.0) throw ComputeError("contact force norm must be >= 0");
    return 1.0 / (1.0 + std::exp(-cfg.c1 * (force_norm - cfg.c2)));
}

// Gait clock: period T (s) at control frequency f_c (Hz).
struct PhaseConfig {
    double period_s = 1.0;
    double control_hz = 25.0;

    void validate() const {
        if (!(period_s > 0.0)) throw InputError("phase config requires T > 0");
        if (!(control_hz > 0.0)) throw InputError("phase config requires f_c > 0");
        if (!(period_s * control_hz >= 1.0)) throw InputError("phase config requires T*f_c >= 1");
    }
};

// phi = (k mod T*f_c) / (T*f_c), in [0,1). Real-valued modulo, so
// non-integer periods are allowed.
inline double phase(std::uint64_t step, const PhaseConfig& cfg) {
    cfg.validate();
    const double steps_per_period = cfg.period_s * cfg.control_hz;
    return std::fmod(static_cast<double>(step), steps_per_period) / steps_per_period;
}

inline std::pair<double, double> phase_vector(double phi) {
    const double angle = 2.0 * std::numbers::pi * phi;
    return {std::sin(angle), std::cos(angle)};
}

// ---------------------------------------------------------------------------
// Schema file format: JSON
//   {"total_dim":int,
//    "groups":[{"name":str,"dims":[ints],"kind":"feedback|feedforward",
//               "range":[[min,max],...]?}]}
// ---------------------------------------------------------------------------

inline StateSchema schema_from_json(const nlohmann::json& doc) {
    StateSchema schema;
    if (!doc.is_object() || !doc.contains("total_dim") || !doc.contains("groups"))
        throw InputError("schema file must contain 'total_dim' and 'groups'");
    schema.total_dim = doc["total_dim"].get<std::size_t>();
    for (const auto& jg : doc["groups"]) {
        StateGroup g;
        g.name = jg.at("name").get<std::string>();
        g.dims = jg.at("dims").get<std::vector<std::size_t>>();
        const std::string kind = jg.at("kind").get<std::string>();
        if (kind == "feedback")
            g.kind = GroupKind::Feedback;
        else if (kind == "feedforward")
            g.kind = GroupKind::Feedforward;
        else
            throw InputError("group '" + g.name + "': unknown kind '" + kind + "'");
        if (jg.contains("range")) {
            std::vector<DimRange> ranges;
            for (const auto& jr : jg["range"]) {
                if (!jr.is_array() || jr.size() != 2)
                    throw InputError("group '" + g.name + "': range entries must be [min,max]");
                ranges.push_back({jr[0].get<double>(), jr[1].get<double>()});
            }
            g.range = std::move(ranges);
        }
        schema.groups.push_back(std::move(g));
    }
    require_valid_schema(schema, schema.total_dim);
    return schema;
}

inline nlohmann::json schema_to_json(const StateSchema& schema) {
    nlohmann::json doc;
    doc["total_dim"] = schema.total_dim;
    doc["groups"] = nlohmann::json::array();
    for (const auto& g : schema.groups) {
        nlohmann::json jg;
        jg["name"] = g.name;
        jg["dims"] = g.dims;
        jg["kind"] = g.kind == GroupKind::Feedback ? "feedback" : "feedforward";
        if (g.range) {
            auto ranges = nlohmann::json::array();
            for (const auto& r : *g.range) ranges.push_back({r.min, r.max});
            jg["range"] = std::move(ranges);
        }
        doc["groups"].push_back(std::move(jg));
    }
    return doc;
}

inline StateSchema load_schema(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("cannot parse schema file " + path.string() + ": " + e.what());
    }
    return schema_from_json(doc);
}

inline void save_schema(const StateSchema& schema, const std::filesystem::path& path) {
    write_text_file(path, schema_to_json(schema).dump(2) + "\n");
}

} // namespace saliency
