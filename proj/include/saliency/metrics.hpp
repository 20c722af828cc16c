#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "saliency/csv.hpp"
#include "saliency/errors.hpp"
#include "saliency/matrix.hpp"

namespace saliency {

enum class Task { Recovery, Gait };

inline std::string task_name(Task t) { return t == Task::Recovery ? "recovery" : "gait"; }

inline Task task_from_name(const std::string& name) {
    if (name == "recovery") return Task::Recovery;
    if (name == "gait") return Task::Gait;
    throw InputError("unknown task '" + name + "' (expected recovery or gait)");
}

// Nominal values the metrics score against. Defaults are for the A1
// quadruped; gait defaults use the trotting speed (bounding runs override
// nominal_speed/nominal_heading to 1.0 m/s).
struct MetricTargets {
    double max_torque = 33.5;        // N*m
    double nominal_height = 0.25;    // m
    std::array<double, 8> nominal_feet = {0.18, 0.13, -0.18, -0.13, -0.18, 0.13, 0.18, -0.13};
    double placement_scale = 0.3;    // m
    double nominal_speed = 0.5;      // m/s
    std::array<double, 2> nominal_heading = {0.5, 0.0};
    std::array<double, 3> nominal_gravity = {0.0, 0.0, -1.0};

    void validate() const {
        if (!(max_torque > 0.0)) throw InputError("max torque must be > 0");
        if (!(nominal_height > 0.0)) throw InputError("nominal height must be > 0");
        if (!(placement_scale > 0.0)) throw InputError("placement scale must be > 0");
        if (!(nominal_speed > 0.0)) throw InputError("nominal speed must be > 0");
        const double g = std::sqrt(nominal_gravity[0] * nominal_gravity[0] + nominal_gravity[1] * nominal_gravity[1] +
                                   nominal_gravity[2] * nominal_gravity[2]);
        if (std::abs(g - 1.0) > 1e-6) throw InputError("nominal gravity must be a unit vector");
    }
};

inline MetricTargets default_targets(Task task) {
    MetricTargets t;
    t.nominal_height = task == Task::Recovery ? 0.25 : 0.3;
    return t;
}

// One scored episode. Channels are optional; each metric checks for the
// channels it needs.
struct EpisodeRecord {
    Matrix torques;          // N x 12, N*m
    std::vector<double> height;       // N, m
    Matrix gravity;          // N x 3, unit vectors
    Matrix planar_velocity;  // N x 2, m/s, heading frame
    std::vector<double> forward_speed;  // N, m/s
    std::array<double, 8> final_feet{};   // planar coords, m
    double final_height = 0.0;            // m
    std::array<double, 3> final_gravity{0.0, 0.0, -1.0};
    double recovery_time = 0.0;  // T, s
    double horizon = 0.0;        // T_hat, s
    std::size_t timesteps = 0;

    bool has_torques = false;
    bool has_height = false;
    bool has_gravity = false;
    bool has_planar_velocity = false;
    bool has_forward_speed = false;
    bool has_final_state = false;
    bool has_recovery_time = false;
};

namespace detail {

inline void check_unit(const double* g, const std::string& what) {
    const double norm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    if (std::abs(norm - 1.0) > 1e-6) throw InputError(what + " is not a unit vector (|g| = " + format_double(norm) + ")");
}

inline double clamp_unit_interval(double v) { return std::min(1.0, std::max(0.0, v)); }

} // namespace detail

// s_tau: 1 minus the mean normalized torque magnitude over joints and steps.
// Entries above the maximum are clamped (real logs contain spikes).
inline double torque_metric(const Matrix& torques, double max_torque, std::vector<std::string>* warnings = nullptr) {
    if (torques.cols() != 12) throw InputError("torque metric needs 12 joint channels, got " + std::to_string(torques.cols()));
    if (torques.rows() == 0) throw InputError("torque metric needs at least one timestep");
    if (!(max_torque > 0.0)) throw InputError("max torque must be > 0");
    std::size_t clamped = 0;
    double sum = 0.0;
    for (std::size_t t = 0; t < torques.rows(); ++t) {
        for (std::size_t i = 0; i < 12; ++i) {
            double mag = std::abs(torques(t, i));
            if (mag > max_torque) {
                mag = max_torque;
                ++clamped;
            }
            sum += mag / max_torque;
        }
    }
    if (clamped > 0 && warnings)
        warnings->push_back("torque metric: clamped " + std::to_string(clamped) + " entries above the maximum");
    return detail::clamp_unit_interval(1.0 - sum / static_cast<double>(12 * torques.rows()));
}

// s_r: 1 - T / T_hat.
inline double recovery_speed(double recovery_time, double horizon) {
    if (!(horizon > 0.0)) throw InputError("episode horizon must be > 0");
    if (recovery_time < 0.0) throw InputError("recovery time must be >= 0");
    if (recovery_time > horizon) throw ComputeError("recovery time exceeds the episode horizon");
    return 1.0 - recovery_time / horizon;
}

// s_f: 1 minus the mean absolute placement deviation over the 8 planar foot
// coordinates, scaled by the placement scale; clamped into [0,1].
inline double foot_placement(const std::array<double, 8>& feet, const MetricTargets& targets) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 8; ++i) sum += std::abs(feet[i] - targets.nominal_feet[i]) / targets.placement_scale;
    return detail::clamp_unit_interval(1.0 - sum / 8.0);
}

// s_hN and s_h: min(h, h_hat)/h_hat, final value or mean over steps.
inline double final_height_metric(double height, double nominal_height) {
    if (!(nominal_height > 0.0)) throw InputError("nominal height must be > 0");
    if (height < 0.0) height = 0.0;
    return std::min(height, nominal_height) / nominal_height;
}

inline double mean_height_metric(const std::vector<double>& heights, double nominal_height) {
    if (heights.empty()) throw InputError("height metric needs at least one timestep");
    double sum = 0.0;
    for (double h : heights) sum += final_height_metric(h, nominal_height);
    return sum / static_cast<double>(heights.size());
}

// s_phiN and s_phi: (g . g_hat + 1)/2, final value or mean over steps.
inline double final_orientation_metric(const std::array<double, 3>& gravity, const std::array<double, 3>& nominal) {
    detail::check_unit(gravity.data(), "gravity vector");
    detail::check_unit(nominal.data(), "nominal gravity vector");
    const double dot = gravity[0] * nominal[0] + gravity[1] * nominal[1] + gravity[2] * nominal[2];
    return detail::clamp_unit_interval((dot + 1.0) / 2.0);
}

inline double mean_orientation_metric(const Matrix& gravity, const std::array<double, 3>& nominal) {
    if (gravity.cols() != 3) throw InputError("orientation metric needs 3 gravity channels");
    if (gravity.rows() == 0) throw InputError("orientation metric needs at least one timestep");
    double sum = 0.0;
    for (std::size_t t = 0; t < gravity.rows(); ++t) {
        const std::array<double, 3> g = {gravity(t, 0), gravity(t, 1), gravity(t, 2)};
        sum += final_orientation_metric(g, nominal);
    }
    return sum / static_cast<double>(gravity.rows());
}

// s_v: min(mean V, V_hat)/V_hat.
inline double forward_velocity_metric(const std::vector<double>& speeds, double nominal_speed) {
    if (speeds.empty()) throw InputError("velocity metric needs at least one timestep");
    if (!(nominal_speed > 0.0)) throw InputError("nominal speed must be > 0");
    double sum = 0.0;
    for (double v : speeds) {
        if (v < 0.0) throw InputError("forward speed must be >= 0");
        sum += v;
    }
    const double mean = sum / static_cast<double>(speeds.size());
    return std::min(mean, nominal_speed) / nominal_speed;
}

// s_psi: mean of (cos theta + 1)/2 against the nominal heading. Steps with
// near-zero velocity magnitude contribute cos theta = 0 instead of dividing
// by zero.
inline double heading_accuracy(const Matrix& planar_velocity, const std::array<double, 2>& nominal) {
    if (planar_velocity.cols() != 2) throw InputError("heading metric needs 2 planar velocity channels");
    if (planar_velocity.rows() == 0) throw InputError("heading metric needs at least one timestep");
    const double nominal_mag = std::sqrt(nominal[0] * nominal[0] + nominal[1] * nominal[1]);
    if (nominal_mag < 1e-9) throw InputError("nominal heading velocity must be nonzero");
    double sum = 0.0;
    for (std::size_t t = 0; t < planar_velocity.rows(); ++t) {
        const double vx = planar_velocity(t, 0), vy = planar_velocity(t, 1);
        const double mag = std::sqrt(vx * vx + vy * vy);
        double cos_theta = 0.0;
        if (mag >= 1e-9) cos_theta = (vx * nominal[0] + vy * nominal[1]) / (mag * nominal_mag);
        sum += (cos_theta + 1.0) / 2.0;
    }
    return detail::clamp_unit_interval(sum / static_cast<double>(planar_velocity.rows()));
}

// Five named unit-interval scores for one task.
struct MetricSet {
    Task task = Task::Recovery;
    std::vector<std::pair<std::string, double>> scores;

    double get(const std::string& name) const {
        for (const auto& [key, value] : scores)
            if (key == name) return value;
        throw ComputeError("metric set has no score named '" + name + "'");
    }
};

inline MetricSet score_episode(const EpisodeRecord& episode, const MetricTargets& targets, Task task,
                               std::vector<std::string>* warnings = nullptr) {
    targets.validate();
    if (episode.timesteps == 0) throw InputError("episode has no timesteps");
    MetricSet set;
    set.task = task;
    if (!episode.has_torques) throw InputError("episode is missing the torque channels tau_0..tau_11");
    set.scores.emplace_back("s_tau", torque_metric(episode.torques, targets.max_torque, warnings));
    if (task == Task::Recovery) {
        if (!episode.has_recovery_time) throw InputError("episode sidecar is missing T / T_hat");
        if (!episode.has_final_state) throw InputError("episode sidecar is missing p_f, h_N, g_N");
        set.scores.emplace_back("s_r", recovery_speed(episode.recovery_time, episode.horizon));
        set.scores.emplace_back("s_f", foot_placement(episode.final_feet, targets));
        set.scores.emplace_back("s_hN", final_height_metric(episode.final_height, targets.nominal_height));
        set.scores.emplace_back("s_phiN", final_orientation_metric(episode.final_gravity, targets.nominal_gravity));
    } else {
        if (!episode.has_forward_speed) throw InputError("episode is missing the forward speed channel V");
        if (!episode.has_planar_velocity) throw InputError("episode is missing the planar velocity channels vhx,vhy");
        if (!episode.has_height) throw InputError("episode is missing the height channel h");
        if (!episode.has_gravity) throw InputError("episode is missing the gravity channels gx,gy,gz");
        set.scores.emplace_back("s_v", forward_velocity_metric(episode.forward_speed, targets.nominal_speed));
        set.scores.emplace_back("s_psi", heading_accuracy(episode.planar_velocity, targets.nominal_heading));
        set.scores.emplace_back("s_h", mean_height_metric(episode.height, targets.nominal_height));
        set.scores.emplace_back("s_phi", mean_orientation_metric(episode.gravity, targets.nominal_gravity));
    }
    return set;
}

// s_key: mean of the five per-metric ratios of a key-state run against the
// full-state baseline. Ratios above 1 are kept as-is.
inline double overall_score(const MetricSet& key, const MetricSet& full) {
    if (key.task != full.task) throw ComputeError("overall score needs metric sets from the same task");
    if (key.scores.size() != full.scores.size() || key.scores.size() != 5)
        throw ComputeError("overall score needs two complete five-metric sets");
    double sum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        if (key.scores[i].first != full.scores[i].first)
            throw ComputeError("metric sets disagree on score order");
        if (!(full.scores[i].second > 0.0))
            throw ComputeError("full-state score '" + full.scores[i].first + "' is zero; ratio undefined");
        sum += key.scores[i].second / full.scores[i].second;
    }
    return sum / 5.0;
}

// ---------------------------------------------------------------------------
// Reward terms
// ---------------------------------------------------------------------------

// phi(x, x_hat, alpha) = exp(alpha * (x_hat - x)^2), alpha <= 0.
inline double rbf_reward(double value, double reference, double alpha) {
    if (alpha > 0.0) throw ComputeError("RBF shape parameter must be <= 0");
    const double d = reference - value;
    return std::exp(alpha * d * d);
}

enum class RewardKind { Rbf, Indicator };

// One weighted reward term. Discrete quantities (contact booleans) are
// pass-through indicators; continuous ones are RBF-shaped.
struct RewardTerm {
    std::string name;
    RewardKind kind = RewardKind::Rbf;
    double value = 0.0;      // x
    double reference = 0.0;  // x_hat
    double alpha = 0.0;      // <= 0
    double weight = 0.0;     // [0,1]
};

inline double reward_term_value(const RewardTerm& term) {
    if (term.kind == RewardKind::Indicator) {
        if (term.value < 0.0 || term.value > 1.0) throw ComputeError("indicator reward value must lie in [0,1]");
        return term.value;
    }
    return rbf_reward(term.value, term.reference, term.alpha);
}

inline double weighted_reward(const std::vector<RewardTerm>& terms) {
    if (terms.empty()) throw ComputeError("weighted reward needs at least one term");
    double weight_sum = 0.0, total = 0.0;
    for (const auto& term : terms) {
        if (term.weight < 0.0 || term.weight > 1.0) throw ComputeError("reward weight must lie in [0,1]");
        weight_sum += term.weight;
        total += term.weight * reward_term_value(term);
    }
    // Inclusive boundary: the published recovery weights sum to 0.999
    // exactly, which binary rounding nudges a few ulp past 1e-3.
    if (std::abs(weight_sum - 1.0) > 1e-3 + 1e-9)
        throw ComputeError("reward weights sum to " + format_double(weight_sum) + ", expected 1 within 1e-3");
    return total;
}

// Term lists with the published shape parameters and per-task weights;
// callers fill in value/reference before evaluating.
inline std::vector<RewardTerm> recovery_reward_template() {
    return {
        {"base_orientation", RewardKind::Rbf, 0.0, 0.0, -2.35, 0.189},
        {"base_height", RewardKind::Rbf, 0.0, 0.0, -51.16, 0.189},
        {"base_linear_velocity", RewardKind::Rbf, 0.0, 0.0, -18.42, 0.114},
        {"joint_torque_regularisation", RewardKind::Rbf, 0.0, 0.0, -0.004, 0.076},
        {"joint_velocity_regularisation", RewardKind::Rbf, 0.0, 0.0, -0.032, 0.076},
        {"body_ground_contact", RewardKind::Indicator, 1.0, 0.0, 0.0, 0.083},
        {"foot_ground_contact", RewardKind::Indicator, 1.0, 0.0, 0.0, 0.083},
        {"symmetric_foot_placement", RewardKind::Rbf, 0.0, 0.0, -51.16, 0.189},
    };
}

inline std::vector<RewardTerm> gait_reward_template() {
    return {
        {"base_orientation", RewardKind::Rbf, 0.0, 0.0, -2.35, 0.068},
        {"base_height", RewardKind::Rbf, 0.0, 0.0, -51.16, 0.068},
        {"base_linear_velocity", RewardKind::Rbf, 0.0, 0.0, -18.42, 0.170},
        {"joint_torque_regularisation", RewardKind::Rbf, 0.0, 0.0, -0.004, 0.017},
        {"joint_velocity_regularisation", RewardKind::Rbf, 0.0, 0.0, -0.032, 0.017},
        {"body_ground_contact", RewardKind::Indicator, 1.0, 0.0, 0.0, 0.048},
        {"foot_ground_contact", RewardKind::Indicator, 1.0, 0.0, 0.0, 0.000},
        {"symmetric_foot_placement", RewardKind::Rbf, 0.0, 0.0, -51.16, 0.034},
        {"swing_and_stance", RewardKind::Rbf, 0.0, 0.0, -460.50, 0.034},
        {"reference_foot_contact", RewardKind::Indicator, 1.0, 0.0, 0.0, 0.476},
        {"yaw_velocity", RewardKind::Rbf, 0.0, 0.0, -7.47, 0.068},
    };
}

// ---------------------------------------------------------------------------
// Episode file format: CSV with header-declared channels
//   tau_0..tau_11, h, gx,gy,gz, vhx,vhy, V   (optional leading t column)
// plus a JSON sidecar (episode path with .json extension) holding the
// scalars {T, T_hat, p_f, h_N, g_N}.
// ---------------------------------------------------------------------------

inline std::filesystem::path episode_sidecar_path(const std::filesystem::path& episode_csv) {
    std::filesystem::path sidecar = episode_csv;
    sidecar.replace_extension(".json");
    return sidecar;
}

inline EpisodeRecord load_episode(const std::filesystem::path& csv_path) {
    auto lines = read_lines(csv_path);
    if (lines.size() < 2) throw InputError("episode file " + csv_path.string() + " has no data rows");
    auto header = split_csv_line(lines[0]);
    const std::size_t rows = lines.size() - 1;

    EpisodeRecord episode;
    episode.timesteps = rows;
    std::vector<int> tau_col(12, -1);
    int h_col = -1, v_col = -1;
    std::array<int, 3> g_col = {-1, -1, -1};
    std::array<int, 2> vh_col = {-1, -1};
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name == "t") continue;
        if (name.rfind("tau_", 0) == 0) {
            const int idx = std::stoi(name.substr(4));
            if (idx < 0 || idx >= 12) throw InputError(csv_path.string() + ": torque channel " + name + " out of range");
            tau_col[idx] = static_cast<int>(c);
        } else if (name == "h") {
            h_col = static_cast<int>(c);
        } else if (name == "gx") {
            g_col[0] = static_cast<int>(c);
        } else if (name == "gy") {
            g_col[1] = static_cast<int>(c);
        } else if (name == "gz") {
            g_col[2] = static_cast<int>(c);
        } else if (name == "vhx") {
            vh_col[0] = static_cast<int>(c);
        } else if (name == "vhy") {
            vh_col[1] = static_cast<int>(c);
        } else if (name == "V") {
            v_col = static_cast<int>(c);
        } else {
            throw InputError(csv_path.string() + ": unknown channel '" + name + "'");
        }
    }

    episode.has_torques = std::all_of(tau_col.begin(), tau_col.end(), [](int c) { return c >= 0; });
    if (!episode.has_torques && std::any_of(tau_col.begin(), tau_col.end(), [](int c) { return c >= 0; }))
        throw InputError(csv_path.string() + ": incomplete torque channels (need tau_0..tau_11)");
    episode.has_height = h_col >= 0;
    episode.has_gravity = g_col[0] >= 0 && g_col[1] >= 0 && g_col[2] >= 0;
    episode.has_planar_velocity = vh_col[0] >= 0 && vh_col[1] >= 0;
    episode.has_forward_speed = v_col >= 0;

    if (episode.has_torques) episode.torques = Matrix(rows, 12);
    if (episode.has_height) episode.height.assign(rows, 0.0);
    if (episode.has_gravity) episode.gravity = Matrix(rows, 3);
    if (episode.has_planar_velocity) episode.planar_velocity = Matrix(rows, 2);
    if (episode.has_forward_speed) episode.forward_speed.assign(rows, 0.0);

    for (std::size_t r = 0; r < rows; ++r) {
        auto fields = split_csv_line(lines[1 + r]);
        if (fields.size() != header.size())
            throw InputError(csv_path.string() + ": row " + std::to_string(r) + " field count mismatch");
        const std::string ctx = csv_path.string() + " row " + std::to_string(r);
        if (episode.has_torques)
            for (std::size_t i = 0; i < 12; ++i) episode.torques(r, i) = parse_double(fields[tau_col[i]], ctx);
        if (episode.has_height) episode.height[r] = parse_double(fields[h_col], ctx);
        if (episode.has_gravity)
            for (std::size_t i = 0; i < 3; ++i) episode.gravity(r, i) = parse_double(fields[g_col[i]], ctx);
        if (episode.has_planar_velocity)
            for (std::size_t i = 0; i < 2; ++i) episode.planar_velocity(r, i) = parse_double(fields[vh_col[i]], ctx);
        if (episode.has_forward_speed) episode.forward_speed[r] = parse_double(fields[v_col], ctx);
    }

    const auto sidecar = episode_sidecar_path(csv_path);
    if (std::filesystem::exists(sidecar)) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_text_file(sidecar));
        } catch (const nlohmann::json::exception& e) {
            throw InputError("cannot parse episode sidecar " + sidecar.string() + ": " + e.what());
        }
        if (doc.contains("T") && doc.contains("T_hat")) {
            episode.recovery_time = doc["T"].get<double>();
            episode.horizon = doc["T_hat"].get<double>();
            episode.has_recovery_time = true;
        }
        if (doc.contains("p_f") && doc.contains("h_N") && doc.contains("g_N")) {
            const auto feet = doc["p_f"].get<std::vector<double>>();
            if (feet.size() != 8) throw InputError(sidecar.string() + ": p_f needs 8 coordinates");
            std::copy(feet.begin(), feet.end(), episode.final_feet.begin());
            episode.final_height = doc["h_N"].get<double>();
            const auto g = doc["g_N"].get<std::vector<double>>();
            if (g.size() != 3) throw InputError(sidecar.string() + ": g_N needs 3 components");
            std::copy(g.begin(), g.end(), episode.final_gravity.begin());
            episode.has_final_state = true;
        }
    }
    return episode;
}

inline MetricTargets targets_from_json(const nlohmann::json& doc, Task task) {
    MetricTargets t = default_targets(task);
    if (doc.contains("max_torque")) t.max_torque = doc["max_torque"].get<double>();
    if (doc.contains("nominal_height")) t.nominal_height = doc["nominal_height"].get<double>();
    if (doc.contains("placement_scale")) t.placement_scale = doc["placement_scale"].get<double>();
    if (doc.contains("nominal_speed")) t.nominal_speed = doc["nominal_speed"].get<double>();
    if (doc.contains("nominal_feet")) {
        const auto feet = doc["nominal_feet"].get<std::vector<double>>();
        if (feet.size() != 8) throw InputError("targets: nominal_feet needs 8 coordinates");
        std::copy(feet.begin(), feet.end(), t.nominal_feet.begin());
    }
    if (doc.contains("nominal_heading")) {
        const auto vh = doc["nominal_heading"].get<std::vector<double>>();
        if (vh.size() != 2) throw InputError("targets: nominal_heading needs 2 components");
        std::copy(vh.begin(), vh.end(), t.nominal_heading.begin());
    }
    if (doc.contains("nominal_gravity")) {
        const auto g = doc["nominal_gravity"].get<std::vector<double>>();
        if (g.size() != 3) throw InputError("targets: nominal_gravity needs 3 components");
        std::copy(g.begin(), g.end(), t.nominal_gravity.begin());
    }
    t.validate();
    return t;
}

inline MetricTargets load_targets(const std::filesystem::path& path, Task task) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("cannot parse targets file " + path.string() + ": " + e.what());
    }
    return targets_from_json(doc, task);
}

inline nlohmann::json metric_set_to_json(const MetricSet& set) {
    nlohmann::json doc;
    doc["task"] = task_name(set.task);
    nlohmann::json scores;
    for (const auto& [name, value] : set.scores) scores[name] = value;
    doc["scores"] = std::move(scores);
    return doc;
}

} // namespace saliency
