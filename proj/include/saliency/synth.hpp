#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "saliency/errors.hpp"
#include "saliency/ig.hpp"
#include "saliency/matrix.hpp"
#include "saliency/mlp.hpp"
#include "saliency/prng.hpp"
#include "saliency/schema.hpp"
#include "saliency/trajectory.hpp"

namespace saliency {

// Seeded fixture generation. Same config, same artifacts, byte for byte,
// on every platform.
struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t input_dim = 64;
    std::size_t output_dim = 24;
    std::size_t timesteps = 75;
    std::vector<std::size_t> hidden = {256, 256};
    Activation output_activation = Activation::Tanh;
    // Mirror the mean/stddev actor head split: mask the first half of the
    // outputs when the count allows it.
    bool mask_first_half = true;
    std::optional<std::string> planted_group;

    void validate() const {
        if (input_dim == 0 || output_dim == 0) throw InputError("synth config needs positive dims");
        if (timesteps == 0) throw InputError("synth config needs at least one timestep");
        for (std::size_t h : hidden)
            if (h == 0) throw InputError("synth config has a zero-width hidden layer");
    }
};

namespace detail {

// Trajectory draws come from a separate stream so policies and trajectories
// with the same seed stay independent.
inline constexpr std::uint64_t kTrajectoryStreamSalt = 0x7472616A6563746Full;

} // namespace detail

// Random policy with weights and biases uniform in (-0.5, 0.5), ReLU hidden
// layers and the configured output activation.
inline MlpPolicy gen_random_policy(const SynthConfig& cfg) {
    cfg.validate();
    SplitMix64 rng(cfg.seed);
    MlpPolicy policy;
    std::vector<std::size_t> widths;
    widths.push_back(cfg.input_dim);
    for (std::size_t h : cfg.hidden) widths.push_back(h);
    widths.push_back(cfg.output_dim);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        LayerSpec layer;
        layer.weights = Matrix(widths[l + 1], widths[l]);
        for (double& w : layer.weights.data()) w = rng.next_range(-0.5, 0.5);
        layer.biases.resize(widths[l + 1]);
        for (double& b : layer.biases) b = rng.next_range(-0.5, 0.5);
        const bool last = l + 2 == widths.size();
        layer.activation = last ? cfg.output_activation : Activation::ReLU;
        policy.layers.push_back(std::move(layer));
    }
    policy.input_dim = cfg.input_dim;
    policy.output_dim = cfg.output_dim;
    if (cfg.mask_first_half && cfg.output_dim >= 2 && cfg.output_dim % 2 == 0) {
        std::vector<std::size_t> mask(cfg.output_dim / 2);
        for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = j;
        policy.action_mask = std::move(mask);
    }
    policy.validate();
    return policy;
}

// Same draw sequence as gen_random_policy, but first-layer weight columns
// outside `relevant` are zeroed, so those input dims cannot influence any
// output.
inline MlpPolicy gen_planted_policy(const SynthConfig& cfg, const std::vector<std::size_t>& relevant) {
    if (relevant.empty()) throw InputError("planted policy needs a non-empty relevant dim set");
    for (std::size_t d : relevant)
        if (d >= cfg.input_dim) throw InputError("planted dim " + std::to_string(d) + " out of range");
    MlpPolicy policy = gen_random_policy(cfg);
    std::vector<bool> keep(cfg.input_dim, false);
    for (std::size_t d : relevant) keep[d] = true;
    Matrix& first = policy.layers.front().weights;
    for (std::size_t o = 0; o < first.rows(); ++o)
        for (std::size_t i = 0; i < first.cols(); ++i)
            if (!keep[i]) first(o, i) = 0.0;
    return policy;
}

// Smooth seeded trajectory: each feedback dim is a sum of three
// low-frequency sinusoids (normalized into the schema range when one is
// given); feedforward dims carry the gait-clock phase vector.
inline Trajectory gen_trajectory(const SynthConfig& cfg, const StateSchema& schema) {
    cfg.validate();
    require_valid_schema(schema, schema.total_dim);
    SplitMix64 rng(cfg.seed ^ detail::kTrajectoryStreamSalt);
    const std::size_t n = schema.total_dim;
    const std::size_t rows = cfg.timesteps;
    const PhaseConfig clock;  // 1 s gait period at 25 Hz
    const double dt = 1.0 / clock.control_hz;

    std::vector<bool> is_feedforward(n, false);
    for (const auto& g : schema.groups)
        if (g.kind == GroupKind::Feedforward)
            for (std::size_t d : g.dims) is_feedforward[d] = true;

    Trajectory traj;
    traj.dt = dt;
    traj.states = Matrix(rows, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (is_feedforward[i]) continue;
        double amp[3], freq[3], shift[3], amp_total = 0.0;
        for (int c = 0; c < 3; ++c) {
            amp[c] = rng.next_range(0.2, 1.0);
            freq[c] = rng.next_range(0.1, 1.2);
            shift[c] = rng.next_range(0.0, 2.0 * std::numbers::pi);
            amp_total += amp[c];
        }
        const auto range = schema.range_of_dim(i);
        for (std::size_t t = 0; t < rows; ++t) {
            double v = 0.0;
            const double time = static_cast<double>(t) * dt;
            for (int c = 0; c < 3; ++c) v += amp[c] * std::sin(2.0 * std::numbers::pi * freq[c] * time + shift[c]);
            v /= amp_total;  // into [-1,1]
            if (range) v = 0.5 * (range->min + range->max) + 0.5 * (range->max - range->min) * v;
            traj.states(t, i) = v;
        }
    }
    for (const auto& g : schema.groups) {
        if (g.kind != GroupKind::Feedforward) continue;
        for (std::size_t t = 0; t < rows; ++t) {
            const auto [s, c] = phase_vector(phase(t, clock));
            for (std::size_t q = 0; q < g.dims.size(); ++q)
                traj.states(t, g.dims[q]) = (q % 2 == 0) ? s : c;
        }
    }
    traj.validate();
    return traj;
}

// Central finite differences, the independent oracle for input_jacobian.
inline Matrix fd_jacobian(const MlpPolicy& policy, const std::vector<double>& x, double step = 1e-5) {
    if (!(step > 0.0)) throw ComputeError("finite-difference step must be > 0");
    const std::size_t n = policy.input_dim;
    Matrix jac(policy.output_dim, n);
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < n; ++i) {
        probe[i] = x[i] + step;
        const auto hi = forward(policy, probe);
        probe[i] = x[i] - step;
        const auto lo = forward(policy, probe);
        probe[i] = x[i];
        for (std::size_t j = 0; j < policy.output_dim; ++j) jac(j, i) = (hi[j] - lo[j]) / (2.0 * step);
    }
    return jac;
}

// High-resolution run of the same Riemann scheme, used as the convergence
// target for the production step count.
inline std::vector<double> ig_oracle(const MlpPolicy& policy, const std::vector<double>& x,
                                     const std::vector<double>& baseline, std::size_t steps_large = 65536) {
    if (steps_large < 1024) throw ComputeError("oracle resolution must be at least 1024 steps");
    IgConfig cfg;
    cfg.steps = steps_large;
    cfg.baseline = baseline;
    return integrated_gradients(policy, x, cfg).attributions;
}

} // namespace saliency
