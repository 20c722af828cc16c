#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "saliency/errors.hpp"
#include "saliency/matrix.hpp"
#include "saliency/mlp.hpp"
#include "saliency/trajectory.hpp"

namespace saliency {

// Integrated-gradients configuration: Riemann step count, attribution
// baseline (empty = all-zero) and an optional output subset that overrides
// the policy's action mask.
struct IgConfig {
    std::size_t steps = 25;
    std::vector<double> baseline;
    std::optional<std::vector<std::size_t>> output_mask;

    void validate(const MlpPolicy& policy) const {
        if (steps < 1) throw InputError("integrated gradients needs at least one Riemann step");
        if (!baseline.empty() && baseline.size() != policy.input_dim)
            throw ComputeError("baseline length does not match policy input_dim");
        if (output_mask) {
            if (output_mask->empty()) throw InputError("output mask is empty");
            std::set<std::size_t> seen;
            for (std::size_t j : *output_mask) {
                if (j >= policy.output_dim)
                    throw ComputeError("output mask index " + std::to_string(j) + " out of range");
                if (!seen.insert(j).second)
                    throw ComputeError("output mask index " + std::to_string(j) + " repeated");
            }
        }
    }

    std::vector<double> resolved_baseline(std::size_t n) const {
        return baseline.empty() ? std::vector<double>(n, 0.0) : baseline;
    }

    std::vector<std::size_t> resolved_outputs(const MlpPolicy& policy) const {
        return output_mask ? *output_mask : policy.analysis_outputs();
    }
};

// Result for one timestep: the per-dimension attribution magnitudes plus the
// signed per-output terms, which are kept only so the completeness property
// can be checked.
struct IgResult {
    std::vector<double> attributions;   // length n
    Matrix signed_per_output;           // |outputs| x n
    std::vector<std::size_t> outputs;   // masked output indices, in row order
};

// Right-endpoint Riemann sum of input gradients along the straight path from
// the baseline to x, scaled by (x - baseline)/p. The per-dimension value is
// the sum of absolute signed terms over the masked outputs.
inline IgResult integrated_gradients(const MlpPolicy& policy, const std::vector<double>& x, const IgConfig& cfg) {
    cfg.validate(policy);
    detail::check_input(policy, x);
    const std::size_t n = policy.input_dim;
    const std::vector<double> baseline = cfg.resolved_baseline(n);

    IgResult result;
    result.outputs = cfg.resolved_outputs(policy);
    const std::size_t m = result.outputs.size();

    std::vector<double> delta(n);
    for (std::size_t i = 0; i < n; ++i) delta[i] = x[i] - baseline[i];

    Matrix grad_sum(m, n);
    std::vector<double> point(n);
    const double p = static_cast<double>(cfg.steps);
    for (std::size_t k = 1; k <= cfg.steps; ++k) {
        const double alpha = static_cast<double>(k) / p;
        for (std::size_t i = 0; i < n; ++i) point[i] = baseline[i] + alpha * delta[i];
        ForwardTrace trace = trace_forward(policy, point);
        Matrix jac = input_jacobian_rows(policy, trace, result.outputs);
        for (std::size_t e = 0; e < grad_sum.size(); ++e) grad_sum.data()[e] += jac.data()[e];
    }

    result.signed_per_output = Matrix(m, n);
    result.attributions.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const double term = delta[i] / p * grad_sum(r, i);
            result.signed_per_output(r, i) = term;
            result.attributions[i] += std::abs(term);
        }
    }
    for (double v : result.attributions)
        if (!std::isfinite(v)) throw ComputeError("non-finite attribution (non-finite gradient in policy)");
    return result;
}

// Raw, thresholded and normalized saliency over a whole trajectory.
struct SaliencyMap {
    Matrix raw;          // G, N x n
    double epsilon = 0.0;
    Matrix thresholded;  // max(G - epsilon, 0) where G > epsilon
    Matrix normalized;   // thresholded / max(thresholded), or all-zero
};

// Threshold-and-normalize step, separated from the gradient computation so
// tests can drive it with a hand-built raw matrix.
inline SaliencyMap postprocess_saliency(Matrix raw) {
    if (raw.rows() == 0 || raw.cols() == 0) throw ComputeError("empty saliency matrix");
    SaliencyMap map;
    double sum = 0.0;
    for (double v : raw.data()) sum += v;
    map.epsilon = sum / static_cast<double>(raw.size());

    map.thresholded = Matrix(raw.rows(), raw.cols());
    double peak = 0.0;
    for (std::size_t e = 0; e < raw.size(); ++e) {
        const double g = raw.data()[e];
        const double t = g > map.epsilon ? g - map.epsilon : 0.0;
        map.thresholded.data()[e] = t;
        peak = std::max(peak, t);
    }

    map.normalized = Matrix(raw.rows(), raw.cols());
    if (peak > 0.0)
        for (std::size_t e = 0; e < raw.size(); ++e) map.normalized.data()[e] = map.thresholded.data()[e] / peak;
    map.raw = std::move(raw);
    return map;
}

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

} // namespace detail

// Integrated gradients at every timestep followed by postprocessing.
// Per-timestep computations are independent; rows are assigned to threads in
// disjoint blocks, so the result does not depend on the schedule.
inline SaliencyMap saliency_pipeline(const MlpPolicy& policy, const Trajectory& trajectory, const IgConfig& cfg,
                                     unsigned threads = 0) {
    trajectory.validate();
    cfg.validate(policy);
    if (trajectory.state_dim() != policy.input_dim)
        throw InputError("trajectory state dim " + std::to_string(trajectory.state_dim()) +
                         " does not match policy input_dim " + std::to_string(policy.input_dim));
    const std::size_t rows = trajectory.timesteps();
    Matrix raw(rows, trajectory.state_dim());

    const unsigned n_threads = std::min<unsigned>(detail::resolve_threads(threads), static_cast<unsigned>(rows));
    auto run_rows = [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(trajectory.state_dim());
        for (std::size_t t = begin; t < end; ++t) {
            const double* src = trajectory.states.row(t);
            x.assign(src, src + trajectory.state_dim());
            IgResult ig = integrated_gradients(policy, x, cfg);
            for (std::size_t i = 0; i < x.size(); ++i) raw(t, i) = ig.attributions[i];
        }
    };

    if (n_threads <= 1) {
        run_rows(0, rows);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (unsigned w = 0; w < n_threads; ++w) {
            const std::size_t begin = rows * w / n_threads;
            const std::size_t end = rows * (w + 1) / n_threads;
            pool.emplace_back([&, begin, end] {
                try {
                    run_rows(begin, end);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    return postprocess_saliency(std::move(raw));
}

} // namespace saliency
