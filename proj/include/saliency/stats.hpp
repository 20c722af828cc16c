#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "saliency/errors.hpp"
#include "saliency/matrix.hpp"
#include "saliency/schema.hpp"
#include "saliency/trajectory.hpp"

namespace saliency {

// ---------------------------------------------------------------------------
// Correlation structure
// ---------------------------------------------------------------------------

// Absolute Pearson correlation between every pair of state dimensions.
// Zero-variance dimensions (detected as min == max) correlate 0 with
// everything and 1 with themselves; a warning is recorded when a sink is
// provided.
inline Matrix pearson_abs_matrix(const Matrix& states, std::vector<std::string>* warnings = nullptr) {
    const std::size_t rows = states.rows();
    const std::size_t n = states.cols();
    if (rows < 2) throw ComputeError("Pearson correlation needs at least 2 timesteps");

    std::vector<double> mean(n, 0.0), sdev(n, 0.0);
    std::vector<bool> constant(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        double lo = states(0, i), hi = states(0, i), sum = 0.0;
        for (std::size_t t = 0; t < rows; ++t) {
            const double v = states(t, i);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        mean[i] = sum / static_cast<double>(rows);
        if (lo == hi) {
            constant[i] = true;
            if (warnings)
                warnings->push_back("dim " + std::to_string(i) + " has zero variance; correlations set to 0");
            continue;
        }
        double ss = 0.0;
        for (std::size_t t = 0; t < rows; ++t) {
            const double d = states(t, i) - mean[i];
            ss += d * d;
        }
        sdev[i] = std::sqrt(ss);
    }

    Matrix corr(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        corr(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double value = 0.0;
            if (!constant[i] && !constant[j]) {
                double cov = 0.0;
                for (std::size_t t = 0; t < rows; ++t)
                    cov += (states(t, i) - mean[i]) * (states(t, j) - mean[j]);
                value = std::abs(cov / (sdev[i] * sdev[j]));
                value = std::min(value, 1.0);  // guard rounding past 1
            }
            corr(i, j) = value;
            corr(j, i) = value;
        }
    }
    return corr;
}

inline Matrix pearson_abs_matrix(const Trajectory& trajectory, std::vector<std::string>* warnings = nullptr) {
    return pearson_abs_matrix(trajectory.states, warnings);
}

// Group-level correlation: mean |r| over all dim pairs (i in a, j in b) with
// i != j. Groups with no eligible pair (single-dim diagonal) get 0.
inline Matrix group_correlation(const Matrix& dim_matrix, const StateSchema& schema) {
    require_valid_schema(schema, dim_matrix.cols());
    const std::size_t g = schema.groups.size();
    Matrix out(g, g);
    for (std::size_t a = 0; a < g; ++a) {
        for (std::size_t b = a; b < g; ++b) {
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t i : schema.groups[a].dims) {
                for (std::size_t j : schema.groups[b].dims) {
                    if (i == j) continue;
                    sum += dim_matrix(i, j);
                    ++count;
                }
            }
            const double value = count > 0 ? sum / static_cast<double>(count) : 0.0;
            out(a, b) = value;
            out(b, a) = value;
        }
    }
    return out;
}

struct ChordLink {
    std::string a;
    std::string b;
    double value = 0.0;
};

// Off-diagonal links at or above the threshold, strongest first. Ties keep
// group order for deterministic output.
inline std::vector<ChordLink> chord_filter(const Matrix& group_matrix, const std::vector<std::string>& names,
                                           double threshold = 0.25) {
    if (group_matrix.rows() != group_matrix.cols() || group_matrix.rows() != names.size())
        throw InputError("group matrix and name list sizes disagree");
    std::vector<ChordLink> links;
    for (std::size_t a = 0; a < names.size(); ++a)
        for (std::size_t b = a + 1; b < names.size(); ++b)
            if (group_matrix(a, b) >= threshold) links.push_back({names[a], names[b], group_matrix(a, b)});
    std::stable_sort(links.begin(), links.end(),
                     [](const ChordLink& x, const ChordLink& y) { return x.value > y.value; });
    return links;
}

// ---------------------------------------------------------------------------
// Distribution statistics across trials
// ---------------------------------------------------------------------------

struct BoxStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::vector<double> outliers;  // ascending
};

namespace detail {

// Quantile by linear interpolation between closest order statistics.
inline double interpolated_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace detail

// Quartiles by linear interpolation; outliers beyond 1.5*IQR from the
// quartiles; whiskers at the extreme non-outlier values. When every sample
// on one side is flagged (interpolated quartiles can pass all data in tiny
// samples), the whisker clamps to the box edge so the ordering chain
// whisker_low <= q1 <= median <= q3 <= whisker_high always holds.
inline BoxStats box_stats(std::vector<double> samples) {
    if (samples.empty()) throw ComputeError("box stats need at least one sample");
    std::sort(samples.begin(), samples.end());
    BoxStats stats;
    stats.median = detail::interpolated_quantile(samples, 0.50);
    stats.q1 = detail::interpolated_quantile(samples, 0.25);
    stats.q3 = detail::interpolated_quantile(samples, 0.75);
    const double iqr = stats.q3 - stats.q1;
    const double fence_low = stats.q1 - 1.5 * iqr;
    const double fence_high = stats.q3 + 1.5 * iqr;
    stats.whisker_low = stats.q1;
    stats.whisker_high = stats.q3;
    for (double v : samples) {
        if (v < fence_low || v > fence_high) {
            stats.outliers.push_back(v);
        } else {
            stats.whisker_low = std::min(stats.whisker_low, v);
            stats.whisker_high = std::max(stats.whisker_high, v);
        }
    }
    return stats;
}

} // namespace saliency
