#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "saliency/csv.hpp"
#include "saliency/errors.hpp"
#include "saliency/matrix.hpp"

namespace saliency {

enum class Activation { ReLU, Tanh, Identity };

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    return "identity";
}

inline Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity") return Activation::Identity;
    throw InputError("unknown activation '" + name + "'");
}

// One fully-connected layer: out = act(weights * in + biases).
struct LayerSpec {
    Matrix weights;              // out_dim x in_dim, row-major
    std::vector<double> biases;  // out_dim
    Activation activation = Activation::Identity;

    std::size_t in_dim() const { return weights.cols(); }
    std::size_t out_dim() const { return weights.rows(); }
};

// Feed-forward state-action mapping. Immutable after load; forward and
// input_jacobian are pure, so any number of threads may evaluate the same
// policy concurrently.
struct MlpPolicy {
    std::vector<LayerSpec> layers;
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    // Optional subset of outputs the analysis attributes over (e.g. the mean
    // head of a mean/stddev actor). Absent means all outputs.
    std::optional<std::vector<std::size_t>> action_mask;

    void validate() const {
        if (layers.empty()) throw InputError("policy has no layers");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& layer = layers[l];
            const std::string where = "layer " + std::to_string(l);
            if (layer.weights.rows() == 0 || layer.weights.cols() == 0)
                throw InputError(where + ": empty weight matrix");
            if (layer.weights.rows() != layer.biases.size())
                throw InputError(where + ": weight rows (" + std::to_string(layer.weights.rows()) +
                                 ") do not match bias length (" + std::to_string(layer.biases.size()) + ")");
            if (!layer.weights.all_finite())
                throw InputError(where + ": non-finite weight entry");
            for (double b : layer.biases)
                if (!std::isfinite(b)) throw InputError(where + ": non-finite bias entry");
            if (l > 0 && layer.in_dim() != layers[l - 1].out_dim())
                throw InputError(where + ": input width (" + std::to_string(layer.in_dim()) +
                                 ") does not chain with layer " + std::to_string(l - 1) +
                                 " output width (" + std::to_string(layers[l - 1].out_dim()) + ")");
        }
        if (input_dim != layers.front().in_dim())
            throw InputError("input_dim does not match first layer");
        if (output_dim != layers.back().out_dim())
            throw InputError("output_dim does not match last layer");
        if (action_mask) {
            if (action_mask->empty()) throw InputError("action_mask is empty");
            std::set<std::size_t> seen;
            for (std::size_t idx : *action_mask) {
                if (idx >= output_dim)
                    throw InputError("action_mask index " + std::to_string(idx) + " out of range");
                if (!seen.insert(idx).second)
                    throw InputError("action_mask index " + std::to_string(idx) + " repeated");
            }
        }
    }

    // Output indices the analysis operates on: the action mask if present,
    // otherwise every output.
    std::vector<std::size_t> analysis_outputs() const {
        if (action_mask) return *action_mask;
        std::vector<std::size_t> all(output_dim);
        for (std::size_t j = 0; j < output_dim; ++j) all[j] = j;
        return all;
    }
};

namespace detail {

inline void check_input(const MlpPolicy& policy, const std::vector<double>& x) {
    if (x.size() != policy.input_dim)
        throw ComputeError("input length " + std::to_string(x.size()) + " does not match policy input_dim " +
                           std::to_string(policy.input_dim));
    for (double v : x)
        if (!std::isfinite(v)) throw ComputeError("non-finite input entry");
}

inline void affine(const LayerSpec& layer, const std::vector<double>& in, std::vector<double>& out) {
    out.assign(layer.out_dim(), 0.0);
    for (std::size_t o = 0; o < layer.out_dim(); ++o) {
        const double* w = layer.weights.row(o);
        double acc = layer.biases[o];
        for (std::size_t i = 0; i < in.size(); ++i) acc += w[i] * in[i];
        out[o] = acc;
    }
}

} // namespace detail

// Per-layer pre- and post-activation values of one forward pass; the
// backward sweep and the kink checks in tests both consume it.
struct ForwardTrace {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;

    const std::vector<double>& output() const { return post.back(); }
};

inline ForwardTrace trace_forward(const MlpPolicy& policy, const std::vector<double>& x) {
    detail::check_input(policy, x);
    ForwardTrace trace;
    trace.pre.resize(policy.layers.size());
    trace.post.resize(policy.layers.size());
    const std::vector<double>* cur = &x;
    for (std::size_t l = 0; l < policy.layers.size(); ++l) {
        const auto& layer = policy.layers[l];
        detail::affine(layer, *cur, trace.pre[l]);
        trace.post[l] = trace.pre[l];
        switch (layer.activation) {
            case Activation::ReLU:
                for (double& v : trace.post[l]) v = v > 0.0 ? v : 0.0;
                break;
            case Activation::Tanh:
                for (double& v : trace.post[l]) v = std::tanh(v);
                break;
            case Activation::Identity:
                break;
        }
        cur = &trace.post[l];
    }
    return trace;
}

// Full network output Y (no mask applied).
inline std::vector<double> forward(const MlpPolicy& policy, const std::vector<double>& x) {
    return trace_forward(policy, x).output();
}

// Activation derivative under the conventions used throughout: the ReLU
// subgradient at exactly 0 is 0, tanh' = 1 - tanh^2 (from the post value).
namespace detail {

inline double activation_derivative(Activation a, double pre, double post) {
    switch (a) {
        case Activation::ReLU: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - post * post;
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

} // namespace detail

// Jacobian of selected outputs with respect to the input, by reverse
// accumulation: one backward sweep per requested output row. Row order
// follows `outputs`.
inline Matrix input_jacobian_rows(const MlpPolicy& policy, const ForwardTrace& trace,
                                  const std::vector<std::size_t>& outputs) {
    const std::size_t n = policy.input_dim;
    const std::size_t depth = policy.layers.size();
    Matrix jac(outputs.size(), n);
    std::vector<double> grad, prev;
    for (std::size_t row = 0; row < outputs.size(); ++row) {
        const std::size_t j = outputs[row];
        if (j >= policy.output_dim)
            throw ComputeError("output index " + std::to_string(j) + " out of range");
        grad.assign(policy.output_dim, 0.0);
        grad[j] = 1.0;
        for (std::size_t l = depth; l-- > 0;) {
            const auto& layer = policy.layers[l];
            for (std::size_t o = 0; o < layer.out_dim(); ++o)
                grad[o] *= detail::activation_derivative(layer.activation, trace.pre[l][o], trace.post[l][o]);
            prev.assign(layer.in_dim(), 0.0);
            for (std::size_t o = 0; o < layer.out_dim(); ++o) {
                const double g = grad[o];
                if (g == 0.0) continue;
                const double* w = layer.weights.row(o);
                for (std::size_t i = 0; i < layer.in_dim(); ++i) prev[i] += w[i] * g;
            }
            grad = std::move(prev);
        }
        for (std::size_t i = 0; i < n; ++i) jac(row, i) = grad[i];
    }
    return jac;
}

inline Matrix input_jacobian(const MlpPolicy& policy, const std::vector<double>& x,
                             const std::optional<std::vector<std::size_t>>& mask = std::nullopt) {
    ForwardTrace trace = trace_forward(policy, x);
    std::vector<std::size_t> outputs;
    if (mask) {
        outputs = *mask;
    } else {
        outputs.resize(policy.output_dim);
        for (std::size_t j = 0; j < policy.output_dim; ++j) outputs[j] = j;
    }
    return input_jacobian_rows(policy, trace, outputs);
}

// Forward-mode pass: output values together with the directional derivative
// J(x) * dx for every output, in one sweep.
inline std::pair<std::vector<double>, std::vector<double>>
forward_with_tangent(const MlpPolicy& policy, const std::vector<double>& x, const std::vector<double>& dx) {
    detail::check_input(policy, x);
    if (dx.size() != policy.input_dim) throw ComputeError("tangent length does not match policy input_dim");
    std::vector<double> value = x, tangent = dx, next_v, next_t;
    for (const auto& layer : policy.layers) {
        detail::affine(layer, value, next_v);
        next_t.assign(layer.out_dim(), 0.0);
        for (std::size_t o = 0; o < layer.out_dim(); ++o) {
            const double* w = layer.weights.row(o);
            double acc = 0.0;
            for (std::size_t i = 0; i < tangent.size(); ++i) acc += w[i] * tangent[i];
            next_t[o] = acc;
        }
        for (std::size_t o = 0; o < layer.out_dim(); ++o) {
            const double pre = next_v[o];
            double post = pre;
            switch (layer.activation) {
                case Activation::ReLU: post = pre > 0.0 ? pre : 0.0; break;
                case Activation::Tanh: post = std::tanh(pre); break;
                case Activation::Identity: break;
            }
            next_t[o] *= detail::activation_derivative(layer.activation, pre, post);
            next_v[o] = post;
        }
        value = std::move(next_v);
        tangent = std::move(next_t);
    }
    return {std::move(value), std::move(tangent)};
}

// ---------------------------------------------------------------------------
// Weight file format: JSON object
//   {"layers":[{"weights":[[...]],"biases":[...],"activation":"relu|tanh|identity"}],
//    "action_mask":[ints]?}
// Weights are row-major; all dimensions are implied by array shapes.
// ---------------------------------------------------------------------------

inline MlpPolicy policy_from_json(const nlohmann::json& doc) {
    MlpPolicy policy;
    if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array())
        throw InputError("weight file must be an object with a 'layers' array");
    for (std::size_t l = 0; l < doc["layers"].size(); ++l) {
        const auto& jl = doc["layers"][l];
        const std::string where = "layer " + std::to_string(l);
        if (!jl.contains("weights") || !jl["weights"].is_array() || jl["weights"].empty())
            throw InputError(where + ": missing weights");
        if (!jl.contains("biases") || !jl["biases"].is_array())
            throw InputError(where + ": missing biases");
        if (!jl.contains("activation") || !jl["activation"].is_string())
            throw InputError(where + ": missing activation");
        std::vector<std::vector<double>> rows;
        rows.reserve(jl["weights"].size());
        for (const auto& jrow : jl["weights"]) {
            if (!jrow.is_array()) throw InputError(where + ": weights must be an array of rows");
            rows.push_back(jrow.get<std::vector<double>>());
        }
        LayerSpec layer;
        try {
            layer.weights = Matrix::from_rows(rows);
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
        layer.biases = jl["biases"].get<std::vector<double>>();
        layer.activation = activation_from_name(jl["activation"].get<std::string>());
        policy.layers.push_back(std::move(layer));
    }
    policy.input_dim = policy.layers.front().in_dim();
    policy.output_dim = policy.layers.back().out_dim();
    if (doc.contains("action_mask")) {
        if (!doc["action_mask"].is_array()) throw InputError("action_mask must be an array of indices");
        policy.action_mask = doc["action_mask"].get<std::vector<std::size_t>>();
    }
    policy.validate();
    return policy;
}

inline nlohmann::json policy_to_json(const MlpPolicy& policy) {
    nlohmann::json doc;
    doc["layers"] = nlohmann::json::array();
    for (const auto& layer : policy.layers) {
        nlohmann::json jl;
        jl["activation"] = activation_name(layer.activation);
        jl["biases"] = layer.biases;
        auto rows = nlohmann::json::array();
        for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
            auto row = nlohmann::json::array();
            for (std::size_t c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
            rows.push_back(std::move(row));
        }
        jl["weights"] = std::move(rows);
        doc["layers"].push_back(std::move(jl));
    }
    if (policy.action_mask) doc["action_mask"] = *policy.action_mask;
    return doc;
}

inline MlpPolicy load_policy(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("cannot parse weight file " + path.string() + ": " + e.what());
    }
    return policy_from_json(doc);
}

inline void save_policy(const MlpPolicy& policy, const std::filesystem::path& path) {
    write_text_file(path, policy_to_json(policy).dump(2) + "\n");
}

} // namespace saliency
