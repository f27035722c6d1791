#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coevo/errors.hpp"
#include "coevo/matrix.hpp"
#include "coevo/rng.hpp"

namespace coevo {

enum class Activation { identity, relu, leaky_relu, prelu, tanh_act, sigmoid };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::prelu: return "prelu";
        case Activation::tanh_act: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "identity") return Activation::identity;
    if (s == "relu") return Activation::relu;
    if (s == "leaky_relu") return Activation::leaky_relu;
    if (s == "prelu") return Activation::prelu;
    if (s == "tanh") return Activation::tanh_act;
    if (s == "sigmoid") return Activation::sigmoid;
    throw config_error("unknown activation: " + s);
}

// Fixed slope for leaky_relu; initial (trainable) slope for prelu.
inline constexpr double kLeakyReluSlope = 0.2;
inline constexpr double kPreluInitSlope = 0.25;

struct LayerSpec {
    std::size_t in_width = 0;
    std::size_t out_width = 0;
    Activation activation = Activation::identity;
    double slope = 0.0; // leaky_relu: fixed constant; prelu: initial value of the trainable scalar

    LayerSpec() = default;
    LayerSpec(std::size_t in, std::size_t out, Activation act, double sl = 0.0)
        : in_width(in), out_width(out), activation(act), slope(sl) {
        if (act == Activation::leaky_relu && sl == 0.0) slope = kLeakyReluSlope;
        if (act == Activation::prelu && sl == 0.0) slope = kPreluInitSlope;
    }
};

inline void validate_layer_chain(const std::vector<LayerSpec>& layers) {
    require(!layers.empty(), "network needs at least one layer");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        require(layers[l].in_width >= 1 && layers[l].out_width >= 1,
                "layer widths must be >= 1");
        if (l + 1 < layers.size())
            require(layers[l].out_width == layers[l + 1].in_width,
                    "layer " + std::to_string(l) + " out_width does not feed layer " +
                        std::to_string(l + 1));
    }
}

/// The full trainable state of one learner: the genome that co-evolution acts on.
/// Weights are (out_width x in_width); each prelu layer owns one scalar slope.
struct NetworkParams {
    std::vector<LayerSpec> layers;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> prelu_slopes; // one per prelu layer, in layer order

    std::size_t input_width() const { return layers.front().in_width; }
    std::size_t output_width() const { return layers.back().out_width; }

    /// Index into prelu_slopes for layer l, or npos if that layer is not prelu.
    std::size_t prelu_slot(std::size_t l) const {
        if (layers[l].activation != Activation::prelu) return static_cast<std::size_t>(-1);
        std::size_t slot = 0;
        for (std::size_t i = 0; i < l; ++i)
            if (layers[i].activation == Activation::prelu) ++slot;
        return slot;
    }

    std::size_t param_count() const {
        std::size_t n = prelu_slopes.size();
        for (std::size_t l = 0; l < layers.size(); ++l)
            n += weights[l].data.size() + biases[l].size();
        return n;
    }

    bool all_finite() const {
        for (const auto& w : weights)
            if (!w.all_finite()) return false;
        for (const auto& b : biases)
            for (double v : b)
                if (!std::isfinite(v)) return false;
        for (double v : prelu_slopes)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline bool operator==(const NetworkParams& a, const NetworkParams& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].in_width != b.layers[l].in_width ||
            a.layers[l].out_width != b.layers[l].out_width ||
            a.layers[l].activation != b.layers[l].activation ||
            a.layers[l].slope != b.layers[l].slope)
            return false;
    }
    return a.weights == b.weights && a.biases == b.biases && a.prelu_slopes == b.prelu_slopes;
}

/// Same-shape container for parameter gradients.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> prelu_slopes;

    static Gradients zeros_like(const NetworkParams& net) {
        Gradients g;
        g.weights.reserve(net.weights.size());
        for (const auto& w : net.weights) g.weights.emplace_back(w.rows, w.cols);
        for (const auto& b : net.biases) g.biases.emplace_back(b.size(), 0.0);
        g.prelu_slopes.assign(net.prelu_slopes.size(), 0.0);
        return g;
    }
};

/// Everything backward() needs: the input fed to each layer and each layer's
/// pre-activation. inputs[l+1] doubles as layer l's activated output.
struct ForwardCache {
    std::vector<Matrix> inputs;   // inputs[l] = what layer l consumed; inputs.back() = net output
    std::vector<Matrix> preacts;  // preacts[l] = X W^T + b before the nonlinearity
};

namespace detail {

inline void apply_activation(Matrix& z, Activation act, double slope) {
    switch (act) {
        case Activation::identity:
            return;
        case Activation::relu:
            for (double& v : z.data) v = v > 0.0 ? v : 0.0;
            return;
        case Activation::leaky_relu:
        case Activation::prelu:
            for (double& v : z.data) v = v > 0.0 ? v : slope * v;
            return;
        case Activation::tanh_act:
            for (double& v : z.data) v = std::tanh(v);
            return;
        case Activation::sigmoid:
            for (double& v : z.data) v = 1.0 / (1.0 + std::exp(-v));
            return;
    }
}

} // namespace detail

/// Glorot-uniform initialization: weights ~ U(-L, L) with L = sqrt(6/(in+out)),
/// biases zero, prelu slopes at their spec'd initial value. Bitwise reproducible
/// for a given (spec, seed).
inline NetworkParams init_network(const std::vector<LayerSpec>& spec, std::uint64_t seed) {
    validate_layer_chain(spec);
    NetworkParams net;
    net.layers = spec;
    SeededStream stream(seed);
    for (const auto& layer : spec) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.in_width + layer.out_width));
        Matrix w(layer.out_width, layer.in_width);
        for (double& v : w.data) v = (2.0 * stream.next_unit() - 1.0) * limit;
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(layer.out_width, 0.0);
        if (layer.activation == Activation::prelu) net.prelu_slopes.push_back(layer.slope);
    }
    return net;
}

/// Forward pass over a batch (rows = samples). Fills `cache` when given.
inline Matrix forward(const NetworkParams& net, const Matrix& batch, ForwardCache* cache = nullptr) {
    require(batch.cols == net.input_width(), "forward: batch width does not match first layer");
    if (cache) {
        cache->inputs.clear();
        cache->preacts.clear();
        cache->inputs.reserve(net.layers.size() + 1);
        cache->preacts.reserve(net.layers.size());
    }
    Matrix x = batch;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Matrix z = matmul_nt(x, net.weights[l]);
        add_row_vector(z, net.biases[l]);
        if (cache) {
            cache->inputs.push_back(std::move(x));
            cache->preacts.push_back(z);
        }
        const std::size_t slot = net.prelu_slot(l);
        const double slope =
            slot != static_cast<std::size_t>(-1) ? net.prelu_slopes[slot] : net.layers[l].slope;
        detail::apply_activation(z, net.layers[l].activation, slope);
        x = std::move(z);
    }
    if (cache) cache->inputs.push_back(x);
    return x;
}

/// Exact reverse-mode gradients for every weight, bias and prelu slope.
/// `output_grad` is dLoss/dOutput on the activated network output.
/// When `input_grad` is non-null it receives dLoss/dInput (needed to chain
/// a generator update through a discriminator).
inline Gradients backward(const NetworkParams& net, const ForwardCache& cache,
                          const Matrix& output_grad, Matrix* input_grad = nullptr) {
    const std::size_t n_layers = net.layers.size();
    require(cache.preacts.size() == n_layers && cache.inputs.size() == n_layers + 1,
            "backward: cache does not match this network");
    require(output_grad.same_shape(cache.inputs.back()),
            "backward: output_grad shape does not match cached output");
    for (std::size_t l = 0; l < n_layers; ++l)
        require(cache.inputs[l].cols == net.layers[l].in_width &&
                    cache.preacts[l].cols == net.layers[l].out_width,
                "backward: cache widths do not match this network (stale cache?)");

    Gradients grads = Gradients::zeros_like(net);
    Matrix delta = output_grad; // dLoss/d(activated output of layer l)

    for (std::size_t l = n_layers; l-- > 0;) {
        const Matrix& z = cache.preacts[l];
        const Matrix& y = cache.inputs[l + 1]; // activated output of layer l
        const std::size_t slot = net.prelu_slot(l);
        const double slope =
            slot != static_cast<std::size_t>(-1) ? net.prelu_slopes[slot] : net.layers[l].slope;

        // delta <- dLoss/dz
        switch (net.layers[l].activation) {
            case Activation::identity:
                break;
            case Activation::relu:
                for (std::size_t i = 0; i < delta.data.size(); ++i)
                    if (z.data[i] <= 0.0) delta.data[i] = 0.0;
                break;
            case Activation::leaky_relu:
                for (std::size_t i = 0; i < delta.data.size(); ++i)
                    if (z.data[i] <= 0.0) delta.data[i] *= slope;
                break;
            case Activation::prelu: {
                double slope_grad = 0.0;
                for (std::size_t i = 0; i < delta.data.size(); ++i) {
                    if (z.data[i] <= 0.0) {
                        slope_grad += delta.data[i] * z.data[i];
                        delta.data[i] *= slope;
                    }
                }
                grads.prelu_slopes[slot] = slope_grad;
                break;
            }
            case Activation::tanh_act:
                for (std::size_t i = 0; i < delta.data.size(); ++i)
                    delta.data[i] *= 1.0 - y.data[i] * y.data[i];
                break;
            case Activation::sigmoid:
                for (std::size_t i = 0; i < delta.data.size(); ++i)
                    delta.data[i] *= y.data[i] * (1.0 - y.data[i]);
                break;
        }

        grads.weights[l] = matmul_tn(delta, cache.inputs[l]);
        grads.biases[l] = column_sums(delta);
        if (l > 0) {
            delta = matmul(delta, net.weights[l]);
        } else if (input_grad) {
            *input_grad = matmul(delta, net.weights[0]);
        }
    }
    return grads;
}

} // namespace coevo
