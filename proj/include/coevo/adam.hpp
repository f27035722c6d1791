#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "coevo/errors.hpp"
#include "coevo/nn.hpp"

namespace coevo {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        require(learning_rate > 0.0, "adam: learning_rate must be positive");
        require(beta1 > 0.0 && beta1 < 1.0, "adam: beta1 must lie in (0,1)");
        require(beta2 > 0.0 && beta2 < 1.0, "adam: beta2 must lie in (0,1)");
        require(epsilon > 0.0, "adam: epsilon must be positive");
    }
};

/// Adam moment estimates, shaped like the network's gradients.
struct AdamState {
    Gradients first_moment;
    Gradients second_moment;
    std::uint64_t step_count = 0;
    AdamConfig config;

    static AdamState for_network(const NetworkParams& net, const AdamConfig& cfg = {}) {
        cfg.validate();
        AdamState s;
        s.first_moment = Gradients::zeros_like(net);
        s.second_moment = Gradients::zeros_like(net);
        s.config = cfg;
        return s;
    }
};

namespace detail {

inline void adam_update_span(double* param, double* m, double* v, const double* g, std::size_t n,
                             const AdamConfig& c, double bc1, double bc2,
                             const std::string& group) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(g[i]))
            throw numeric_error("adam_step: non-finite gradient in " + group);
        m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
        v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
        if (!std::isfinite(param[i]))
            throw numeric_error("adam_step: non-finite parameter after update in " + group);
    }
}

} // namespace detail

/// One bias-corrected Adam step, in place. Throws numeric_error naming the
/// offending parameter group if a gradient (or resulting parameter) is not finite.
inline void adam_step(NetworkParams& net, const Gradients& grads, AdamState& state) {
    require(grads.weights.size() == net.weights.size() &&
                grads.biases.size() == net.biases.size() &&
                grads.prelu_slopes.size() == net.prelu_slopes.size(),
            "adam_step: gradient shape does not match network");

    state.step_count += 1;
    const AdamConfig& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_count));

    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        require(grads.weights[l].same_shape(net.weights[l]) &&
                    grads.biases[l].size() == net.biases[l].size(),
                "adam_step: layer " + std::to_string(l) + " gradient shape mismatch");
        detail::adam_update_span(net.weights[l].data.data(), state.first_moment.weights[l].data.data(),
                                 state.second_moment.weights[l].data.data(), grads.weights[l].data.data(),
                                 grads.weights[l].data.size(), c, bc1, bc2,
                                 "layer " + std::to_string(l) + " weights");
        detail::adam_update_span(net.biases[l].data(), state.first_moment.biases[l].data(),
                                 state.second_moment.biases[l].data(), grads.biases[l].data(),
                                 grads.biases[l].size(), c, bc1, bc2,
                                 "layer " + std::to_string(l) + " biases");
    }
    if (!net.prelu_slopes.empty())
        detail::adam_update_span(net.prelu_slopes.data(), state.first_moment.prelu_slopes.data(),
                                 state.second_moment.prelu_slopes.data(), grads.prelu_slopes.data(),
                                 grads.prelu_slopes.size(), c, bc1, bc2, "prelu slopes");
}

} // namespace coevo
