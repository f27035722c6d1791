#pragma once

#include <string>

#include <json.hpp>

#include "coevo/errors.hpp"
#include "coevo/nn.hpp"

namespace coevo {

/// Checkpoint form of a network: layer specs plus row-major weight arrays.
///
/// {
///   "layers": [{"in": 2, "out": 64, "activation": "leaky_relu", "slope": 0.2}, ...],
///   "weights": [[...out*in doubles, row-major...], ...],
///   "biases": [[...out doubles...], ...],
///   "prelu_slopes": [...one double per prelu layer, in layer order...]
/// }
inline nlohmann::json network_to_json(const NetworkParams& net) {
    nlohmann::json j;
    j["layers"] = nlohmann::json::array();
    for (const auto& l : net.layers)
        j["layers"].push_back({{"in", l.in_width},
                               {"out", l.out_width},
                               {"activation", activation_name(l.activation)},
                               {"slope", l.slope}});
    j["weights"] = nlohmann::json::array();
    for (const auto& w : net.weights) j["weights"].push_back(w.data);
    j["biases"] = nlohmann::json::array();
    for (const auto& b : net.biases) j["biases"].push_back(b);
    j["prelu_slopes"] = net.prelu_slopes;
    return j;
}

inline NetworkParams network_from_json(const nlohmann::json& j) {
    NetworkParams net;
    for (const auto& jl : j.at("layers")) {
        LayerSpec l(jl.at("in").get<std::size_t>(), jl.at("out").get<std::size_t>(),
                    activation_from_name(jl.at("activation").get<std::string>()),
                    jl.at("slope").get<double>());
        net.layers.push_back(l);
    }
    validate_layer_chain(net.layers);
    const auto& jw = j.at("weights");
    const auto& jb = j.at("biases");
    require(jw.size() == net.layers.size() && jb.size() == net.layers.size(),
            "network_from_json: layer count mismatch");
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Matrix w(net.layers[l].out_width, net.layers[l].in_width);
        const auto flat = jw.at(l).get<std::vector<double>>();
        require(flat.size() == w.data.size(), "network_from_json: weight size mismatch at layer " +
                                                  std::to_string(l));
        w.data = flat;
        net.weights.push_back(std::move(w));
        const auto bias = jb.at(l).get<std::vector<double>>();
        require(bias.size() == net.layers[l].out_width,
                "network_from_json: bias size mismatch at layer " + std::to_string(l));
        net.biases.push_back(bias);
    }
    net.prelu_slopes = j.value("prelu_slopes", std::vector<double>{});
    std::size_t want = 0;
    for (const auto& l : net.layers)
        if (l.activation == Activation::prelu) ++want;
    require(net.prelu_slopes.size() == want, "network_from_json: prelu slope count mismatch");
    require(net.all_finite(), "network_from_json: non-finite parameter");
    return net;
}

} // namespace coevo
