#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coevo/adversarial.hpp"
#include "coevo/data.hpp"
#include "coevo/errors.hpp"
#include "coevo/fitness.hpp"
#include "coevo/propagation.hpp"

namespace coevo {

struct MethodConfig {
    std::string name;
    StructureSpec structure;
};

/// The whole experiment, one JSON document with a section per module.
struct ExperimentConfig {
    std::vector<MethodConfig> methods;
    int runs_per_method = 5;
    std::uint64_t base_seed = 1;
    FitnessParams fitness;
    TrainingConfig training;
    MixtureSpec mixture;
    EvalConfig eval;
    std::string output_dir = "out";

    std::string raw_text; // original file bytes, copied verbatim into run dirs

    const MethodConfig* find_method(const std::string& name) const {
        for (const auto& m : methods)
            if (m.name == name) return &m;
        return nullptr;
    }

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig defaults();
    nlohmann::json to_json() const;
};

namespace cfgdetail {

using nlohmann::json;

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                                const std::string& where, std::vector<std::string>& errors) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) errors.push_back(where + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
inline void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline void parse_optimizer(const json& j, AdamConfig& out, const std::string& where,
                            std::vector<std::string>& errors) {
    reject_unknown_keys(j, {"learning_rate", "beta1", "beta2", "epsilon"}, where, errors);
    read_field(j, "learning_rate", out.learning_rate);
    read_field(j, "beta1", out.beta1);
    read_field(j, "beta2", out.beta2);
    read_field(j, "epsilon", out.epsilon);
}

inline StructureSpec parse_structure(const json& j, const std::string& where,
                                     std::vector<std::string>& errors) {
    if (!j.contains("kind")) {
        errors.push_back(where + ": missing 'kind'");
        return StructureSpec{};
    }
    StructureSpec s = StructureSpec::defaults_for(structure_kind_from_name(j.at("kind").get<std::string>()));
    reject_unknown_keys(j,
                        {"name", "kind", "hosts_per_population", "n_pathogens", "n_populations",
                         "extra_rounds", "evo_epochs_per_step", "epoch_budget", "rng_seed"},
                        where, errors);
    read_field(j, "hosts_per_population", s.hosts_per_population);
    read_field(j, "n_pathogens", s.n_pathogens);
    read_field(j, "n_populations", s.n_populations);
    read_field(j, "extra_rounds", s.extra_rounds);
    read_field(j, "evo_epochs_per_step", s.evo_epochs_per_step);
    read_field(j, "epoch_budget", s.epoch_budget);
    read_field(j, "rng_seed", s.rng_seed);
    return s;
}

} // namespace cfgdetail

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    using cfgdetail::read_field;
    std::vector<std::string> errors;
    ExperimentConfig c;

    cfgdetail::reject_unknown_keys(j,
                                   {"methods", "runs_per_method", "base_seed", "fitness",
                                    "training", "mixture", "eval", "output_dir"},
                                   "config", errors);

    read_field(j, "runs_per_method", c.runs_per_method);
    read_field(j, "base_seed", c.base_seed);
    read_field(j, "output_dir", c.output_dir);
    if (c.runs_per_method < 1) errors.push_back("config: runs_per_method must be >= 1");

    if (j.contains("methods")) {
        for (std::size_t i = 0; i < j.at("methods").size(); ++i) {
            const auto& jm = j.at("methods").at(i);
            const std::string where = "methods[" + std::to_string(i) + "]";
            try {
                MethodConfig m;
                m.structure = cfgdetail::parse_structure(jm, where, errors);
                m.name = jm.value("name", std::string(structure_kind_name(m.structure.kind)));
                for (const auto& prev : c.methods)
                    if (prev.name == m.name)
                        errors.push_back(where + ": duplicate method name '" + m.name + "'");
                c.methods.push_back(std::move(m));
            } catch (const std::exception& e) {
                errors.push_back(where + ": " + e.what());
            }
        }
    }
    if (c.methods.empty()) errors.push_back("config: at least one method is required");

    if (j.contains("fitness")) {
        const auto& jf = j.at("fitness");
        cfgdetail::reject_unknown_keys(jf,
                                       {"k", "lambda", "a", "v", "infection_threshold",
                                        "host_floor_frac", "pathogen_floor_frac",
                                        "deficit_threshold"},
                                       "fitness", errors);
        read_field(jf, "k", c.fitness.k);
        read_field(jf, "lambda", c.fitness.lambda);
        read_field(jf, "a", c.fitness.a);
        read_field(jf, "v", c.fitness.v);
        read_field(jf, "infection_threshold", c.fitness.infection_threshold);
        read_field(jf, "host_floor_frac", c.fitness.host_floor_frac);
        read_field(jf, "pathogen_floor_frac", c.fitness.pathogen_floor_frac);
        read_field(jf, "deficit_threshold", c.fitness.deficit_threshold);
    }

    if (j.contains("training")) {
        const auto& jt = j.at("training");
        cfgdetail::reject_unknown_keys(
            jt, {"batch_size", "batches_per_epoch", "latent_dim", "discriminator_opt", "generator_opt"},
            "training", errors);
        read_field(jt, "batch_size", c.training.batch_size);
        read_field(jt, "batches_per_epoch", c.training.batches_per_epoch);
        read_field(jt, "latent_dim", c.training.latent_dim);
        if (jt.contains("discriminator_opt"))
            cfgdetail::parse_optimizer(jt.at("discriminator_opt"), c.training.discriminator_opt,
                                       "training.discriminator_opt", errors);
        if (jt.contains("generator_opt"))
            cfgdetail::parse_optimizer(jt.at("generator_opt"), c.training.generator_opt,
                                       "training.generator_opt", errors);
    }

    if (j.contains("mixture")) {
        const auto& jm = j.at("mixture");
        cfgdetail::reject_unknown_keys(jm, {"n_modes", "layout", "extent", "mode_std", "weights"},
                                       "mixture", errors);
        read_field(jm, "n_modes", c.mixture.n_modes);
        if (jm.contains("layout")) c.mixture.layout = layout_from_name(jm.at("layout").get<std::string>());
        read_field(jm, "extent", c.mixture.extent);
        read_field(jm, "mode_std", c.mixture.mode_std);
        read_field(jm, "weights", c.mixture.weights);
    }

    if (j.contains("eval")) {
        const auto& je = j.at("eval");
        cfgdetail::reject_unknown_keys(je, {"n_eval", "cadence"}, "eval", errors);
        read_field(je, "n_eval", c.eval.n_eval);
        read_field(je, "cadence", c.eval.cadence);
    }

    // Section-level validation, collecting every problem before reporting.
    auto check = [&errors](auto&& fn, const char* what) {
        try {
            fn();
        } catch (const std::exception& e) {
            errors.push_back(std::string(what) + ": " + e.what());
        }
    };
    check([&] { c.fitness.validate(); }, "fitness");
    check([&] { c.training.validate(); }, "training");
    check([&] { c.mixture.validate(); }, "mixture");
    check([&] { c.eval.validate(); }, "eval");
    for (const auto& m : c.methods)
        check([&] { m.structure.validate(); }, m.name.c_str());

    if (!errors.empty()) {
        std::ostringstream msg;
        msg << "invalid configuration (" << errors.size() << " problem"
            << (errors.size() == 1 ? "" : "s") << "):";
        for (const auto& e : errors) msg << "\n  - " << e;
        throw config_error(msg.str());
    }
    return c;
}

inline ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw config_error("config is not valid JSON (" + path + "): " + e.what());
    }
    ExperimentConfig c = from_json(j);
    c.raw_text = std::move(text);
    return c;
}

inline nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["runs_per_method"] = runs_per_method;
    j["base_seed"] = base_seed;
    j["output_dir"] = output_dir;
    for (const auto& m : methods) {
        nlohmann::json jm;
        jm["name"] = m.name;
        jm["kind"] = structure_kind_name(m.structure.kind);
        jm["hosts_per_population"] = m.structure.hosts_per_population;
        jm["n_pathogens"] = m.structure.n_pathogens;
        jm["n_populations"] = m.structure.n_populations;
        jm["extra_rounds"] = m.structure.extra_rounds;
        jm["evo_epochs_per_step"] = m.structure.evo_epochs_per_step;
        jm["epoch_budget"] = m.structure.budget();
        j["methods"].push_back(jm);
    }
    j["fitness"] = {{"k", fitness.k},
                    {"lambda", fitness.lambda},
                    {"a", fitness.a},
                    {"v", fitness.v},
                    {"infection_threshold", fitness.infection_threshold},
                    {"host_floor_frac", fitness.host_floor_frac},
                    {"pathogen_floor_frac", fitness.pathogen_floor_frac},
                    {"deficit_threshold", fitness.deficit_threshold}};
    j["training"] = {{"batch_size", training.batch_size},
                     {"batches_per_epoch", training.batches_per_epoch},
                     {"latent_dim", training.latent_dim},
                     {"discriminator_opt",
                      {{"learning_rate", training.discriminator_opt.learning_rate},
                       {"beta1", training.discriminator_opt.beta1},
                       {"beta2", training.discriminator_opt.beta2},
                       {"epsilon", training.discriminator_opt.epsilon}}},
                     {"generator_opt",
                      {{"learning_rate", training.generator_opt.learning_rate},
                       {"beta1", training.generator_opt.beta1},
                       {"beta2", training.generator_opt.beta2},
                       {"epsilon", training.generator_opt.epsilon}}}};
    j["mixture"] = {{"n_modes", mixture.n_modes},
                    {"layout", layout_name(mixture.layout)},
                    {"extent", mixture.extent},
                    {"mode_std", mixture.mode_std}};
    if (!mixture.weights.empty()) j["mixture"]["weights"] = mixture.weights;
    j["eval"] = {{"n_eval", eval.n_eval}, {"cadence", eval.cadence}};
    return j;
}

/// The standard six-method experiment at paper-default budgets.
inline ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    for (StructureKind k :
         {StructureKind::standard_rr, StructureKind::stochastic_rr, StructureKind::jump_rr,
          StructureKind::hetero_jump_rr, StructureKind::evolution_hetero, StructureKind::reference})
        c.methods.push_back({structure_kind_name(k), StructureSpec::defaults_for(k)});
    return c;
}

} // namespace coevo
