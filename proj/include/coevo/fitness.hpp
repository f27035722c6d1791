#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coevo/errors.hpp"

namespace coevo {

/// Weibull fitness model parameters. k is the shape ("effective phenotype
/// dimensions"), a the autoimmunity factor, v the viral reproduction factor.
/// The scale lambda defaults to 1 (the fitness formulas pass a bare distance).
struct FitnessParams {
    double k = 2.0;
    double lambda = 1.0;
    double a = 1.0;
    double v = 1.5;
    double infection_threshold = 1.0;
    double host_floor_frac = 0.01;      // of the maximal host fitness (1.0)
    double pathogen_floor_frac = 0.0025; // of the maximal pathogen fitness (v)
    double deficit_threshold = 0.05;

    void validate() const {
        require(k > 0.0 && lambda > 0.0 && a > 0.0 && v > 0.0,
                "fitness: k, lambda, a, v must be positive");
        require(host_floor_frac > 0.0 && host_floor_frac < 1.0,
                "fitness: host_floor_frac must lie in (0,1)");
        require(pathogen_floor_frac > 0.0 && pathogen_floor_frac < 1.0,
                "fitness: pathogen_floor_frac must lie in (0,1)");
        require(std::isfinite(infection_threshold) && std::isfinite(deficit_threshold),
                "fitness: thresholds must be finite");
    }
};

/// Weibull CDF: 1 - exp(-(x/lambda)^k), for x >= 0.
inline double weibull_cdf(double k, double lambda, double x) {
    require(k > 0.0 && lambda > 0.0, "weibull_cdf: k and lambda must be positive");
    require(x >= 0.0, "weibull_cdf: x must be non-negative");
    return 1.0 - std::exp(-std::pow(x / lambda, k));
}

namespace detail {

inline void require_error_range(double e, const char* what) {
    require(e >= 0.0 && e <= 1.0, std::string(what) + " must lie in [0,1]");
}

} // namespace detail

/// Host fitness: 1 - WeibullCDF(k, sqrt(a^2 err_real^2 + sum_i v^2 err_gen_i^2)),
/// floored at host_floor_frac of the maximal fitness 1. Independent pathogen
/// loads combine in quadrature inside the CDF argument; with no infections only
/// the autoimmunity term remains.
inline double host_fitness(double err_real, std::span<const double> gen_errors,
                           const FitnessParams& p) {
    detail::require_error_range(err_real, "host_fitness: err_real");
    double load2 = p.a * p.a * err_real * err_real;
    for (double eg : gen_errors) {
        detail::require_error_range(eg, "host_fitness: err_gen");
        load2 += p.v * p.v * eg * eg;
    }
    const double f = 1.0 - weibull_cdf(p.k, p.lambda, std::sqrt(load2));
    return std::max(f, p.host_floor_frac);
}

/// Pathogen fitness: v * WeibullCDF(k, v * err_gen), floored at
/// pathogen_floor_frac of the maximal fitness v.
inline double pathogen_fitness(double err_gen, const FitnessParams& p) {
    detail::require_error_range(err_gen, "pathogen_fitness: err_gen");
    const double f = p.v * weibull_cdf(p.k, p.lambda, p.v * err_gen);
    return std::max(f, p.pathogen_floor_frac * p.v);
}

/// Which pathogens currently burden a host, with the err_gen each showed at its
/// last evaluation. A pathogen is present iff its within-host fitness exceeded
/// the infection threshold at that evaluation.
struct InfectionState {
    int host_id = -1;
    std::map<int, double> infecting; // pathogen id -> last measured err_gen

    std::vector<double> gen_errors() const {
        std::vector<double> e;
        e.reserve(infecting.size());
        for (const auto& [id, eg] : infecting) e.push_back(eg);
        return e;
    }

    /// Loads with one pathogen excluded: the marginal-deficit baseline.
    std::vector<double> gen_errors_excluding(int pathogen_id) const {
        std::vector<double> e;
        e.reserve(infecting.size());
        for (const auto& [id, eg] : infecting)
            if (id != pathogen_id) e.push_back(eg);
        return e;
    }
};

/// Add, refresh or remove a pathogen from the host's infection registry based
/// on its freshly measured err_gen. Idempotent for a fixed err_gen.
inline void update_infection(InfectionState& state, int pathogen_id, double err_gen,
                             const FitnessParams& p) {
    if (pathogen_fitness(err_gen, p) > p.infection_threshold)
        state.infecting[pathogen_id] = err_gen;
    else
        state.infecting.erase(pathogen_id);
}

/// The 5% learning-deficit rule: the host trains against the pathogen only if
/// the fitness deficit the pathogen imparts is at least deficit_threshold
/// (boundary inclusive). Below it, the schedule skips the discriminator update.
inline bool should_train_host(double host_fitness_without, double host_fitness_with,
                              const FitnessParams& p) {
    require(host_fitness_without >= 0.0 && host_fitness_without <= 1.0 &&
                host_fitness_with >= 0.0 && host_fitness_with <= 1.0,
            "should_train_host: fitness values must lie in [0,1]");
    return (host_fitness_without - host_fitness_with) >= p.deficit_threshold;
}

} // namespace coevo
