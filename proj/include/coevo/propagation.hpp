#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "coevo/adversarial.hpp"
#include "coevo/errors.hpp"
#include "coevo/fitness.hpp"

namespace coevo {

enum class StructureKind {
    standard_rr,
    stochastic_rr,
    jump_rr,
    hetero_jump_rr,
    evolution_hetero,
    reference
};

inline const char* structure_kind_name(StructureKind k) {
    switch (k) {
        case StructureKind::standard_rr: return "standard_rr";
        case StructureKind::stochastic_rr: return "stochastic_rr";
        case StructureKind::jump_rr: return "jump_rr";
        case StructureKind::hetero_jump_rr: return "hetero_jump_rr";
        case StructureKind::evolution_hetero: return "evolution_hetero";
        case StructureKind::reference: return "reference";
    }
    return "?";
}

inline StructureKind structure_kind_from_name(const std::string& s) {
    if (s == "standard_rr") return StructureKind::standard_rr;
    if (s == "stochastic_rr") return StructureKind::stochastic_rr;
    if (s == "jump_rr") return StructureKind::jump_rr;
    if (s == "hetero_jump_rr") return StructureKind::hetero_jump_rr;
    if (s == "evolution_hetero") return StructureKind::evolution_hetero;
    if (s == "reference") return StructureKind::reference;
    throw config_error("unknown propagation structure: " + s);
}

/// A propagation structure and its population sizes. `evo_epochs_per_step`
/// serves triple duty: evolutionary epochs per population step, the stochastic
/// round-robin's randomized-phase length, and the reference baseline's epochs
/// per pair. `extra_rounds` is the extra full cross-matches granted to the
/// last population (jump kinds) or to the single population (standard_rr).
struct StructureSpec {
    StructureKind kind = StructureKind::standard_rr;
    int hosts_per_population = 5;
    int n_pathogens = 5;
    int n_populations = 1;
    int extra_rounds = 2;
    int evo_epochs_per_step = 0;
    std::uint64_t epoch_budget = 0; // 0 = take the closed form
    std::uint64_t rng_seed = 0;     // filled with the run seed at execution time

    static StructureSpec defaults_for(StructureKind kind) {
        StructureSpec s;
        s.kind = kind;
        switch (kind) {
            case StructureKind::standard_rr:
                break; // 5x5, 3 rounds, 75 epochs
            case StructureKind::stochastic_rr:
                s.extra_rounds = 0;
                s.evo_epochs_per_step = 50; // 25 + 50 = 75
                break;
            case StructureKind::jump_rr:
            case StructureKind::hetero_jump_rr:
                s.n_populations = 3; // 25 * (3 + 2) = 125
                break;
            case StructureKind::evolution_hetero:
                s.hosts_per_population = 3;
                s.n_pathogens = 4;
                s.n_populations = 3;
                s.extra_rounds = 0;
                s.evo_epochs_per_step = 12; // 3 * (12 + 12) = 72
                break;
            case StructureKind::reference:
                s.hosts_per_population = 10;
                s.n_pathogens = 10;
                s.extra_rounds = 0;
                s.evo_epochs_per_step = 15; // 10 * 15 = 150
                break;
        }
        return s;
    }

    std::uint64_t expected_budget() const {
        const std::uint64_t h = static_cast<std::uint64_t>(hosts_per_population);
        const std::uint64_t p = static_cast<std::uint64_t>(n_pathogens);
        switch (kind) {
            case StructureKind::standard_rr:
                return (1ull + extra_rounds) * h * p;
            case StructureKind::stochastic_rr:
                return h * p + static_cast<std::uint64_t>(evo_epochs_per_step);
            case StructureKind::jump_rr:
            case StructureKind::hetero_jump_rr:
                return h * p * (static_cast<std::uint64_t>(n_populations) + extra_rounds);
            case StructureKind::evolution_hetero:
                return static_cast<std::uint64_t>(n_populations) *
                       (h * p + static_cast<std::uint64_t>(evo_epochs_per_step));
            case StructureKind::reference:
                return p * static_cast<std::uint64_t>(evo_epochs_per_step);
        }
        return 0;
    }

    void validate() const {
        if (hosts_per_population < 1 || n_pathogens < 1 || n_populations < 1)
            throw config_error("structure: population sizes must be >= 1");
        if (extra_rounds < 0 || evo_epochs_per_step < 0)
            throw config_error("structure: round counts must be >= 0");
        if (kind == StructureKind::reference) {
            if (hosts_per_population != n_pathogens)
                throw config_error("reference: needs one host per pathogen");
            if (evo_epochs_per_step < 1)
                throw config_error("reference: epochs per pair must be >= 1");
        }
        if (kind == StructureKind::stochastic_rr && evo_epochs_per_step < 0)
            throw config_error("stochastic_rr: randomized epochs must be >= 0");
        if (epoch_budget != 0 && epoch_budget != expected_budget())
            throw config_error("structure " + std::string(structure_kind_name(kind)) +
                               ": epoch_budget " + std::to_string(epoch_budget) +
                               " does not match the closed-form cost " +
                               std::to_string(expected_budget()));
    }

    std::uint64_t budget() const { return epoch_budget != 0 ? epoch_budget : expected_budget(); }
};

/// One scheduled pairing. population_index identifies the host population
/// phase the match belongs to.
struct MatchDirective {
    int host_id = -1;
    int pathogen_id = -1;
    int population_index = 0;
    bool skip_discriminator = false;
};

struct Schedule {
    std::vector<MatchDirective> matches;
};

struct TrajectoryPoint {
    std::uint64_t epoch = 0;
    double fd = 0.0;
};

/// Fitness evaluation log row (every evaluation, with its inputs).
struct FitnessLogRow {
    std::uint64_t epoch = 0;
    Role role = Role::host;
    int individual_id = -1;
    double err_real = 0.0;
    double err_gen = 0.0;
    std::size_t n_infections = 0;
    double value = 0.0;
};

struct EvalConfig {
    std::size_t n_eval = 4096;
    int cadence = 1; // score a pathogen after every cadence-th of its matches

    void validate() const {
        if (n_eval < 128) throw config_error("eval: n_eval must be >= 128");
        if (cadence < 1) throw config_error("eval: cadence must be >= 1");
    }
};

/// Post-run summary of one host: which population it served in, its
/// architecture and how many epochs it saw.
struct HostInfo {
    int id = -1;
    int population_index = 0;
    ArchName arch = ArchName::base;
    std::uint64_t epochs_trained = 0;
    std::uint64_t init_seed = 0;
};

struct PathogenInfo {
    int id = -1;
    std::uint64_t epochs_trained = 0;
    double final_fitness = 0.0;
};

struct RunResult {
    StructureSpec structure;
    std::string method_name;
    std::uint64_t run_seed = 0;
    std::vector<MatchDirective> directives;
    std::vector<MatchRecord> match_records;
    std::vector<std::vector<TrajectoryPoint>> fd_trajectories; // indexed by pathogen id
    std::vector<FitnessLogRow> fitness_log;
    std::vector<HostInfo> hosts;
    std::vector<PathogenInfo> pathogens;
    std::vector<std::string> warnings;
    double best_fd = 0.0;
    double wallclock_seconds = 0.0;

    /// Each pathogen's own best (minimum) trajectory value.
    std::vector<double> per_pathogen_best() const {
        std::vector<double> best;
        best.reserve(fd_trajectories.size());
        for (const auto& traj : fd_trajectories) {
            double b = std::numeric_limits<double>::infinity();
            for (const auto& pt : traj) b = std::min(b, pt.fd);
            best.push_back(b);
        }
        return best;
    }
};

namespace detail {

// Substream labels under a run seed. Fixed constants: part of the documented
// reproducibility contract.
inline constexpr std::uint64_t kTagData = 1;
inline constexpr std::uint64_t kTagLatent = 2;
inline constexpr std::uint64_t kTagSchedule = 3;
inline constexpr std::uint64_t kTagEval = 4;
inline constexpr std::uint64_t kTagPathogenInit = 5;
inline constexpr std::uint64_t kTagHostInit = 6;

/// Fitness-proportional (roulette) draw. Falls back to uniform when the whole
/// vector is zero, recording a warning.
inline std::size_t roulette_pick(const std::vector<double>& fitness, SeededStream& stream,
                                 std::vector<std::string>* warnings, const char* what) {
    require(!fitness.empty(), "roulette_pick: empty fitness vector");
    double total = 0.0;
    for (double f : fitness) {
        require(f >= 0.0, "roulette_pick: negative fitness");
        total += f;
    }
    if (total <= 0.0) {
        if (warnings)
            warnings->push_back(std::string("all-zero fitness among ") + what +
                                "; fell back to uniform sampling");
        return stream.next_index(fitness.size());
    }
    const double u = stream.next_unit() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < fitness.size(); ++i) {
        acc += fitness[i];
        if (u < acc) return i;
    }
    return fitness.size() - 1;
}

class StructureRunner {
public:
    StructureRunner(const StructureSpec& spec, const MixtureSpec& mixture,
                    const TrainingConfig& training, const FitnessParams& fitness,
                    const EvalConfig& eval, std::uint64_t run_seed, bool dry_run)
        : spec_(spec), mixture_(mixture), training_(training), fitness_(fitness), eval_(eval),
          dry_run_(dry_run) {
        spec_.validate();
        if (!dry_run_) {
            mixture_.validate();
            training_.validate();
            eval_.validate();
        }
        fitness_.validate();
        spec_.rng_seed = run_seed;
        data_stream_ = SeededStream(derive_seed(run_seed, kTagData));
        latent_stream_ = SeededStream(derive_seed(run_seed, kTagLatent));
        sched_stream_ = SeededStream(derive_seed(run_seed, kTagSchedule));
        result_.structure = spec_;
        result_.run_seed = run_seed;
        result_.method_name = structure_kind_name(spec_.kind);
    }

    RunResult run() {
        const auto t0 = std::chrono::steady_clock::now();
        build_pathogens();
        switch (spec_.kind) {
            case StructureKind::standard_rr:
                run_population(arch_variant(ArchName::base), 1 + spec_.extra_rounds, 0, false);
                break;
            case StructureKind::stochastic_rr:
                run_population(arch_variant(ArchName::base), 1, 0, false);
                run_stochastic_phase();
                break;
            case StructureKind::jump_rr:
                for (int pop = 0; pop < spec_.n_populations; ++pop)
                    run_population(arch_variant(ArchName::base), rounds_for_population(pop), pop,
                                   false);
                break;
            case StructureKind::hetero_jump_rr:
                for (int pop = 0; pop < spec_.n_populations; ++pop)
                    run_population(hetero_arch(pop), rounds_for_population(pop), pop, false);
                break;
            case StructureKind::evolution_hetero:
                for (int pop = 0; pop < spec_.n_populations; ++pop) {
                    run_population(hetero_arch(pop), 1, pop, true);
                    run_evolution_phase(pop);
                }
                break;
            case StructureKind::reference:
                run_reference();
                break;
        }
        if (epoch_counter_ != spec_.budget())
            throw config_error("realized schedule length " + std::to_string(epoch_counter_) +
                               " does not equal the epoch budget " +
                               std::to_string(spec_.budget()));
        flush_hosts();
        for (const auto& p : pathogens_)
            result_.pathogens.push_back({p.id, p.epochs_trained, p.fitness});
        double best = std::numeric_limits<double>::infinity();
        for (const auto& traj : result_.fd_trajectories)
            for (const auto& pt : traj) best = std::min(best, pt.fd);
        result_.best_fd = best;
        result_.wallclock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return std::move(result_);
    }

private:
    // The heterogeneous population order: light, prelu, base.
    static ArchVariant hetero_arch(int pop) {
        static constexpr std::array<ArchName, 3> order{ArchName::light, ArchName::prelu,
                                                       ArchName::base};
        return arch_variant(order[static_cast<std::size_t>(pop) % order.size()]);
    }

    int rounds_for_population(int pop) const {
        return pop == spec_.n_populations - 1 ? 1 + spec_.extra_rounds : 1;
    }

    void build_pathogens() {
        pathogens_.clear();
        for (int p = 0; p < spec_.n_pathogens; ++p) {
            if (dry_run_) {
                Individual ind;
                ind.id = p;
                ind.role = Role::pathogen;
                pathogens_.push_back(std::move(ind));
            } else {
                pathogens_.push_back(build_generator(
                    p, derive_seed(result_.run_seed, kTagPathogenInit, static_cast<std::uint64_t>(p)),
                    training_));
            }
            pathogen_match_count_.push_back(0);
        }
        result_.fd_trajectories.assign(pathogens_.size(), {});
        if (!dry_run_)
            for (auto& pathogen : pathogens_)
                result_.fd_trajectories[static_cast<std::size_t>(pathogen.id)].push_back(
                    {0, score_pathogen(pathogen)});
    }

    void flush_hosts() {
        for (std::size_t i = 0; i < hosts_.size(); ++i)
            result_.hosts[result_.hosts.size() - hosts_.size() + i].epochs_trained =
                hosts_[i].epochs_trained;
    }

    void build_hosts(const ArchVariant& variant, int pop) {
        flush_hosts();
        hosts_.clear();
        for (int h = 0; h < spec_.hosts_per_population; ++h) {
            const int id = next_host_id_++;
            const std::uint64_t seed =
                derive_seed(result_.run_seed, kTagHostInit, static_cast<std::uint64_t>(id));
            if (dry_run_) {
                Individual ind;
                ind.id = id;
                ind.role = Role::host;
                ind.variant = variant;
                ind.fitness = 1.0;
                ind.infections.host_id = id;
                hosts_.push_back(std::move(ind));
            } else {
                hosts_.push_back(build_discriminator(id, variant, seed, training_));
            }
            result_.hosts.push_back({id, pop, variant.name, 0, seed});
        }
    }

    double score_pathogen(const Individual& pathogen) {
        return score_generator(pathogen, mixture_, eval_.n_eval,
                               derive_seed(result_.run_seed, kTagEval, eval_counter_++));
    }

    void do_match(Individual& host, Individual& pathogen, int pop, bool skip_discriminator,
                  bool fitness_mode) {
        ++epoch_counter_;
        MatchRecord rec;
        if (dry_run_) {
            rec.host_id = host.id;
            rec.pathogen_id = pathogen.id;
            rec.epoch_index = epoch_counter_;
            rec.err_real = 0.5; // placeholder measurements; only scheduling is exercised
            rec.err_gen = 0.5;
            host.epochs_trained += 1;
            pathogen.epochs_trained += 1;
        } else {
            TrainingConfig cfg = training_;
            cfg.skip_discriminator = skip_discriminator;
            rec = train_epoch(host, pathogen, mixture_, cfg, data_stream_, latent_stream_,
                              epoch_counter_);
        }
        if (fitness_mode) apply_fitness_updates(host, pathogen, rec);
        result_.directives.push_back({host.id, pathogen.id, pop, skip_discriminator});
        result_.match_records.push_back(rec);

        auto& count = pathogen_match_count_[static_cast<std::size_t>(pathogen.id)];
        ++count;
        if (!dry_run_ && count % static_cast<std::uint64_t>(eval_.cadence) == 0)
            result_.fd_trajectories[static_cast<std::size_t>(pathogen.id)].push_back(
                {epoch_counter_, score_pathogen(pathogen)});
    }

    void apply_fitness_updates(Individual& host, Individual& pathogen, MatchRecord& rec) {
        host.last_err_real = rec.err_real;
        update_infection(host.infections, pathogen.id, rec.err_gen, fitness_);
        const auto errs = host.infections.gen_errors();
        host.fitness = host_fitness(rec.err_real, errs, fitness_);
        pathogen.fitness = pathogen_fitness(rec.err_gen, fitness_);
        rec.host_fitness_after = host.fitness;
        rec.pathogen_fitness_after = pathogen.fitness;
        result_.fitness_log.push_back({epoch_counter_, Role::host, host.id, rec.err_real,
                                       rec.err_gen, host.infections.infecting.size(),
                                       host.fitness});
        result_.fitness_log.push_back({epoch_counter_, Role::pathogen, pathogen.id, rec.err_real,
                                       rec.err_gen, 0, pathogen.fitness});
    }

    /// Full cross-match rounds: pathogen-major, host-minor, ids ascending.
    void run_population(const ArchVariant& variant, int rounds, int pop, bool fitness_mode) {
        build_hosts(variant, pop);
        for (int r = 0; r < rounds; ++r)
            for (auto& pathogen : pathogens_)
                for (auto& host : hosts_) do_match(host, pathogen, pop, false, fitness_mode);
    }

    /// Randomized transmission: host and pathogen drawn independently,
    /// uniformly, with replacement. Host index is drawn first.
    void run_stochastic_phase() {
        for (int e = 0; e < spec_.evo_epochs_per_step; ++e) {
            const std::size_t h = sched_stream_.next_index(hosts_.size());
            const std::size_t p = sched_stream_.next_index(pathogens_.size());
            do_match(hosts_[h], pathogens_[p], 0, false, false);
        }
    }

    /// Fitness-proportional transmission chain within the current population.
    /// Host draw first, then pathogen; the 5% deficit rule decides whether the
    /// host trains.
    void run_evolution_phase(int pop) {
        for (int e = 0; e < spec_.evo_epochs_per_step; ++e) {
            std::vector<double> host_fit;
            host_fit.reserve(hosts_.size());
            for (const auto& h : hosts_) host_fit.push_back(h.fitness);
            std::vector<double> path_fit;
            path_fit.reserve(pathogens_.size());
            for (const auto& p : pathogens_) path_fit.push_back(p.fitness);

            Individual& host = hosts_[roulette_pick(host_fit, sched_stream_, &result_.warnings,
                                                    "hosts")];
            Individual& pathogen = pathogens_[roulette_pick(path_fit, sched_stream_,
                                                            &result_.warnings, "pathogens")];

            const auto errs_without = host.infections.gen_errors_excluding(pathogen.id);
            const auto errs_with = host.infections.gen_errors();
            const double f_without = host_fitness(host.last_err_real, errs_without, fitness_);
            const double f_with = host_fitness(host.last_err_real, errs_with, fitness_);
            const bool skip = !should_train_host(f_without, f_with, fitness_);
            do_match(host, pathogen, pop, skip, true);
        }
    }

    /// Independent pairs: host i trains exclusively with pathogen i.
    void run_reference() {
        build_hosts(arch_variant(ArchName::base), 0);
        for (std::size_t i = 0; i < pathogens_.size(); ++i)
            for (int e = 0; e < spec_.evo_epochs_per_step; ++e)
                do_match(hosts_[i], pathogens_[i], 0, false, false);
    }

    StructureSpec spec_;
    MixtureSpec mixture_;
    TrainingConfig training_;
    FitnessParams fitness_;
    EvalConfig eval_;
    bool dry_run_ = false;

    SeededStream data_stream_;
    SeededStream latent_stream_;
    SeededStream sched_stream_;
    std::uint64_t eval_counter_ = 0;
    std::uint64_t epoch_counter_ = 0;
    int next_host_id_ = 0;

    std::vector<Individual> pathogens_;
    std::vector<Individual> hosts_;
    std::vector<std::uint64_t> pathogen_match_count_;
    RunResult result_;
};

} // namespace detail

/// Execute one run of a propagation structure. Everything (weights, schedules,
/// scores) is a pure function of the arguments; `run_seed` fixes all streams.
inline RunResult run_structure(const StructureSpec& spec, const MixtureSpec& mixture,
                               const TrainingConfig& training, const FitnessParams& fitness,
                               const EvalConfig& eval, std::uint64_t run_seed) {
    detail::StructureRunner runner(spec, mixture, training, fitness, eval, run_seed, false);
    return runner.run();
}

/// Realize a structure's schedule without any training (no parameter updates,
/// no scoring). Stochastic phases draw from the same seeded stream a real run
/// would use; the evolutionary structure sees fixed placeholder errors of 0.5.
inline Schedule realize_schedule(const StructureSpec& spec, std::uint64_t run_seed,
                                 const FitnessParams& fitness = {}) {
    detail::StructureRunner runner(spec, MixtureSpec{}, TrainingConfig{}, fitness, EvalConfig{},
                                   run_seed, true);
    RunResult r = runner.run();
    Schedule s;
    s.matches = std::move(r.directives);
    return s;
}

// Convenience wrappers, one per structure, mirroring the engine's vocabulary.

inline RunResult run_standard_rr(const StructureSpec& spec, const MixtureSpec& mixture,
                                 const TrainingConfig& training, const EvalConfig& eval,
                                 std::uint64_t run_seed) {
    require(spec.kind == StructureKind::standard_rr, "run_standard_rr: wrong kind");
    return run_structure(spec, mixture, training, FitnessParams{}, eval, run_seed);
}

inline RunResult run_stochastic_rr(const StructureSpec& spec, const MixtureSpec& mixture,
                                   const TrainingConfig& training, const EvalConfig& eval,
                                   std::uint64_t run_seed) {
    require(spec.kind == StructureKind::stochastic_rr, "run_stochastic_rr: wrong kind");
    return run_structure(spec, mixture, training, FitnessParams{}, eval, run_seed);
}

inline RunResult run_jump_rr(const StructureSpec& spec, const MixtureSpec& mixture,
                             const TrainingConfig& training, const EvalConfig& eval,
                             std::uint64_t run_seed) {
    require(spec.kind == StructureKind::jump_rr, "run_jump_rr: wrong kind");
    return run_structure(spec, mixture, training, FitnessParams{}, eval, run_seed);
}

inline RunResult run_hetero_jump_rr(const StructureSpec& spec, const MixtureSpec& mixture,
                                    const TrainingConfig& training, const EvalConfig& eval,
                                    std::uint64_t run_seed) {
    require(spec.kind == StructureKind::hetero_jump_rr, "run_hetero_jump_rr: wrong kind");
    return run_structure(spec, mixture, training, FitnessParams{}, eval, run_seed);
}

inline RunResult run_evolution_hetero(const StructureSpec& spec, const MixtureSpec& mixture,
                                      const TrainingConfig& training, const FitnessParams& fitness,
                                      const EvalConfig& eval, std::uint64_t run_seed) {
    require(spec.kind == StructureKind::evolution_hetero, "run_evolution_hetero: wrong kind");
    return run_structure(spec, mixture, training, fitness, eval, run_seed);
}

inline RunResult run_reference(const StructureSpec& spec, const MixtureSpec& mixture,
                               const TrainingConfig& training, const EvalConfig& eval,
                               std::uint64_t run_seed) {
    require(spec.kind == StructureKind::reference, "run_reference: wrong kind");
    return run_structure(spec, mixture, training, FitnessParams{}, eval, run_seed);
}

} // namespace coevo
