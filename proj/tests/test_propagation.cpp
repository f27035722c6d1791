#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "coevo/propagation.hpp"
#include "support/oracles.hpp"

using namespace coevo;

namespace {

// Small-but-real training setup so structure tests stay fast.
TrainingConfig tiny_training() {
    TrainingConfig cfg;
    cfg.batch_size = 8;
    cfg.batches_per_epoch = 2;
    return cfg;
}

EvalConfig tiny_eval() {
    EvalConfig e;
    e.n_eval = 128;
    return e;
}

} // namespace

TEST_CASE("default budgets hit the published epoch totals") {
    CHECK(StructureSpec::defaults_for(StructureKind::standard_rr).expected_budget() == 75);
    CHECK(StructureSpec::defaults_for(StructureKind::stochastic_rr).expected_budget() == 75);
    CHECK(StructureSpec::defaults_for(StructureKind::jump_rr).expected_budget() == 125);
    CHECK(StructureSpec::defaults_for(StructureKind::hetero_jump_rr).expected_budget() == 125);
    CHECK(StructureSpec::defaults_for(StructureKind::evolution_hetero).expected_budget() == 72);
    CHECK(StructureSpec::defaults_for(StructureKind::reference).expected_budget() == 150);
}

TEST_CASE("dry-run schedules realize exactly the budget, with no training") {
    for (StructureKind kind :
         {StructureKind::standard_rr, StructureKind::stochastic_rr, StructureKind::jump_rr,
          StructureKind::hetero_jump_rr, StructureKind::evolution_hetero, StructureKind::reference}) {
        const StructureSpec spec = StructureSpec::defaults_for(kind);
        const Schedule s = realize_schedule(spec, 99);
        CHECK(s.matches.size() == spec.expected_budget());
    }
}

TEST_CASE("an explicit epoch_budget must match the closed form") {
    StructureSpec spec = StructureSpec::defaults_for(StructureKind::standard_rr);
    spec.epoch_budget = 75;
    CHECK_NOTHROW(spec.validate());
    spec.epoch_budget = 74;
    CHECK_THROWS_AS(spec.validate(), config_error);
    CHECK_THROWS_AS(realize_schedule(spec, 1), config_error);
}

TEST_CASE("standard round robin: degenerate and small cross products") {
    StructureSpec pair = StructureSpec::defaults_for(StructureKind::standard_rr);
    pair.hosts_per_population = 1;
    pair.n_pathogens = 1; // 3 rounds of the single pair
    const Schedule s = realize_schedule(pair, 7);
    REQUIRE(s.matches.size() == 3);
    for (const auto& m : s.matches) {
        CHECK(m.host_id == 0);
        CHECK(m.pathogen_id == 0);
    }

    StructureSpec small = StructureSpec::defaults_for(StructureKind::standard_rr);
    small.hosts_per_population = 2;
    small.n_pathogens = 3;
    small.extra_rounds = 0; // one round
    const Schedule s2 = realize_schedule(small, 7);
    REQUIRE(s2.matches.size() == 6);
    // pathogen-major, host-minor, ids ascending
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < s2.matches.size(); ++i) {
        const auto& m = s2.matches[i];
        CHECK(m.pathogen_id == static_cast<int>(i / 2));
        CHECK(m.host_id == static_cast<int>(i % 2));
        seen.insert({m.host_id, m.pathogen_id});
    }
    CHECK(seen.size() == 6);
}

TEST_CASE("stochastic round robin is seed-deterministic") {
    const StructureSpec spec = StructureSpec::defaults_for(StructureKind::stochastic_rr);
    const Schedule a = realize_schedule(spec, 31);
    const Schedule b = realize_schedule(spec, 31);
    const Schedule c = realize_schedule(spec, 32);
    REQUIRE(a.matches.size() == b.matches.size());
    bool all_same = true;
    for (std::size_t i = 0; i < a.matches.size(); ++i) {
        CHECK(a.matches[i].host_id == b.matches[i].host_id);
        CHECK(a.matches[i].pathogen_id == b.matches[i].pathogen_id);
        if (a.matches[i].host_id != c.matches[i].host_id ||
            a.matches[i].pathogen_id != c.matches[i].pathogen_id)
            all_same = false;
    }
    CHECK_FALSE(all_same);

    // The first 25 matches are the deterministic cross-match.
    for (int i = 0; i < 25; ++i) {
        CHECK(a.matches[i].pathogen_id == i / 5);
        CHECK(a.matches[i].host_id == i % 5);
    }
}

TEST_CASE("stochastic pair frequencies pass a chi-square uniformity test") {
    StructureSpec spec = StructureSpec::defaults_for(StructureKind::stochastic_rr);
    spec.evo_epochs_per_step = 10000;
    const Schedule s = realize_schedule(spec, 2024);
    std::map<std::pair<int, int>, int> counts;
    for (std::size_t i = 25; i < s.matches.size(); ++i)
        counts[{s.matches[i].host_id, s.matches[i].pathogen_id}]++;
    REQUIRE(s.matches.size() == 25 + 10000);

    const double expected = 10000.0 / 25.0;
    double chi2 = 0.0;
    for (int h = 0; h < 5; ++h)
        for (int p = 0; p < 5; ++p) {
            const double c = counts[{h, p}];
            chi2 += (c - expected) * (c - expected) / expected;
        }
    const double pval = oracles::chi_square_tail(chi2, 24.0);
    INFO("chi2 " << chi2 << " p " << pval);
    CHECK(pval > 0.001);
}

TEST_CASE("roulette frequencies follow fitness proportions") {
    SeededStream s(77);
    const std::vector<double> fit = {3.0, 1.0};
    int first = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        if (detail::roulette_pick(fit, s, nullptr, "test") == 0) ++first;
    // 3 sigma binomial bound around p = 0.75
    const double sigma = std::sqrt(n * 0.75 * 0.25);
    CHECK(std::abs(first - 0.75 * n) <= 3.0 * sigma);

    // equal fitness reduces to uniform
    const std::vector<double> flat = {1.0, 1.0, 1.0, 1.0};
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i) counts[detail::roulette_pick(flat, s, nullptr, "test")]++;
    const double sig_u = std::sqrt(n * 0.25 * 0.75);
    for (int c : counts) CHECK(std::abs(c - 2500.0) <= 3.0 * sig_u);

    // all-zero fitness falls back to uniform and records a warning
    std::vector<std::string> warnings;
    const std::vector<double> zero = {0.0, 0.0};
    (void)detail::roulette_pick(zero, s, &warnings, "hosts");
    REQUIRE(warnings.size() == 1);
}

TEST_CASE("jump structures re-seed naive host populations") {
    StructureSpec spec = StructureSpec::defaults_for(StructureKind::jump_rr);
    spec.hosts_per_population = 2;
    spec.n_pathogens = 2;
    // budget 2*2*(3+2) = 20 training epochs at tiny scale
    const RunResult r = run_structure(spec, MixtureSpec{}, tiny_training(), FitnessParams{},
                                      tiny_eval(), 555);
    REQUIRE(r.directives.size() == 20);
    REQUIRE(r.hosts.size() == 6); // three populations of two

    // hosts are distinct individuals with distinct seeds, grouped by population
    std::set<std::uint64_t> seeds;
    for (const HostInfo& h : r.hosts) {
        seeds.insert(h.init_seed);
        CHECK(h.arch == ArchName::base);
    }
    CHECK(seeds.size() == 6);
    CHECK(r.hosts[0].population_index == 0);
    CHECK(r.hosts[2].population_index == 1);
    CHECK(r.hosts[4].population_index == 2);

    // population phases: pop 0 and 1 get one round (4 epochs), pop 2 three
    for (std::size_t i = 0; i < 4; ++i) CHECK(r.directives[i].population_index == 0);
    for (std::size_t i = 4; i < 8; ++i) CHECK(r.directives[i].population_index == 1);
    for (std::size_t i = 8; i < 20; ++i) CHECK(r.directives[i].population_index == 2);

    // naivety: every host's first appearance comes after its population opens
    std::map<int, int> first_epoch;
    for (std::size_t i = 0; i < r.directives.size(); ++i)
        if (!first_epoch.count(r.directives[i].host_id))
            first_epoch[r.directives[i].host_id] = static_cast<int>(i);
    CHECK(first_epoch[0] == 0);
    CHECK(first_epoch[2] == 4);
    CHECK(first_epoch[4] == 8);

    // pathogens persist: the same ids appear in every population phase
    for (int pop = 0; pop < 3; ++pop) {
        std::set<int> ids;
        for (const auto& d : r.directives)
            if (d.population_index == pop) ids.insert(d.pathogen_id);
        CHECK(ids == std::set<int>{0, 1});
    }

    // budget accounting: each pathogen trains budget / n_pathogens epochs
    for (const PathogenInfo& p : r.pathogens) CHECK(p.epochs_trained == 10);
    for (const HostInfo& h : r.hosts) CHECK(h.epochs_trained > 0);
}

TEST_CASE("hetero jump uses light, prelu, base in that order") {
    StructureSpec spec = StructureSpec::defaults_for(StructureKind::hetero_jump_rr);
    spec.hosts_per_population = 2;
    spec.n_pathogens = 2;
    const RunResult r = run_structure(spec, MixtureSpec{}, tiny_training(), FitnessParams{},
                                      tiny_eval(), 556);
    REQUIRE(r.hosts.size() == 6);
    CHECK(r.hosts[0].arch == ArchName::light);
    CHECK(r.hosts[1].arch == ArchName::light);
    CHECK(r.hosts[2].arch == ArchName::prelu);
    CHECK(r.hosts[3].arch == ArchName::prelu);
    CHECK(r.hosts[4].arch == ArchName::base);
    CHECK(r.hosts[5].arch == ArchName::base);

    // pairing order identical to the homogeneous jump structure
    StructureSpec plain = StructureSpec::defaults_for(StructureKind::jump_rr);
    plain.hosts_per_population = 2;
    plain.n_pathogens = 2;
    const Schedule a = realize_schedule(spec, 777);
    const Schedule b = realize_schedule(plain, 777);
    REQUIRE(a.matches.size() == b.matches.size());
    for (std::size_t i = 0; i < a.matches.size(); ++i) {
        CHECK(a.matches[i].host_id == b.matches[i].host_id);
        CHECK(a.matches[i].pathogen_id == b.matches[i].pathogen_id);
        CHECK(a.matches[i].population_index == b.matches[i].population_index);
    }
}

TEST_CASE("evolution structure: phases, fitness updates, five percent rule") {
    StructureSpec spec = StructureSpec::defaults_for(StructureKind::evolution_hetero);
    spec.hosts_per_population = 2;
    spec.n_pathogens = 2;
    spec.evo_epochs_per_step = 4;
    // budget 3 * (4 + 4) = 24
    const RunResult r = run_structure(spec, MixtureSpec{}, tiny_training(), FitnessParams{},
                                      tiny_eval(), 557);
    REQUIRE(r.directives.size() == 24);

    for (std::size_t i = 0; i < r.directives.size(); ++i) {
        const bool in_cross_match = (i % 8) < 4;
        if (in_cross_match) {
            // deterministic pathogen-major order, discriminator always trains
            CHECK_FALSE(r.directives[i].skip_discriminator);
        }
        // fitness recorded on every match
        REQUIRE(r.match_records[i].host_fitness_after.has_value());
        REQUIRE(r.match_records[i].pathogen_fitness_after.has_value());
        CHECK(*r.match_records[i].host_fitness_after >= 0.01);
        CHECK(*r.match_records[i].pathogen_fitness_after >= 0.0025 * 1.5);
    }
    CHECK_FALSE(r.fitness_log.empty());
    CHECK(r.hosts.size() == 6);
    CHECK(r.hosts[0].arch == ArchName::light);
    CHECK(r.hosts[2].arch == ArchName::prelu);
    CHECK(r.hosts[4].arch == ArchName::base);
}

TEST_CASE("reference trains each pair exclusively") {
    StructureSpec spec = StructureSpec::defaults_for(StructureKind::reference);
    spec.hosts_per_population = 3;
    spec.n_pathogens = 3;
    spec.evo_epochs_per_step = 4; // 12 epochs total
    const RunResult r = run_structure(spec, MixtureSpec{}, tiny_training(), FitnessParams{},
                                      tiny_eval(), 558);
    REQUIRE(r.directives.size() == 12);
    std::map<int, std::set<int>> partners;
    for (const auto& d : r.directives) partners[d.pathogen_id].insert(d.host_id);
    for (const auto& [pathogen, hosts] : partners) CHECK(hosts.size() == 1);
    for (const PathogenInfo& p : r.pathogens) CHECK(p.epochs_trained == 4);
}

TEST_CASE("reference requires matching host and pathogen counts") {
    StructureSpec spec = StructureSpec::defaults_for(StructureKind::reference);
    spec.n_pathogens = 9;
    CHECK_THROWS_AS(spec.validate(), config_error);
}

TEST_CASE("trajectories cover every pathogen and bound best_fd") {
    StructureSpec spec = StructureSpec::defaults_for(StructureKind::standard_rr);
    spec.hosts_per_population = 2;
    spec.n_pathogens = 2;
    spec.extra_rounds = 0;
    const RunResult r = run_structure(spec, MixtureSpec{}, tiny_training(), FitnessParams{},
                                      tiny_eval(), 559);
    REQUIRE(r.fd_trajectories.size() == 2);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& traj : r.fd_trajectories) {
        REQUIRE_FALSE(traj.empty());
        CHECK(traj.front().epoch == 0); // scored once at run start
        for (const auto& pt : traj) best = std::min(best, pt.fd);
    }
    CHECK(r.best_fd == best);
    // every pathogen is scored after each of its matches plus once at start
    CHECK(r.fd_trajectories[0].size() == 1 + 2);
    CHECK(r.fd_trajectories[1].size() == 1 + 2);
}

TEST_CASE("eval cadence thins per-pathogen scoring") {
    StructureSpec spec = StructureSpec::defaults_for(StructureKind::standard_rr);
    spec.hosts_per_population = 2;
    spec.n_pathogens = 1;
    spec.extra_rounds = 2; // pathogen plays 6 matches
    EvalConfig ev = tiny_eval();
    ev.cadence = 2;
    const RunResult r =
        run_structure(spec, MixtureSpec{}, tiny_training(), FitnessParams{}, ev, 560);
    CHECK(r.fd_trajectories[0].size() == 1 + 3); // start + every 2nd of 6 matches
}

TEST_CASE("a full run is reproducible from its seed") {
    StructureSpec spec = StructureSpec::defaults_for(StructureKind::evolution_hetero);
    spec.hosts_per_population = 2;
    spec.n_pathogens = 2;
    spec.evo_epochs_per_step = 3;
    const RunResult a = run_structure(spec, MixtureSpec{}, tiny_training(), FitnessParams{},
                                      tiny_eval(), 561);
    const RunResult b = run_structure(spec, MixtureSpec{}, tiny_training(), FitnessParams{},
                                      tiny_eval(), 561);
    REQUIRE(a.match_records.size() == b.match_records.size());
    CHECK(a.best_fd == b.best_fd);
    for (std::size_t i = 0; i < a.match_records.size(); ++i) {
        CHECK(a.directives[i].host_id == b.directives[i].host_id);
        CHECK(a.directives[i].pathogen_id == b.directives[i].pathogen_id);
        CHECK(a.directives[i].skip_discriminator == b.directives[i].skip_discriminator);
        CHECK(a.match_records[i].err_real == b.match_records[i].err_real);
        CHECK(a.match_records[i].err_gen == b.match_records[i].err_gen);
    }
    for (std::size_t p = 0; p < a.fd_trajectories.size(); ++p) {
        REQUIRE(a.fd_trajectories[p].size() == b.fd_trajectories[p].size());
        for (std::size_t i = 0; i < a.fd_trajectories[p].size(); ++i)
            CHECK(a.fd_trajectories[p][i].fd == b.fd_trajectories[p][i].fd);
    }
}
