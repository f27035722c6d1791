#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coevo/config.hpp"
#include "coevo/propagation.hpp"
#include "coevo/stats.hpp"
#include "coevo/version.hpp"

namespace coevo {

namespace iodetail {

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hash_hex(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

/// Fixed-format double for CSV cells: round-trippable and byte-stable.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << bytes;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace iodetail

// ---------------------------------------------------------------------------
// Per-run persistence

struct RunOutcome {
    std::string method;
    std::uint64_t seed = 0;
    std::filesystem::path dir;
    bool ok = false;
    std::string error;
    double best_fd = 0.0;
    std::vector<double> per_pathogen_best;
};

/// Documented, version-stable seed for run `run_index` of `method`.
inline std::uint64_t run_seed_for(std::uint64_t base_seed, const std::string& method,
                                  std::uint64_t run_index) {
    return stable_hash(base_seed, method, run_index);
}

namespace iodetail {

inline std::string matches_csv(const std::string& method, const RunResult& r) {
    std::ostringstream out;
    out << "method,run_seed,epoch,population,host_id,pathogen_id,skip_discriminator,"
           "err_real,err_gen,d_loss,g_loss,host_fitness_after,pathogen_fitness_after\n";
    for (std::size_t i = 0; i < r.match_records.size(); ++i) {
        const MatchRecord& m = r.match_records[i];
        const MatchDirective& d = r.directives[i];
        out << method << ',' << r.run_seed << ',' << m.epoch_index << ',' << d.population_index
            << ',' << m.host_id << ',' << m.pathogen_id << ',' << (d.skip_discriminator ? 1 : 0)
            << ',' << fmt(m.err_real) << ',' << fmt(m.err_gen) << ',' << fmt(m.d_loss) << ','
            << fmt(m.g_loss) << ',';
        if (m.host_fitness_after) out << fmt(*m.host_fitness_after);
        out << ',';
        if (m.pathogen_fitness_after) out << fmt(*m.pathogen_fitness_after);
        out << '\n';
    }
    return out.str();
}

inline std::string trajectories_csv(const std::string& method, const RunResult& r) {
    std::ostringstream out;
    out << "structure,run_seed,pathogen_id,epoch,fd\n";
    for (std::size_t p = 0; p < r.fd_trajectories.size(); ++p)
        for (const TrajectoryPoint& pt : r.fd_trajectories[p])
            out << method << ',' << r.run_seed << ',' << p << ',' << pt.epoch << ',' << fmt(pt.fd)
                << '\n';
    return out.str();
}

inline std::string fitness_csv(const std::string& method, const RunResult& r) {
    std::ostringstream out;
    out << "method,run_seed,epoch,role,individual_id,err_real,err_gen,n_infections,fitness\n";
    for (const FitnessLogRow& row : r.fitness_log)
        out << method << ',' << r.run_seed << ',' << row.epoch << ','
            << (row.role == Role::host ? "host" : "pathogen") << ',' << row.individual_id << ','
            << fmt(row.err_real) << ',' << fmt(row.err_gen) << ',' << row.n_infections << ','
            << fmt(row.value) << '\n';
    return out.str();
}

inline nlohmann::json structure_json(const StructureSpec& s) {
    return {{"kind", structure_kind_name(s.kind)},
            {"hosts_per_population", s.hosts_per_population},
            {"n_pathogens", s.n_pathogens},
            {"n_populations", s.n_populations},
            {"extra_rounds", s.extra_rounds},
            {"evo_epochs_per_step", s.evo_epochs_per_step},
            {"epoch_budget", s.budget()},
            {"rng_seed", s.rng_seed}};
}

inline std::string result_json(const std::string& method, const RunResult& r) {
    nlohmann::json j;
    j["schema"] = 1;
    j["method"] = method;
    j["run_seed"] = r.run_seed;
    j["structure"] = structure_json(r.structure);
    j["n_matches"] = r.match_records.size();
    j["best_fd"] = r.best_fd;
    j["per_pathogen_best"] = r.per_pathogen_best();
    j["hosts"] = nlohmann::json::array();
    for (const HostInfo& h : r.hosts)
        j["hosts"].push_back({{"id", h.id},
                              {"population", h.population_index},
                              {"arch", arch_name(h.arch)},
                              {"epochs_trained", h.epochs_trained}});
    j["pathogens"] = nlohmann::json::array();
    for (const PathogenInfo& p : r.pathogens)
        j["pathogens"].push_back({{"id", p.id},
                                  {"epochs_trained", p.epochs_trained},
                                  {"final_fitness", p.final_fitness}});
    j["warnings"] = r.warnings;
    j["files"] = {{"matches", "matches.csv"},
                  {"trajectories", "trajectories.csv"},
                  {"fitness", "fitness.csv"}};
    return j.dump(2) + "\n";
}

/// Create <root>/<method>/seed_<seed>; on rerun, append __2, __3 ... so no
/// result is ever overwritten.
inline std::filesystem::path allocate_run_dir(const std::filesystem::path& root,
                                              const std::string& method, std::uint64_t seed) {
    std::filesystem::create_directories(root / method);
    const std::string base = "seed_" + std::to_string(seed);
    for (int attempt = 1; attempt < 10000; ++attempt) {
        std::filesystem::path dir =
            root / method / (attempt == 1 ? base : base + "__" + std::to_string(attempt));
        std::error_code ec;
        if (std::filesystem::create_directory(dir, ec)) return dir;
        if (ec && !std::filesystem::exists(dir)) throw std::runtime_error(ec.message());
    }
    throw std::runtime_error("could not allocate a run directory under " + (root / method).string());
}

} // namespace iodetail

/// Execute one (method, seed) run and persist it: config copy, result.json,
/// three CSVs and the manifest. Timestamps and wallclock go only into the
/// manifest, so every other byte is a pure function of (config, seed).
inline RunOutcome execute_run(const ExperimentConfig& cfg, const MethodConfig& method,
                              std::uint64_t seed) {
    namespace fs = std::filesystem;
    using nlohmann::json;

    RunOutcome outcome;
    outcome.method = method.name;
    outcome.seed = seed;
    outcome.dir = iodetail::allocate_run_dir(cfg.output_dir, method.name, seed);

    const std::string started = iodetail::utc_timestamp();
    json manifest;
    manifest["engine_version"] = kEngineVersion;
    manifest["method"] = method.name;
    manifest["run_seed"] = seed;
    manifest["started_at"] = started;

    const std::string config_copy = cfg.raw_text.empty() ? cfg.to_json().dump(2) + "\n" : cfg.raw_text;
    iodetail::write_file(outcome.dir / "config.json", config_copy);
    manifest["config_hash"] = iodetail::hash_hex(config_copy);

    try {
        RunResult result =
            run_structure(method.structure, cfg.mixture, cfg.training, cfg.fitness, cfg.eval, seed);

        const std::map<std::string, std::string> files = {
            {"result.json", iodetail::result_json(method.name, result)},
            {"matches.csv", iodetail::matches_csv(method.name, result)},
            {"trajectories.csv", iodetail::trajectories_csv(method.name, result)},
            {"fitness.csv", iodetail::fitness_csv(method.name, result)},
        };
        for (const auto& [name, bytes] : files) {
            iodetail::write_file(outcome.dir / name, bytes);
            manifest["files"][name] = iodetail::hash_hex(bytes);
        }
        manifest["status"] = "complete";
        manifest["wallclock_seconds"] = result.wallclock_seconds;
        outcome.ok = true;
        outcome.best_fd = result.best_fd;
        outcome.per_pathogen_best = result.per_pathogen_best();
    } catch (const std::exception& e) {
        manifest["status"] = "failed";
        manifest["error"] = e.what();
        outcome.ok = false;
        outcome.error = e.what();
    }
    manifest["finished_at"] = iodetail::utc_timestamp();
    iodetail::write_file(outcome.dir / "manifest.json", manifest.dump(2) + "\n");
    return outcome;
}

// ---------------------------------------------------------------------------
// Aggregate analysis (shared by `compare` and `stats`)

struct MethodResults {
    std::string method;
    std::vector<std::uint64_t> seeds;
    std::vector<double> best_fd;       // one per run
    std::vector<double> generator_best; // one per generator per run
};

struct AnalysisInput {
    std::vector<MethodResults> methods; // sorted by method name
    std::vector<std::string> warnings;
};

inline constexpr int kMinRunsForStats = 5;

namespace iodetail {

inline std::string summary_csv(const std::vector<MethodSample>& samples) {
    std::ostringstream out;
    out << "method,median,mean,std\n";
    for (const auto& s : samples) {
        const Summary sm = summarize(s);
        out << s.method << ',' << fmt(sm.median) << ',' << fmt(sm.mean) << ',' << fmt(sm.std_dev)
            << '\n';
    }
    return out.str();
}

inline std::string matrix_csv(const std::vector<std::vector<ComparisonCell>>& m) {
    std::ostringstream out;
    out << "row_method,col_method,median_ratio,ratio_defined,t_statistic,p_value,significant\n";
    for (const auto& row : m)
        for (const ComparisonCell& c : row)
            out << c.row_method << ',' << c.col_method << ',' << fmt(c.median_ratio) << ','
                << (c.ratio_defined ? 1 : 0) << ',' << fmt(c.t_statistic) << ',' << fmt(c.p_value)
                << ',' << (c.significant ? 1 : 0) << '\n';
    return out.str();
}

inline nlohmann::json matrix_json(const std::vector<std::vector<ComparisonCell>>& m) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : m)
        for (const ComparisonCell& c : row)
            j.push_back({{"row_method", c.row_method},
                         {"col_method", c.col_method},
                         {"median_ratio", c.median_ratio},
                         {"ratio_defined", c.ratio_defined},
                         {"t_statistic", c.t_statistic},
                         {"p_value", c.p_value},
                         {"significant", c.significant}});
    return j;
}

} // namespace iodetail

/// Write summary.csv, the two comparison matrices (best-FD-per-run and
/// per-generator FDs) and samples.json into a fresh analysis directory.
/// Methods with fewer than kMinRunsForStats successful runs are excluded.
/// Returns the directory, or an empty path if nothing was analyzable.
inline std::filesystem::path write_analysis(const AnalysisInput& input,
                                            const std::filesystem::path& output_root,
                                            bool welch = false) {
    using nlohmann::json;
    std::vector<std::string> warnings = input.warnings;

    std::vector<MethodSample> best_samples;
    std::vector<MethodSample> all_samples;
    json samples_json;
    for (const MethodResults& m : input.methods) {
        if (static_cast<int>(m.best_fd.size()) < kMinRunsForStats) {
            warnings.push_back("method " + m.method + " has only " +
                               std::to_string(m.best_fd.size()) + " completed runs (< " +
                               std::to_string(kMinRunsForStats) + "); excluded from statistics");
            continue;
        }
        best_samples.push_back({m.method, m.best_fd});
        all_samples.push_back({m.method, m.generator_best});
        samples_json[m.method] = {{"seeds", m.seeds},
                                  {"best_fd", m.best_fd},
                                  {"generator_best_fd", m.generator_best}};
    }

    std::filesystem::path dir;
    {
        std::filesystem::create_directories(output_root);
        for (int attempt = 1;; ++attempt) {
            dir = output_root /
                  (attempt == 1 ? std::string("analysis") : "analysis__" + std::to_string(attempt));
            std::error_code ec;
            if (std::filesystem::create_directory(dir, ec)) break;
            if (attempt > 10000) throw std::runtime_error("could not allocate analysis dir");
        }
    }

    json meta;
    meta["engine_version"] = kEngineVersion;
    meta["welch"] = welch;
    meta["warnings"] = warnings;
    meta["methods_analyzed"] = best_samples.size();

    if (best_samples.empty()) {
        warnings.push_back("no method has enough completed runs; nothing to analyze");
        meta["warnings"] = warnings;
        iodetail::write_file(dir / "analysis_meta.json", meta.dump(2) + "\n");
        return {};
    }

    iodetail::write_file(dir / "summary.csv", iodetail::summary_csv(best_samples));
    iodetail::write_file(dir / "samples.json", samples_json.dump(2) + "\n");

    if (best_samples.size() >= 2) {
        const auto m_best = comparison_matrix(best_samples, welch);
        const auto m_all = comparison_matrix(all_samples, welch);
        iodetail::write_file(dir / "matrix_best.csv", iodetail::matrix_csv(m_best));
        iodetail::write_file(dir / "matrix_best.json", iodetail::matrix_json(m_best).dump(2) + "\n");
        iodetail::write_file(dir / "matrix_all.csv", iodetail::matrix_csv(m_all));
        iodetail::write_file(dir / "matrix_all.json", iodetail::matrix_json(m_all).dump(2) + "\n");
    } else {
        warnings.push_back("only one method analyzed; comparison matrices skipped");
        meta["warnings"] = warnings;
    }
    iodetail::write_file(dir / "analysis_meta.json", meta.dump(2) + "\n");
    return dir;
}

/// Run every (method, run_index) of the config on a small worker pool and
/// aggregate. Each run is internally serial and writes only its own directory.
inline std::pair<AnalysisInput, std::vector<RunOutcome>> compare_runs(const ExperimentConfig& cfg,
                                                                      unsigned workers) {
    struct Task {
        const MethodConfig* method;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const auto& m : cfg.methods)
        for (int i = 0; i < cfg.runs_per_method; ++i)
            tasks.push_back({&m, run_seed_for(cfg.base_seed, m.name, static_cast<std::uint64_t>(i))});

    std::vector<RunOutcome> outcomes(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            outcomes[i] = execute_run(cfg, *tasks[i].method, tasks[i].seed);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Aggregate in (method name, run seed) order: `stats` has no config, so it
    // sees runs in exactly this order and the summed floats match bitwise.
    std::map<std::string, std::vector<const RunOutcome*>> by_method;
    AnalysisInput input;
    for (const RunOutcome& o : outcomes) {
        if (!o.ok) {
            input.warnings.push_back("run failed (" + o.method + ", seed " +
                                     std::to_string(o.seed) + "): " + o.error);
            continue;
        }
        by_method[o.method].push_back(&o);
    }
    for (auto& [name, runs] : by_method) {
        std::sort(runs.begin(), runs.end(),
                  [](const RunOutcome* a, const RunOutcome* b) { return a->seed < b->seed; });
        MethodResults m;
        m.method = name;
        for (const RunOutcome* o : runs) {
            m.seeds.push_back(o->seed);
            m.best_fd.push_back(o->best_fd);
            for (double v : o->per_pathogen_best) m.generator_best.push_back(v);
        }
        input.methods.push_back(std::move(m));
    }
    return {std::move(input), std::move(outcomes)};
}

/// Rebuild the analysis input from completed run directories under `root`
/// (layout <root>/<method>/seed_*). Files whose hash does not match the
/// manifest are rejected with a diagnostic warning.
inline AnalysisInput collect_runs(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    using nlohmann::json;
    AnalysisInput input;
    if (!fs::is_directory(root)) throw config_error("results directory not found: " + root.string());

    struct LoadedRun {
        std::uint64_t seed;
        double best_fd;
        std::vector<double> generator_best;
    };
    std::map<std::string, std::vector<LoadedRun>> by_method;
    std::vector<fs::path> method_dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && e.path().filename().string().rfind("analysis", 0) != 0)
            method_dirs.push_back(e.path());
    std::sort(method_dirs.begin(), method_dirs.end());

    for (const fs::path& mdir : method_dirs) {
        std::vector<fs::path> run_dirs;
        for (const auto& e : fs::directory_iterator(mdir))
            if (e.is_directory()) run_dirs.push_back(e.path());
        std::sort(run_dirs.begin(), run_dirs.end());

        for (const fs::path& rdir : run_dirs) {
            const fs::path manifest_path = rdir / "manifest.json";
            if (!fs::exists(manifest_path)) {
                input.warnings.push_back("skipping " + rdir.string() + ": no manifest.json");
                continue;
            }
            json manifest;
            try {
                manifest = json::parse(iodetail::read_file(manifest_path));
            } catch (const std::exception& e) {
                input.warnings.push_back("skipping " + rdir.string() + ": bad manifest (" +
                                         e.what() + ")");
                continue;
            }
            if (manifest.value("status", "") != "complete") {
                input.warnings.push_back("skipping " + rdir.string() + ": status is '" +
                                         manifest.value("status", "?") + "'");
                continue;
            }
            bool intact = true;
            for (const auto& [name, expected] : manifest.at("files").items()) {
                const fs::path fpath = rdir / name;
                if (!fs::exists(fpath)) {
                    input.warnings.push_back("skipping " + rdir.string() + ": missing " + name);
                    intact = false;
                    break;
                }
                if (iodetail::hash_hex(iodetail::read_file(fpath)) != expected.get<std::string>()) {
                    input.warnings.push_back("skipping " + rdir.string() + ": hash mismatch on " +
                                             name + " (file rejected)");
                    intact = false;
                    break;
                }
            }
            if (!intact) continue;

            json result;
            try {
                result = json::parse(iodetail::read_file(rdir / "result.json"));
            } catch (const std::exception& e) {
                input.warnings.push_back("skipping " + rdir.string() + ": bad result.json (" +
                                         e.what() + ")");
                continue;
            }
            const std::string method = result.at("method").get<std::string>();
            by_method[method].push_back({result.at("run_seed").get<std::uint64_t>(),
                                         result.at("best_fd").get<double>(),
                                         result.at("per_pathogen_best").get<std::vector<double>>()});
        }
    }
    // Same canonical ordering as compare_runs: numeric run seed within method.
    for (auto& [name, runs] : by_method) {
        std::sort(runs.begin(), runs.end(),
                  [](const LoadedRun& a, const LoadedRun& b) { return a.seed < b.seed; });
        MethodResults m;
        m.method = name;
        for (const LoadedRun& r : runs) {
            m.seeds.push_back(r.seed);
            m.best_fd.push_back(r.best_fd);
            for (double v : r.generator_best) m.generator_best.push_back(v);
        }
        input.methods.push_back(std::move(m));
    }
    return input;
}

} // namespace coevo
