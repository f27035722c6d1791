// Command-line front end: run single experiments, full method comparisons,
// re-analysis of existing results, and synthetic-data dumps.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coevo/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

coevo::ExperimentConfig load_config(const std::string& path) {
    coevo::ExperimentConfig cfg = coevo::ExperimentConfig::load(path);
    if (const char* root = std::getenv("COEVO_OUTPUT_ROOT"); root && *root)
        cfg.output_dir = root;
    return cfg;
}

int cmd_run(const std::string& config_path, const std::string& method_name, std::uint64_t seed) {
    const coevo::ExperimentConfig cfg = load_config(config_path);
    const coevo::MethodConfig* method = cfg.find_method(method_name);
    if (!method) {
        std::cerr << "error: unknown method '" << method_name << "' (configured:";
        for (const auto& m : cfg.methods) std::cerr << ' ' << m.name;
        std::cerr << ")\n";
        return kExitConfig;
    }
    const coevo::RunOutcome o = coevo::execute_run(cfg, *method, seed);
    std::cout << "run " << method_name << " seed " << seed << " -> " << o.dir.string() << "\n";
    if (!o.ok) {
        std::cerr << "error: run failed: " << o.error << "\n";
        return kExitRuntime;
    }
    std::cout << "best_fd " << coevo::iodetail::fmt(o.best_fd) << "\n";
    return kExitOk;
}

int cmd_compare(const std::string& config_path, unsigned workers, bool welch) {
    const coevo::ExperimentConfig cfg = load_config(config_path);
    if (cfg.methods.size() < 2) {
        std::cerr << "error: compare needs at least 2 methods\n";
        return kExitConfig;
    }
    if (cfg.runs_per_method < coevo::kMinRunsForStats) {
        std::cerr << "error: compare needs runs_per_method >= " << coevo::kMinRunsForStats << "\n";
        return kExitConfig;
    }
    if (workers == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = hw > 1 ? hw - 1 : 1;
    }
    std::cout << "comparing " << cfg.methods.size() << " methods x " << cfg.runs_per_method
              << " runs (workers " << workers << ")\n";
    auto [input, outcomes] = coevo::compare_runs(cfg, workers);
    for (const auto& o : outcomes)
        std::cout << (o.ok ? "  done " : "  FAILED ") << o.method << " seed " << o.seed
                  << (o.ok ? " best_fd " + coevo::iodetail::fmt(o.best_fd) : " " + o.error) << "\n";
    const std::filesystem::path dir = coevo::write_analysis(input, cfg.output_dir, welch);
    for (const auto& w : input.warnings) std::cerr << "warning: " << w << "\n";
    if (dir.empty()) {
        std::cerr << "error: no method had enough completed runs to analyze\n";
        return kExitRuntime;
    }
    std::cout << "analysis -> " << dir.string() << "\n";
    return kExitOk;
}

int cmd_stats(const std::string& dir, bool welch) {
    const coevo::AnalysisInput input = coevo::collect_runs(dir);
    for (const auto& w : input.warnings) std::cerr << "warning: " << w << "\n";
    if (input.methods.empty()) {
        std::cerr << "error: no completed runs found under " << dir << "\n";
        return kExitRuntime;
    }
    const std::filesystem::path out = coevo::write_analysis(input, dir, welch);
    if (out.empty()) {
        std::cerr << "error: no method had enough completed runs to analyze\n";
        return kExitRuntime;
    }
    std::cout << "analysis -> " << out.string() << "\n";
    return kExitOk;
}

int cmd_dump_data(const std::string& config_path, std::size_t n, const std::string& out_path,
                  std::uint64_t seed) {
    const coevo::ExperimentConfig cfg = load_config(config_path);
    coevo::SeededStream stream(seed);
    const coevo::Matrix samples = coevo::sample(cfg.mixture, n, stream);
    std::ostringstream out;
    out << "x,y\n";
    for (std::size_t i = 0; i < samples.rows; ++i)
        out << coevo::iodetail::fmt(samples(i, 0)) << ',' << coevo::iodetail::fmt(samples(i, 1))
            << '\n';
    if (out_path.empty() || out_path == "-") {
        std::cout << out.str();
    } else {
        coevo::iodetail::write_file(out_path, out.str());
        std::cout << "wrote " << n << " samples to " << out_path << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coevo: co-evolutionary adversarial training on synthetic 2-D data"};
    app.require_subcommand(1);

    std::string config_path;
    std::string method_name;
    std::string results_dir;
    std::string out_path;
    std::uint64_t seed = 0;
    std::size_t n_samples = 1000;
    unsigned workers = 0;
    bool welch = false;

    CLI::App* run = app.add_subcommand("run", "execute one (method, seed) run");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--method", method_name, "method name from the config")->required();
    run->add_option("--seed", seed, "run seed")->required();

    CLI::App* compare = app.add_subcommand("compare", "run the full method comparison suite");
    compare->add_option("--config", config_path, "experiment config JSON")->required();
    compare->add_option("--workers", workers, "parallel runs (default: cores - 1)");
    compare->add_flag("--welch", welch, "use Welch's t-test instead of pooled variance");

    CLI::App* stats = app.add_subcommand("stats", "recompute analysis from existing run dirs");
    stats->add_option("--dir", results_dir, "results root directory")->required();
    stats->add_flag("--welch", welch, "use Welch's t-test instead of pooled variance");

    CLI::App* dump = app.add_subcommand("dump-data", "write synthetic samples as CSV");
    dump->add_option("--config", config_path, "experiment config JSON")->required();
    dump->add_option("--n", n_samples, "number of samples");
    dump->add_option("--out", out_path, "output file (default: stdout)");
    dump->add_option("--seed", seed, "sampling seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, method_name, seed);
        if (compare->parsed()) return cmd_compare(config_path, workers, welch);
        if (stats->parsed()) return cmd_stats(results_dir, welch);
        if (dump->parsed()) return cmd_dump_data(config_path, n_samples, out_path, seed);
    } catch (const coevo::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
