// Command-line front end: invert, bench, plot, selfcheck.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "invlab/config.hpp"
#include "invlab/experiment.hpp"
#include "invlab/plot.hpp"
#include "invlab/selfcheck.hpp"
#include "invlab/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace invlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailures = 1;
constexpr int kExitConfig = 2;

struct MethodFlags {
    std::string config_path;
    std::string method;
    std::string preset;
    std::optional<double> eta;
    std::vector<double> window;
    std::optional<int> inner_iters;
    std::optional<int> steps;
    std::optional<std::uint64_t> seed;
    std::string out;

    void attach(CLI::App& app, bool with_method = true) {
        app.add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
        if (with_method) {
            app.add_option("--method", method, "vanilla | fixed_point | renoise | easyinv")
                ->check(CLI::IsMember({"vanilla", "fixed_point", "renoise", "easyinv"}));
            app.add_option("--preset", preset, "EasyInv preset: sdxl | sd14")
                ->check(CLI::IsMember({"sdxl", "sd14"}));
            app.add_option("--eta", eta, "EasyInv blend weight");
            app.add_option("--window", window, "EasyInv window lo,hi (fractions of T)")
                ->delimiter(',')
                ->expected(2);
            app.add_option("--inner-iters", inner_iters, "Inner iterations (fixed_point n, renoise K)");
        }
        app.add_option("--steps", steps, "Number of diffusion steps T");
        app.add_option("--seed", seed, "Seed");
        app.add_option("--out", out, "Output path");
    }

    ExperimentConfig load() const {
        ExperimentConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
        if (steps)
            for (auto& m : cfg.methods) m.steps = *steps;
        return cfg;
    }

    InversionConfig build_method(const std::string& name, int default_steps) const {
        InversionConfig m;
        m.steps = steps.value_or(default_steps);
        if (name == "vanilla") {
            m.method = Vanilla{};
        } else if (name == "fixed_point") {
            m.method = FixedPoint{inner_iters.value_or(3), 0.5, 0.5};
        } else if (name == "renoise") {
            m.method = ReNoise{inner_iters.value_or(2)};
        } else {
            EasyInv e = preset.empty() ? EasyInv{} : easyinv_preset(preset);
            if (eta) e.eta = *eta;
            if (window.size() == 2) {
                e.window_lo = window[0];
                e.window_hi = window[1];
            }
            m.method = e;
        }
        m.validate();
        return m;
    }
};

int default_steps(const ExperimentConfig& cfg) {
    return cfg.methods.empty() ? 50 : cfg.methods.front().steps;
}

int cmd_invert(const MethodFlags& f) {
    ExperimentConfig cfg = f.load();
    const InversionConfig method = f.build_method(f.method.empty() ? "vanilla" : f.method, default_steps(cfg));
    const std::uint64_t sample = f.seed.value_or(0);
    const auto data = gen_dataset(cfg.model, static_cast<int>(sample) + 1, cfg.rng_seed, cfg.shape);
    const Latent& z0 = data.back();
    const RunOutcome run = run_single(cfg, method, z0, sample);

    const fs::path dir = f.out.empty() ? fs::path(cfg.out_dir) : fs::path(f.out);
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "trajectory.csv");
        write_trajectory_csv(os, run.trajectory);
    }
    save_trajectory_binary(dir / "trajectory.bin", run.trajectory);
    nlohmann::json j{{"method", run.record.method}, {"seed", sample},     {"mse", run.record.mse},
                     {"psnr_db", run.record.psnr_db}, {"ssim", run.record.ssim},
                     {"evals", run.record.evals},     {"wall_ms", run.record.wall_ms},
                     {"z0", z0.data},                 {"zT", run.trajectory.end().data},
                     {"reconstruction", run.reconstruction.data},
                     {"blended_steps", run.trajectory.blended_steps}};
    std::cout << j.dump() << '\n';
    return kExitOk;
}

int cmd_bench(const MethodFlags& f, bool serial) {
    ExperimentConfig cfg = f.load();
    if (f.seed) cfg.rng_seed = *f.seed;
    if (!f.method.empty()) {
        // Single method against the vanilla baseline.
        const int T = default_steps(cfg);
        InversionConfig base{Vanilla{}, f.steps.value_or(T), "vanilla"};
        InversionConfig chosen = f.build_method(f.method, T);
        cfg.methods = {base};
        if (f.method != "vanilla") cfg.methods.push_back(chosen);
    }
    cfg.validate();
    const fs::path dir = f.out.empty() ? fs::path(cfg.out_dir) : fs::path(f.out);
    const BenchmarkResult result = run_benchmark(cfg, serial ? Execution::serial : Execution::parallel);
    write_benchmark_outputs(result, cfg, dir);

    write_summary_csv(std::cout, result.summary);
    for (const auto& flag : result.flags) std::cout << "FLAG " << flag << '\n';
    const std::size_t failed = result.failures();
    if (failed > 0) {
        std::cerr << failed << " of " << result.report.records.size() << " runs failed; see "
                  << (dir / "errors.csv").string() << '\n';
        return kExitFailures;
    }
    return kExitOk;
}

int cmd_plot(const MethodFlags& f) {
    ExperimentConfig cfg = f.load();
    const int T = default_steps(cfg);
    const std::uint64_t sample = f.seed.value_or(0);
    const auto data = gen_dataset(cfg.model, static_cast<int>(sample) + 1, cfg.rng_seed, cfg.shape);
    const Latent& z0 = data.back();

    const InversionConfig base = f.build_method("vanilla", T);
    const RunOutcome a = run_single(cfg, base, z0, sample);
    std::vector<PlotSeries> series{{"vanilla", &a.trajectory}};
    std::optional<RunOutcome> b;
    const std::string other = f.method.empty() ? "easyinv" : f.method;
    if (other != "vanilla") {
        b = run_single(cfg, f.build_method(other, T), z0, sample);
        series.push_back({other, &b->trajectory});
    }
    const fs::path path = f.out.empty() ? fs::path(cfg.out_dir) / "trajectory.svg" : fs::path(f.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    plot_trajectories(series, z0, path);

    nlohmann::json mid;
    for (const auto& s : series) {
        const auto curve = distance_curve(*s.trajectory, z0);
        mid[s.label] = curve[curve.size() / 2];
    }
    std::cout << nlohmann::json{{"svg", path.string()}, {"midpoint_distance", mid}}.dump() << '\n';
    return kExitOk;
}

int cmd_selfcheck(bool as_json, bool serial) {
    const SelfcheckReport report = selfcheck(serial ? Execution::serial : Execution::parallel);
    if (as_json) {
        std::cout << report.to_json().dump(2) << '\n';
    } else {
        for (const auto& r : report.results)
            std::cout << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.detail << '\n';
    }
    return report.passed() ? kExitOk : kExitFailures;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DDIM inversion laboratory"};
    app.require_subcommand(1);

    MethodFlags invert_flags, bench_flags, plot_flags;
    bool bench_serial = false, check_json = false, check_serial = false;

    auto* invert = app.add_subcommand("invert", "Invert one dataset sample and reconstruct it");
    invert_flags.attach(*invert);
    auto* bench = app.add_subcommand("bench", "Benchmark every configured method over all seeds");
    bench_flags.attach(*bench);
    bench->add_flag("--serial", bench_serial, "Run the serial reference path");
    auto* plot = app.add_subcommand("plot", "Plot vanilla vs another method on one sample (SVG)");
    plot_flags.attach(*plot);
    auto* check = app.add_subcommand("selfcheck", "Run the built-in invariant suites");
    check->add_flag("--json", check_json, "Machine-readable report");
    check->add_flag("--serial", check_serial, "Run the serial reference path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*invert) return cmd_invert(invert_flags);
        if (*bench) return cmd_bench(bench_flags, bench_serial);
        if (*plot) return cmd_plot(plot_flags);
        if (*check) return cmd_selfcheck(check_json, check_serial);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailures;
    }
    return kExitOk;
}
