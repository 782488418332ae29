#include "invlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace invlab {

std::vector<Latent> gen_dataset(const GmmModel& model, int n, std::uint64_t seed,
                                std::optional<GridShape> shape) {
    if (n < 1) throw std::invalid_argument("gen_dataset needs n >= 1");
    model.validate();
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(model.weights.begin(), model.weights.end());
    std::normal_distribution<double> normal;
    std::vector<Latent> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const std::size_t c = pick(rng);
        const double sd = std::sqrt(model.variances[c]);
        std::vector<double> x(model.dim());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = model.means[c][i] + sd * normal(rng);
        out.emplace_back(std::move(x), 0, shape);
    }
    return out;
}

std::unique_ptr<EpsilonPredictor> make_predictor(const ExperimentConfig& cfg,
                                                 const NoiseSchedule& schedule) {
    auto base = std::make_unique<GmmPredictor>(cfg.model, schedule);
    if (cfg.perturbation.mode == Perturbation::none) return base;
    return perturbed_predictor(std::move(base), cfg.perturbation.mode, cfg.perturbation.magnitude,
                               cfg.perturbation.seed);
}

std::size_t BenchmarkResult::failures() const {
    std::size_t n = 0;
    for (const auto& r : report.records) n += r.ok() ? 0 : 1;
    return n;
}

RunOutcome run_single(const ExperimentConfig& cfg, const InversionConfig& method,
                      const Latent& z0, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    const NoiseSchedule schedule = cfg.schedule.build(method.steps);
    const auto predictor = make_predictor(cfg, schedule);

    const auto t0 = clock::now();
    Trajectory traj = invert(schedule, *predictor, z0, cfg.condition, method);
    const double wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    Latent rec = reconstruct(schedule, *predictor, traj, cfg.condition);
    rec.validate();

    RunRecord r;
    r.method = method.name();
    r.seed = seed;
    r.mse = mse(rec, z0);
    r.psnr_db = psnr_from_mse(r.mse, cfg.metric_peak);
    Latent a = z0, b = rec;
    if (!a.shape) a.shape = b.shape = GridShape{1, a.dim()};
    r.ssim = ssim(a, b, SsimParams{SsimWindow::global, 0.01, 0.03, cfg.metric_peak});
    r.evals = traj.evals;
    r.wall_ms = wall_ms;
    return {std::move(traj), std::move(rec), std::move(r)};
}

BenchmarkResult run_benchmark(const ExperimentConfig& cfg, Execution exec) {
    cfg.validate();
    const auto data = gen_dataset(cfg.model, cfg.n_seeds, cfg.rng_seed, cfg.shape);
    const std::size_t n_seeds = data.size();
    const std::size_t jobs = cfg.methods.size() * n_seeds;

    BenchmarkResult result;
    result.report.records.resize(jobs);
    std::vector<double> midpoint(jobs, std::nan(""));

    for_each_index(jobs, exec, [&](std::size_t job) {
        const auto& method = cfg.methods[job / n_seeds];
        const std::size_t seed = job % n_seeds;
        RunRecord& slot = result.report.records[job];
        try {
            auto outcome = run_single(cfg, method, data[seed], seed);
            const auto& pts = outcome.trajectory.latents;
            midpoint[job] = distance(pts[pts.size() / 2].values(), data[seed].values());
            slot = std::move(outcome.record);
        } catch (const std::exception& e) {
            slot = RunRecord{};
            slot.method = method.name();
            slot.seed = seed;
            slot.error = e.what();
        }
    });

    result.summary = result.report.aggregate();
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            const double v = midpoint[m * n_seeds + s];
            if (std::isnan(v)) continue;
            total += v;
            ++count;
        }
        if (count) result.midpoint_distance[cfg.methods[m].name()] = total / count;
    }

    // EasyInv's central claim: no worse than vanilla. Flag any preset that loses.
    const AggregateRow* vanilla = nullptr;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m)
        if (std::holds_alternative<Vanilla>(cfg.methods[m].method))
            vanilla = result.report.find(result.summary, cfg.methods[m].name());
    if (vanilla) {
        bool any_easy = false, any_win = false;
        for (const auto& m : cfg.methods) {
            if (!std::holds_alternative<EasyInv>(m.method)) continue;
            const AggregateRow* row = result.report.find(result.summary, m.name());
            if (!row) continue;
            any_easy = true;
            if (row->mse.mean <= vanilla->mse.mean) {
                any_win = true;
            } else {
                result.flags.push_back(m.name() + "_mse_exceeds_vanilla");
            }
        }
        if (any_easy && !any_win) result.flags.push_back("easyinv_never_matches_vanilla");
    }
    return result;
}

void write_benchmark_outputs(const BenchmarkResult& result, const ExperimentConfig& cfg,
                             const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream os(dir / name);
        if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
        return os;
    };
    {
        auto os = open("report.csv");
        write_report_csv(os, result.report);
    }
    {
        auto os = open("summary.csv");
        write_summary_csv(os, result.summary);
    }
    if (result.failures() > 0) {
        auto os = open("errors.csv");
        os << "method,seed,error\n";
        for (const auto& r : result.report.records)
            if (!r.ok()) os << r.method << ',' << r.seed << ",\"" << r.error << "\"\n";
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.summary) {
        rows.push_back({{"method", r.method},
                        {"runs", r.runs},
                        {"failures", r.failures},
                        {"mse_mean", r.mse.mean},
                        {"mse_std", r.mse.std},
                        {"psnr_db_mean", r.psnr_db.mean},
                        {"ssim_mean", r.ssim.mean},
                        {"evals_mean", r.evals.mean},
                        {"wall_ms_mean", r.wall_ms.mean},
                        {"lpips", nullptr}});
    }
    nlohmann::json j{{"config", to_json(cfg)},
                     {"summary", rows},
                     {"midpoint_distance", result.midpoint_distance},
                     {"flags", result.flags}};
    auto os = open("report.json");
    os << j.dump(2) << '\n';
}

}  // namespace invlab
