#include "invlab/selfcheck.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "invlab/config.hpp"
#include "invlab/experiment.hpp"
#include "invlab/inverter.hpp"
#include "invlab/metrics.hpp"

namespace invlab {

bool SelfcheckReport::passed() const {
    for (const auto& r : results)
        if (!r.passed) return false;
    return !results.empty();
}

std::vector<std::string> SelfcheckReport::failures() const {
    std::vector<std::string> out;
    for (const auto& r : results)
        if (!r.passed) out.push_back(r.suite);
    return out;
}

nlohmann::json SelfcheckReport::to_json() const {
    nlohmann::json suites = nlohmann::json::array();
    for (const auto& r : results)
        suites.push_back({{"suite", r.suite}, {"passed", r.passed}, {"detail", r.detail}});
    return {{"passed", passed()}, {"failures", failures()}, {"suites", suites}};
}

namespace {

constexpr int kTrials = 1000;
constexpr double kIdentityTol = 1e-10;

NoiseSchedule random_schedule(std::mt19937_64& rng, int max_steps = 100) {
    std::uniform_int_distribution<int> steps(1, max_steps);
    std::uniform_real_distribution<double> beta(1e-4, 0.1);
    const int T = steps(rng);
    std::vector<double> a(static_cast<std::size_t>(T) + 1, 1.0);
    for (int t = 1; t <= T; ++t) a[t] = a[t - 1] * (1.0 - beta(rng));
    const auto convention = rng() % 2 ? StepConvention::printed : StepConvention::variance_preserving;
    return NoiseSchedule::from_alphas(std::move(a), false, convention);
}

Latent random_latent(std::mt19937_64& rng, std::size_t d, int t) {
    std::normal_distribution<double> normal;
    std::vector<double> v(d);
    for (double& x : v) x = normal(rng);
    return Latent(std::move(v), t);
}

double rel_err(const Latent& got, const Latent& want) {
    const double scale = std::max(norm(want.values()), 1e-300);
    return distance(got.values(), want.values()) / scale;
}

bool bitwise_equal(const Trajectory& a, const Trajectory& b) {
    if (a.latents.size() != b.latents.size()) return false;
    for (std::size_t k = 0; k < a.latents.size(); ++k) {
        const auto& x = a.latents[k].data;
        const auto& y = b.latents[k].data;
        if (x.size() != y.size() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0)
            return false;
    }
    return true;
}

// Noising step written straight from the raw alpha pair, independent of the
// schedule's coefficient accessors. The variance-preserving form goes through
// the implied clean estimate x0 = (z - sqrt(1 - a_prev) eps) / sqrt(a_prev).
Latent raw_noising_step(const NoiseSchedule& s, const Latent& z, int t, const Latent& eps) {
    const double a_now = s.alphas()[t];
    const double a_prev = s.alphas()[t - 1];
    std::vector<double> out(z.dim());
    if (s.convention() == StepConvention::printed) {
        const double ratio = std::sqrt(a_now / a_prev);
        const double diff = std::sqrt(1.0 / a_prev - 1.0) - std::sqrt(1.0 / a_now - 1.0);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = ratio * z.data[i] - ratio * diff * eps.data[i];
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double x0 = (z.data[i] - std::sqrt(1.0 - a_prev) * eps.data[i]) / std::sqrt(a_prev);
            out[i] = std::sqrt(a_now) * x0 + std::sqrt(1.0 - a_now) * eps.data[i];
        }
    }
    return z.with(std::move(out), t);
}

// Runs kTrials independent trials; each returns its worst error (or NaN for
// a structural failure).
CheckResult trial_suite(const std::string& name, Execution exec,
                        const std::function<double(std::mt19937_64&)>& trial, double tol) {
    std::vector<double> worst(kTrials, 0.0);
    for_each_index(kTrials, exec, [&](std::size_t i) {
        std::mt19937_64 rng(0x5eed0000ULL + i);
        try {
            worst[i] = trial(rng);
        } catch (...) {
            worst[i] = std::nan("");
        }
    });
    double max_err = 0.0;
    bool ok = true;
    for (double w : worst) {
        if (!(w <= tol)) ok = false;
        if (std::isnan(w) || w > max_err) max_err = std::isnan(w) ? std::numeric_limits<double>::infinity() : w;
    }
    std::ostringstream detail;
    detail << kTrials << " trials, worst relative error " << max_err;
    return {name, ok, detail.str()};
}

CheckResult round_trip_suite(Execution exec) {
    return trial_suite("step_round_trip", exec, [](std::mt19937_64& rng) {
        const NoiseSchedule s = random_schedule(rng);
        std::uniform_int_distribution<std::size_t> dims(1, 16);
        const std::size_t d = dims(rng);
        double worst = 0.0;
        for (int t = 1; t <= s.steps(); ++t) {
            const Latent z = random_latent(rng, d, t - 1);
            const Latent eps = random_latent(rng, d, t - 1);
            const Latent back = ddim_denoise(s, forward_g(s, z, t, eps), t, eps);
            worst = std::max(worst, rel_err(back, z));
        }
        return worst;
    }, kIdentityTol);
}

CheckResult closed_form_suite(Execution exec) {
    return trial_suite("closed_form_expansion", exec, [](std::mt19937_64& rng) {
        const NoiseSchedule s = random_schedule(rng);
        std::uniform_int_distribution<std::size_t> dims(1, 16);
        const std::size_t d = dims(rng);
        const Latent z0 = random_latent(rng, d, 0);
        std::vector<Latent> eps;
        for (int t = 1; t <= s.steps(); ++t) eps.push_back(random_latent(rng, d, t - 1));
        Latent rec = z0, raw = z0;
        double worst = 0.0;
        for (int t = 1; t <= s.steps(); ++t) {
            rec = forward_g(s, rec, t, eps[t - 1]);
            raw = raw_noising_step(s, raw, t, eps[t - 1]);
            const Latent closed = closed_form_zt(s, z0, eps, t);
            worst = std::max({worst, rel_err(closed, rec), rel_err(closed, raw)});
        }
        return worst;
    }, kIdentityTol);
}

CheckResult diff_suite(Execution exec) {
    return trial_suite("difference_decomposition", exec, [](std::mt19937_64& rng) {
        const NoiseSchedule s = random_schedule(rng);
        std::uniform_int_distribution<std::size_t> dims(1, 16);
        const std::size_t d = dims(rng);
        std::uniform_int_distribution<int> pick(1, s.steps());
        const int t_bar = pick(rng);
        const Latent z0 = random_latent(rng, d, 0);
        std::vector<Latent> eps;
        for (int t = 1; t <= t_bar; ++t) eps.push_back(random_latent(rng, d, t - 1));
        if (!(diff_z0_coefficient(s, t_bar) > 0.0)) return std::numeric_limits<double>::infinity();
        const Latent lhs = diff_decomposition(s, z0, eps, t_bar);
        const Latent a = closed_form_zt(s, z0, eps, t_bar - 1);
        const Latent b = closed_form_zt(s, z0, eps, t_bar);
        std::vector<double> diff(d);
        for (std::size_t i = 0; i < d; ++i) diff[i] = a.data[i] - b.data[i];
        return rel_err(lhs, Latent(diff, t_bar - 1));
    }, kIdentityTol);
}

CheckResult degeneracy_suite() {
    const ExperimentConfig cfg = default_config();
    const auto data = gen_dataset(cfg.model, 20, cfg.rng_seed, cfg.shape);
    const NoiseSchedule s = cfg.schedule.build(50);
    GmmPredictor p(cfg.model, s);
    const Condition y;
    int mismatches = 0;
    for (const auto& z0 : data) {
        const Trajectory base = invert_vanilla(s, p, z0, y);
        for (const char* preset : {"sdxl", "sd14"}) {
            EasyInv e = easyinv_preset(preset);
            e.eta = 1.0;
            mismatches += !bitwise_equal(base, invert_easy(s, p, z0, y, e));
        }
        mismatches += !bitwise_equal(base, invert_fixed_point(s, p, z0, y, FixedPoint{1, 0.5, 0.5}));
        mismatches += !bitwise_equal(base, invert_renoise(s, p, z0, y, ReNoise{1}));
    }
    return {"method_degeneracies", mismatches == 0,
            std::to_string(mismatches) + " mismatching trajectories over 20 seeds"};
}

CheckResult eval_count_suite() {
    const ExperimentConfig cfg = default_config();
    const auto data = gen_dataset(cfg.model, 3, cfg.rng_seed + 1, cfg.shape);
    std::ostringstream bad;
    for (int T : {1, 7, 50}) {
        const NoiseSchedule s = cfg.schedule.build(T);
        for (const auto& z0 : data) {
            auto expect = [&](const char* what, const Trajectory& traj, std::uint64_t want,
                              const EpsilonPredictor& p) {
                if (traj.evals != want || p.eval_count() != want)
                    bad << what << "(T=" << T << ") evals " << traj.evals << " want " << want << "; ";
            };
            {
                GmmPredictor p(cfg.model, s);
                expect("vanilla", invert_vanilla(s, p, z0, {}), T, p);
            }
            {
                GmmPredictor p(cfg.model, s);
                expect("easyinv", invert_easy(s, p, z0, {}, easyinv_preset("sdxl")), T, p);
            }
            for (int n : {1, 2, 3, 5}) {
                GmmPredictor p(cfg.model, s);
                expect("fixed_point", invert_fixed_point(s, p, z0, {}, FixedPoint{n, 0.5, 0.5}),
                       static_cast<std::uint64_t>(n) * T, p);
                GmmPredictor q(cfg.model, s);
                expect("renoise", invert_renoise(s, q, z0, {}, ReNoise{n}),
                       static_cast<std::uint64_t>(n) * T, q);
            }
            {
                GmmPredictor p(cfg.model, s);
                const Trajectory traj = invert_vanilla(s, p, z0, {});
                p.reset_count();
                (void)reconstruct(s, p, traj, {});
                if (p.eval_count() != static_cast<std::uint64_t>(T)) bad << "reconstruct(T=" << T << "); ";
            }
        }
    }
    const std::string detail = bad.str();
    return {"evaluation_counts", detail.empty(), detail.empty() ? "all formulas hold" : detail};
}

CheckResult step_set_suite() {
    std::ostringstream bad;
    auto expect = [&](int T, EasyInv e, std::vector<int> want) {
        const auto got = blend_steps(T, e);
        if (got != want) {
            bad << "T=" << T << " window (" << e.window_lo << ", " << e.window_hi << ") gave {";
            for (int t : got) bad << t << ' ';
            bad << "}; ";
        }
    };
    expect(50, easyinv_preset("sdxl"), {43, 44, 45, 46, 47});
    expect(50, easyinv_preset("sd14"), {3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    expect(20, EasyInv{0.8, 0.25, 0.5, 1}, {6, 7, 8, 9});
    expect(20, EasyInv{0.8, 0.25, 0.5, 2}, {6, 8});

    // The trajectory must record exactly the same steps.
    const ExperimentConfig cfg = default_config();
    const NoiseSchedule s = cfg.schedule.build(50);
    GmmPredictor p(cfg.model, s);
    const auto z0 = gen_dataset(cfg.model, 1, 7, cfg.shape).front();
    const auto traj = invert_easy(s, p, z0, {}, easyinv_preset("sdxl"));
    if (traj.blended_steps != std::vector<int>{43, 44, 45, 46, 47}) bad << "trajectory blend record; ";
    const std::string detail = bad.str();
    return {"easyinv_step_set", detail.empty(), detail.empty() ? "sdxl preset fires at 43..47" : detail};
}

CheckResult metric_suite() {
    std::ostringstream bad;
    std::mt19937_64 rng(99);
    for (int k = 0; k < kTrials; ++k) {
        const Latent a = random_latent(rng, 1 + k % 16, 0);
        const Latent b = random_latent(rng, a.dim(), 0);
        if (mse(a, b) != mse(b, a)) {
            bad << "mse asymmetric; ";
            break;
        }
    }
    Latent img(std::vector<double>(64), 0, GridShape{8, 8});
    for (std::size_t i = 0; i < 64; ++i) img.data[i] = std::sin(0.3 * i) + 0.01 * i;
    if (ssim(img, img) != 1.0) bad << "ssim(a,a) != 1; ";
    if (psnr_from_mse(0.01, 1.0) != 20.0) bad << "psnr(1, 0.01) != 20; ";
    if (psnr(img, img, 1.0) != kPsnrCapDb) bad << "psnr cap; ";
    const std::string detail = bad.str();
    return {"metric_axioms", detail.empty(), detail.empty() ? "ok" : detail};
}

CheckResult score_oracle_suite() {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::uniform_real_distribution<double> var(0.0, 0.3);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + trial % 4;
        GmmModel m;
        for (int c = 0; c < 3; ++c) {
            m.weights.push_back(c == 2 ? 1.0 - 2.0 * 0.3 : 0.3);
            std::vector<double> mu(d);
            for (double& x : mu) x = u(rng);
            m.means.push_back(mu);
            m.variances.push_back(var(rng));
        }
        const NoiseSchedule s = build_subsampled_schedule(BetaSchedule::scaled_linear, 50, 0.00085, 0.012, 1000);
        std::uniform_int_distribution<int> pick(1, 50);
        const int t = pick(rng);
        const double a = s.alpha(t);
        auto log_p = [&](const std::vector<double>& z) {
            double total = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = a * m.variances[c] + 1.0 - a;
                double sq = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    const double r = z[i] - std::sqrt(a) * m.means[c][i];
                    sq += r * r;
                }
                total += m.weights[c] * std::exp(-0.5 * sq / v) / std::pow(2.0 * M_PI * v, 0.5 * d);
            }
            return std::log(total);
        };
        std::vector<double> z(d);
        for (double& x : z) x = u(rng);
        const Latent eps = gmm_epsilon(m, s, Latent(z, t), t, {});
        for (std::size_t i = 0; i < d; ++i) {
            const double h = 1e-5;
            auto zp = z, zm = z;
            zp[i] += h;
            zm[i] -= h;
            const double grad = (log_p(zp) - log_p(zm)) / (2 * h);
            worst = std::max(worst, std::abs(eps.data[i] + std::sqrt(1.0 - a) * grad));
        }
    }
    return {"mixture_score_oracle", worst <= 1e-5, "worst abs error " + std::to_string(worst)};
}

}  // namespace

SelfcheckReport selfcheck(Execution exec) {
    SelfcheckReport report;
    auto run = [&](const std::string& name, auto&& fn) {
        try {
            report.results.push_back(fn());
        } catch (const std::exception& e) {
            report.results.push_back({name, false, std::string("threw: ") + e.what()});
        }
    };
    run("step_round_trip", [&] { return round_trip_suite(exec); });
    run("closed_form_expansion", [&] { return closed_form_suite(exec); });
    run("difference_decomposition", [&] { return diff_suite(exec); });
    run("method_degeneracies", [] { return degeneracy_suite(); });
    run("evaluation_counts", [] { return eval_count_suite(); });
    run("easyinv_step_set", [] { return step_set_suite(); });
    run("metric_axioms", [] { return metric_suite(); });
    run("mixture_score_oracle", [] { return score_oracle_suite(); });
    return report;
}

}  // namespace invlab
