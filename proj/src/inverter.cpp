#include "invlab/inverter.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace invlab {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void check_start(const NoiseSchedule& s, const Latent& z0) {
    if (z0.t_index != 0) throw std::invalid_argument("inversion must start from a latent tagged 0");
    if (s.steps() < 1) throw std::invalid_argument("inversion needs T >= 1");
}

struct StepResult {
    Latent next;
    Latent eps;
};

// Shared driver: step(t, z_prev) produces z*_t and the noise it committed to.
template <class StepFn>
Trajectory run_inversion(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                         StepFn&& step) {
    check_start(s, z0);
    using clock = std::chrono::steady_clock;
    const int T = s.steps();
    Trajectory traj;
    traj.latents.reserve(static_cast<std::size_t>(T) + 1);
    traj.eps.reserve(static_cast<std::size_t>(T));
    traj.step_seconds.reserve(static_cast<std::size_t>(T));
    traj.latents.push_back(z0);
    const auto evals_before = p.eval_count();
    for (int t = 1; t <= T; ++t) {
        const auto t0 = clock::now();
        StepResult r = step(t, traj.latents.back(), traj);
        traj.step_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
        traj.eps.push_back(std::move(r.eps));
        traj.latents.push_back(std::move(r.next));
    }
    traj.evals = p.eval_count() - evals_before;
    return traj;
}

Latent mix(const Latent& a, double wa, const Latent& b, double wb) {
    std::vector<double> out(a.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = wa * a.data[i] + wb * b.data[i];
    return a.with(std::move(out), a.t_index);
}

bool in_window(int t, int T, double lo, double hi) {
#ifdef INVLAB_MUTATE_BLEND_ENDPOINTS
    return t >= std::floor(lo * T) && t <= std::ceil(hi * T);
#else
    return lo * T < t && t < hi * T;
#endif
}

}  // namespace

void InversionConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("inversion config needs T >= 1");
    std::visit(overloaded{
                   [](const Vanilla&) {},
                   [](const FixedPoint& fp) {
                       if (fp.inner_iters < 1)
                           throw std::invalid_argument("fixed_point needs inner_iters >= 1");
                       if (!std::isfinite(fp.w_now) || !std::isfinite(fp.w_prev) ||
                           std::abs(fp.w_now + fp.w_prev - 1.0) > 1e-12)
                           throw std::invalid_argument("fixed_point mix weights must sum to 1");
                   },
                   [](const ReNoise& rn) {
                       if (rn.inner_iters < 1)
                           throw std::invalid_argument("renoise needs inner_iters >= 1");
                   },
                   [](const EasyInv& e) {
                       if (!(e.eta >= 0.0 && e.eta <= 1.0))
                           throw std::invalid_argument("easyinv eta must lie in [0, 1]");
                       if (!(e.window_lo >= 0.0 && e.window_lo < e.window_hi && e.window_hi <= 1.0))
                           throw std::invalid_argument("easyinv window needs 0 <= lo < hi <= 1");
                       if (e.stride < 1) throw std::invalid_argument("easyinv stride must be >= 1");
                   },
               },
               method);
}

std::string_view InversionConfig::method_name() const {
    return std::visit(overloaded{
                          [](const Vanilla&) { return std::string_view("vanilla"); },
                          [](const FixedPoint&) { return std::string_view("fixed_point"); },
                          [](const ReNoise&) { return std::string_view("renoise"); },
                          [](const EasyInv&) { return std::string_view("easyinv"); },
                      },
                      method);
}

EasyInv easyinv_preset(std::string_view name) {
    if (name == "sdxl") return EasyInv{0.8, 0.85, 0.95, 1};
    if (name == "sd14") return EasyInv{0.5, 0.05, 0.25, 1};
    throw std::invalid_argument("unknown easyinv preset: " + std::string(name));
}

std::vector<int> blend_steps(int steps, const EasyInv& params) {
    std::vector<int> out;
    int seen = 0;
    for (int t = 1; t <= steps; ++t) {
        if (!in_window(t, steps, params.window_lo, params.window_hi)) continue;
        if (seen++ % params.stride == 0) out.push_back(t);
    }
    return out;
}

Trajectory invert_vanilla(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                          const Condition& y) {
    return run_inversion(s, p, z0, [&](int t, const Latent& prev, Trajectory&) {
        Latent eps = p.predict(prev, t - 1, y);
        Latent next = forward_g(s, prev, t, eps);
        return StepResult{std::move(next), std::move(eps)};
    });
}

Trajectory invert_fixed_point(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                              const Condition& y, const FixedPoint& params) {
    InversionConfig{params, s.steps(), {}}.validate();
    return run_inversion(s, p, z0, [&](int t, const Latent& prev, Trajectory&) {
        Latent eps_prev = p.predict(prev, t - 1, y);
        Latent committed = eps_prev;
        Latent candidate = forward_g(s, prev, t, committed);
        for (int k = 1; k < params.inner_iters; ++k) {
            Latent eps_now = p.predict(candidate, t - 1, y);
            committed = mix(eps_now, params.w_now, eps_prev, params.w_prev);
            candidate = forward_g(s, prev, t, committed);
            eps_prev = std::move(eps_now);
        }
        return StepResult{std::move(candidate), std::move(committed)};
    });
}

Trajectory invert_renoise(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                          const Condition& y, const ReNoise& params) {
    InversionConfig{params, s.steps(), {}}.validate();
    return run_inversion(s, p, z0, [&](int t, const Latent& prev, Trajectory&) {
        Latent eps = p.predict(prev, t - 1, y);
        Latent candidate = forward_g(s, prev, t, eps);
        for (int k = 1; k < params.inner_iters; ++k) {
            eps = p.predict(candidate, t - 1, y);
            candidate = forward_g(s, prev, t, eps);
        }
        return StepResult{std::move(candidate), std::move(eps)};
    });
}

Trajectory invert_easy(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                       const Condition& y, const EasyInv& params) {
    InversionConfig{params, s.steps(), {}}.validate();
    const auto fires = blend_steps(s.steps(), params);
    std::vector<bool> blend_at(static_cast<std::size_t>(s.steps()) + 1, false);
    for (int t : fires) blend_at[static_cast<std::size_t>(t)] = true;

    return run_inversion(s, p, z0, [&](int t, const Latent& prev, Trajectory& traj) {
        Latent eps = p.predict(prev, t - 1, y);
        Latent next = forward_g(s, prev, t, eps);
        if (blend_at[static_cast<std::size_t>(t)] && params.eta != 1.0) {
            next = mix(next, params.eta, prev, 1.0 - params.eta);
            traj.blended_steps.push_back(t);
        }
        return StepResult{std::move(next), std::move(eps)};
    });
}

Trajectory invert(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                  const Condition& y, const InversionConfig& config) {
    config.validate();
    if (config.steps != s.steps())
        throw std::invalid_argument("inversion config T does not match the schedule");
    return std::visit(overloaded{
                          [&](const Vanilla&) { return invert_vanilla(s, p, z0, y); },
                          [&](const FixedPoint& m) { return invert_fixed_point(s, p, z0, y, m); },
                          [&](const ReNoise& m) { return invert_renoise(s, p, z0, y, m); },
                          [&](const EasyInv& m) { return invert_easy(s, p, z0, y, m); },
                      },
                      config.method);
}

Latent reconstruct(const NoiseSchedule& s, const EpsilonPredictor& p, const Trajectory& traj,
                   const Condition& y) {
    if (traj.latents.empty() || traj.end().t_index != s.steps())
        throw std::invalid_argument("reconstruct: trajectory does not end at T");
    return sample(s, p, traj.end(), y).end();
}

Latent closed_form_zt(const NoiseSchedule& s, const Latent& z0, std::span<const Latent> eps_list,
                      int t) {
    if (t < 0 || t > s.steps()) throw std::out_of_range("closed_form_zt: timestep out of range");
    if (eps_list.size() < static_cast<std::size_t>(t))
        throw std::invalid_argument("closed_form_zt: not enough eps vectors");
    std::vector<double> out(z0.dim(), 0.0);
    // Walk i = t..1 keeping prod_{j > i} bar_alpha_j.
    double tail = 1.0;
    for (int i = t; i >= 1; --i) {
        const Latent& e = eps_list[static_cast<std::size_t>(i - 1)];
        require_same_dim(e.dim(), z0.dim(), "closed_form_zt");
        const double w = s.noise_coeff(i) * tail;
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * e.data[k];
        tail *= s.bar_alpha(i);
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += tail * z0.data[k];
    return z0.with(std::move(out), t);
}

double diff_z0_coefficient(const NoiseSchedule& s, int t_bar) {
    double head = 1.0;
    for (int i = 1; i < t_bar; ++i) head *= s.bar_alpha(i);
    return head * (1.0 - s.bar_alpha(t_bar));
}

Latent diff_decomposition(const NoiseSchedule& s, const Latent& z0,
                          std::span<const Latent> eps_list, int t_bar) {
    if (t_bar < 1 || t_bar > s.steps())
        throw std::out_of_range("diff_decomposition: t_bar out of range");
    if (eps_list.size() < static_cast<std::size_t>(t_bar))
        throw std::invalid_argument("diff_decomposition: not enough eps vectors");
    const double shrink = 1.0 - s.bar_alpha(t_bar);
    std::vector<double> acc(z0.dim(), 0.0);
    double tail = 1.0;
    for (int i = t_bar - 1; i >= 1; --i) {
        const Latent& e = eps_list[static_cast<std::size_t>(i - 1)];
        require_same_dim(e.dim(), z0.dim(), "diff_decomposition");
        const double w = s.noise_coeff(i) * tail;
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * e.data[k];
        tail *= s.bar_alpha(i);
    }
    const double z0_weight = tail * shrink;
    const Latent& last = eps_list[static_cast<std::size_t>(t_bar - 1)];
    require_same_dim(last.dim(), z0.dim(), "diff_decomposition");
    const double last_weight = -s.noise_coeff(t_bar);
    std::vector<double> out(z0.dim());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = z0_weight * z0.data[k] + shrink * acc[k] + last_weight * last.data[k];
    return z0.with(std::move(out), t_bar - 1);
}

}  // namespace invlab
