#include "invlab/sampler.hpp"

#include <chrono>
#include <numeric>
#include <stdexcept>

namespace invlab {

double Trajectory::total_seconds() const {
    return std::accumulate(step_seconds.begin(), step_seconds.end(), 0.0);
}

void Trajectory::validate() const {
    if (latents.empty()) throw std::logic_error("trajectory has no start latent");
    if (latents.size() != eps.size() + 1) throw std::logic_error("trajectory eps count mismatch");
    if (step_seconds.size() != eps.size()) throw std::logic_error("trajectory timing count mismatch");
    if (latents.size() < 2) return;
    const bool up = latents[1].t_index > latents[0].t_index;
    for (std::size_t k = 1; k < latents.size(); ++k) {
        const int prev = latents[k - 1].t_index;
        const int now = latents[k].t_index;
        if (up ? now <= prev : now >= prev)
            throw std::logic_error("trajectory timestep tags are not strictly monotone");
    }
}

Latent ddim_denoise(const NoiseSchedule& schedule, const Latent& z_t, int t, const Latent& eps) {
    require_same_dim(z_t.dim(), eps.dim(), "ddim_denoise");
    if (z_t.t_index != t) throw std::invalid_argument("ddim_denoise: latent is not tagged t");
    const auto [scale, weight] = schedule.denoise_coeffs(t);
    std::vector<double> out(z_t.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * z_t.data[i] + weight * eps.data[i];
    return z_t.with(std::move(out), t - 1);
}

Latent ddim_step(const NoiseSchedule& schedule, const EpsilonPredictor& predictor, const Latent& z_t,
                 int t, const Condition& y) {
    if (t < 1 || t > schedule.steps()) throw std::out_of_range("ddim_step: timestep out of range");
    if (z_t.t_index != t) throw std::invalid_argument("ddim_step: latent is not tagged t");
    const Latent eps = predictor.predict(z_t, t, y);
    return ddim_denoise(schedule, z_t, t, eps);
}

Latent forward_g(const NoiseSchedule& schedule, const Latent& z_prev, int t, const Latent& eps) {
    require_same_dim(z_prev.dim(), eps.dim(), "forward_g");
    if (z_prev.t_index != t - 1) throw std::invalid_argument("forward_g: latent is not tagged t-1");
    const double keep = schedule.bar_alpha(t);
    const double add = schedule.noise_coeff(t);
    std::vector<double> out(z_prev.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = keep * z_prev.data[i] + add * eps.data[i];
    return z_prev.with(std::move(out), t);
}

Trajectory sample(const NoiseSchedule& schedule, const EpsilonPredictor& predictor,
                  const Latent& z_T, const Condition& y) {
    const int T = schedule.steps();
    if (z_T.t_index != T) throw std::invalid_argument("sample: start latent must be tagged T");
    using clock = std::chrono::steady_clock;

    Trajectory traj;
    traj.latents.reserve(static_cast<std::size_t>(T) + 1);
    traj.eps.reserve(static_cast<std::size_t>(T));
    traj.step_seconds.reserve(static_cast<std::size_t>(T));
    traj.latents.push_back(z_T);
    const auto evals_before = predictor.eval_count();

    for (int t = T; t >= 1; --t) {
        const auto t0 = clock::now();
        const Latent& z = traj.latents.back();
        Latent eps = predictor.predict(z, t, y);
        Latent next = ddim_denoise(schedule, z, t, eps);
        traj.step_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
        traj.eps.push_back(std::move(eps));
        traj.latents.push_back(std::move(next));
    }
    traj.evals = predictor.eval_count() - evals_before;
    return traj;
}

}  // namespace invlab
