#pragma once

#include <cstdint>
#include <vector>

#include "invlab/latent.hpp"
#include "invlab/predictor.hpp"
#include "invlab/schedule.hpp"

namespace invlab {

/// Recorded run of a denoising or inversion loop.
///
/// latents[0] is the starting point and latents[k + 1] the result of step k;
/// eps[k] is the noise estimate that step k committed to.
struct Trajectory {
    std::vector<Latent> latents;
    std::vector<Latent> eps;
    std::vector<double> step_seconds;
    /// Inversion timesteps where a latent blend was applied.
    std::vector<int> blended_steps;
    std::uint64_t evals = 0;

    std::size_t steps() const { return eps.size(); }
    const Latent& start() const { return latents.front(); }
    const Latent& end() const { return latents.back(); }
    double total_seconds() const;

    /// Tags strictly monotone, one eps and one timing per step.
    void validate() const;
};

/// One deterministic DDIM denoising step z_t -> z_{t-1}; one predictor call.
Latent ddim_step(const NoiseSchedule& schedule, const EpsilonPredictor& predictor, const Latent& z_t,
                 int t, const Condition& y);

/// The denoising update with a given eps, no predictor involved.
Latent ddim_denoise(const NoiseSchedule& schedule, const Latent& z_t, int t, const Latent& eps);

/// Noising map z*_t = bar_alpha(t) z_{t-1} + noise_coeff(t) eps.
Latent forward_g(const NoiseSchedule& schedule, const Latent& z_prev, int t, const Latent& eps);

/// Full denoising loop t = T -> 1; exactly T predictor calls.
Trajectory sample(const NoiseSchedule& schedule, const EpsilonPredictor& predictor,
                  const Latent& z_T, const Condition& y);

}  // namespace invlab
