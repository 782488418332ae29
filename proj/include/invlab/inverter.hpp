#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "invlab/predictor.hpp"
#include "invlab/sampler.hpp"
#include "invlab/schedule.hpp"

namespace invlab {

struct Vanilla {};

/// Averaged fixed-point refinement of the step noise.
struct FixedPoint {
    int inner_iters = 3;
    double w_now = 0.5;
    double w_prev = 0.5;
};

/// Re-estimate the step noise at the newest candidate, K times per step.
struct ReNoise {
    int inner_iters = 2;
};

/// Blend z*_t with z*_{t-1} at every step strictly inside (lo*T, hi*T).
struct EasyInv {
    double eta = 0.8;
    double window_lo = 0.85;
    double window_hi = 0.95;
    /// Blend only every stride-th in-window step, counted from the first.
    int stride = 1;
};

using InversionMethod = std::variant<Vanilla, FixedPoint, ReNoise, EasyInv>;

struct InversionConfig {
    InversionMethod method;
    int steps = 50;
    /// Display name for reports; defaults to the method name.
    std::string label;

    void validate() const;
    std::string_view method_name() const;
    std::string name() const { return label.empty() ? std::string(method_name()) : label; }
};

/// Named EasyInv settings: "sdxl" (eta 0.8, window 0.85..0.95) and
/// "sd14" (eta 0.5, window 0.05..0.25).
EasyInv easyinv_preset(std::string_view name);

/// Timesteps where the blend fires for T steps.
std::vector<int> blend_steps(int steps, const EasyInv& params);

Trajectory invert_vanilla(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                          const Condition& y);
Trajectory invert_fixed_point(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                              const Condition& y, const FixedPoint& params);
Trajectory invert_renoise(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                          const Condition& y, const ReNoise& params);
Trajectory invert_easy(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                       const Condition& y, const EasyInv& params);

/// Dispatches on config.method; config.steps must match the schedule.
Trajectory invert(const NoiseSchedule& s, const EpsilonPredictor& p, const Latent& z0,
                  const Condition& y, const InversionConfig& config);

/// Denoise from the trajectory endpoint back to t = 0.
Latent reconstruct(const NoiseSchedule& s, const EpsilonPredictor& p, const Trajectory& traj,
                   const Condition& y);

/// z*_t expanded as a weighted sum of z_0 and eps_1..eps_t (eps_list[i-1] is eps_i).
Latent closed_form_zt(const NoiseSchedule& s, const Latent& z0, std::span<const Latent> eps_list,
                      int t);

/// z*_{t-1} - z*_t written as a z_0 term, the accumulated noise terms and
/// the -noise_coeff(t) eps_t term.
Latent diff_decomposition(const NoiseSchedule& s, const Latent& z0,
                          std::span<const Latent> eps_list, int t_bar);

/// The z_0 weight of diff_decomposition: prod_{i<t_bar} bar_alpha_i * (1 - bar_alpha_{t_bar}).
double diff_z0_coefficient(const NoiseSchedule& s, int t_bar);

}  // namespace invlab
