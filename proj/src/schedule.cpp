#include "invlab/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace invlab {

BetaSchedule parse_beta_schedule(std::string_view name) {
    if (name == "linear-beta" || name == "linear") return BetaSchedule::linear;
    if (name == "scaled-linear-beta" || name == "scaled_linear") return BetaSchedule::scaled_linear;
    throw std::invalid_argument("unknown beta schedule: " + std::string(name));
}

std::string_view to_string(BetaSchedule kind) {
    return kind == BetaSchedule::linear ? "linear-beta" : "scaled-linear-beta";
}

StepConvention parse_step_convention(std::string_view name) {
    if (name == "variance-preserving" || name == "variance_preserving") return StepConvention::variance_preserving;
    if (name == "printed") return StepConvention::printed;
    throw std::invalid_argument("unknown step convention: " + std::string(name));
}

std::string_view to_string(StepConvention convention) {
    return convention == StepConvention::printed ? "printed" : "variance-preserving";
}

NoiseSchedule NoiseSchedule::from_alphas(std::vector<double> alpha, bool allow_flat,
                                         StepConvention convention) {
    if (alpha.size() < 2) throw std::invalid_argument("schedule needs at least one step");
    if (alpha.front() != 1.0) throw std::invalid_argument("alpha[0] must equal 1");
    for (std::size_t t = 1; t < alpha.size(); ++t) {
        const double a = alpha[t];
        if (!std::isfinite(a) || a <= 0.0 || a > 1.0)
            throw std::invalid_argument("alpha[" + std::to_string(t) + "] outside (0, 1]");
        const bool ok = allow_flat ? a <= alpha[t - 1] : a < alpha[t - 1];
        if (!ok) throw std::invalid_argument("alpha must decrease strictly in t");
    }
    return NoiseSchedule(std::move(alpha), convention);
}

NoiseSchedule NoiseSchedule::with_convention(StepConvention convention) const {
    return NoiseSchedule(alpha_, convention);
}

void NoiseSchedule::check_step(int t) const {
    if (t < 1 || t > steps())
        throw std::out_of_range("timestep " + std::to_string(t) + " outside [1, " +
                                std::to_string(steps()) + "]");
}

double NoiseSchedule::alpha(int t) const {
    if (t < 0 || t > steps()) throw std::out_of_range("timestep " + std::to_string(t));
    return alpha_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::bar_alpha(int t) const {
    check_step(t);
    return std::sqrt(alpha_[t] / alpha_[t - 1]);
}

double NoiseSchedule::noise_coeff(int t) const {
    check_step(t);
    const double a_now = alpha_[t];
    const double a_prev = alpha_[t - 1];
    const double prefactor =
        convention_ == StepConvention::printed ? std::sqrt(a_now / a_prev) : std::sqrt(a_now);
    const double gap = std::sqrt(1.0 / a_now - 1.0) - std::sqrt(1.0 / a_prev - 1.0);
#ifdef INVLAB_MUTATE_NOISE_SIGN
    return -prefactor * gap;
#else
    return prefactor * gap;
#endif
}

NoiseSchedule::DenoiseCoeffs NoiseSchedule::denoise_coeffs(int t) const {
    check_step(t);
    const double a_now = alpha_[t];
    const double a_prev = alpha_[t - 1];
    const double gap = std::sqrt(1.0 / a_prev - 1.0) - std::sqrt(1.0 / a_now - 1.0);
    const double prefactor = convention_ == StepConvention::printed ? 1.0 : std::sqrt(a_prev);
    return {std::sqrt(a_prev / a_now), prefactor * gap};
}

namespace {

std::vector<double> make_betas(BetaSchedule kind, int n, double beta_start, double beta_end) {
    if (n < 1) throw std::invalid_argument("schedule needs T >= 1");
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end)
        throw std::invalid_argument("beta bounds must satisfy 0 < beta_start <= beta_end < 1");
    std::vector<double> betas(static_cast<std::size_t>(n));
    const double lo = kind == BetaSchedule::scaled_linear ? std::sqrt(beta_start) : beta_start;
    const double hi = kind == BetaSchedule::scaled_linear ? std::sqrt(beta_end) : beta_end;
    for (int s = 0; s < n; ++s) {
        const double frac = n == 1 ? 0.0 : static_cast<double>(s) / (n - 1);
        const double b = lo + (hi - lo) * frac;
        betas[static_cast<std::size_t>(s)] = kind == BetaSchedule::scaled_linear ? b * b : b;
    }
    return betas;
}

}  // namespace

NoiseSchedule build_schedule(BetaSchedule kind, int steps, double beta_start, double beta_end,
                             StepConvention convention) {
    return build_subsampled_schedule(kind, steps, beta_start, beta_end, steps, convention);
}

NoiseSchedule build_subsampled_schedule(BetaSchedule kind, int steps, double beta_start,
                                        double beta_end, int train_steps, StepConvention convention) {
    if (steps < 1) throw std::invalid_argument("schedule needs T >= 1");
    if (train_steps < steps) throw std::invalid_argument("train_steps must be >= T");
    const auto betas = make_betas(kind, train_steps, beta_start, beta_end);
    std::vector<double> fine(betas.size() + 1);
    fine[0] = 1.0;
    for (std::size_t s = 0; s < betas.size(); ++s) fine[s + 1] = fine[s] * (1.0 - betas[s]);

    std::vector<double> alpha(static_cast<std::size_t>(steps) + 1);
    for (int t = 0; t <= steps; ++t) {
        // Integer arithmetic keeps the endpoints exact: t = steps maps to train_steps.
        const auto idx = static_cast<std::size_t>(
            (static_cast<long long>(t) * train_steps + steps / 2) / steps);
        alpha[static_cast<std::size_t>(t)] = fine[idx];
    }
    return NoiseSchedule::from_alphas(std::move(alpha), false, convention);
}

}  // namespace invlab
