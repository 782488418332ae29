#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace invlab {

enum class BetaSchedule { linear, scaled_linear };

BetaSchedule parse_beta_schedule(std::string_view name);
std::string_view to_string(BetaSchedule kind);

/// How the eps weights of the step maps are formed from (alpha[t-1], alpha[t]).
///
/// variance_preserving is the DDIM update for z_t = sqrt(a_t) z_0 + sqrt(1 - a_t) n:
///   noise_coeff  = sqrt(a_t)     (sqrt(1/a_t - 1) - sqrt(1/a_{t-1} - 1))
///   noise_weight = sqrt(a_{t-1}) (sqrt(1/a_{t-1} - 1) - sqrt(1/a_t - 1))
/// printed drops the sqrt(a) prefactors in favour of the common textbook form:
///   noise_coeff  = sqrt(a_t / a_{t-1}) (sqrt(1/a_t - 1) - sqrt(1/a_{t-1} - 1))
///   noise_weight = sqrt(1/a_{t-1} - 1) - sqrt(1/a_t - 1)
/// Both coincide whenever a_{t-1} = 1 and both make the two maps exact
/// inverses, but only variance_preserving integrates the probability-flow ODE
/// of the process the analytic predictors model; printed inversions diverge.
enum class StepConvention { variance_preserving, printed };

StepConvention parse_step_convention(std::string_view name);
std::string_view to_string(StepConvention convention);

/// Cumulative signal coefficients alpha[0..T] with alpha[0] = 1 (clean data).
///
/// Immutable once built. All step coefficients used by the denoising and
/// noising maps are derived from adjacent pairs (alpha[t-1], alpha[t]).
class NoiseSchedule {
public:
    /// Validates alpha[0] == 1, alpha[T] > 0 and strict decrease. With
    /// allow_flat, equal neighbours are accepted (test fixtures only).
    static NoiseSchedule from_alphas(std::vector<double> alpha, bool allow_flat = false,
                                     StepConvention convention = StepConvention::variance_preserving);

    NoiseSchedule with_convention(StepConvention convention) const;
    StepConvention convention() const { return convention_; }

    int steps() const { return static_cast<int>(alpha_.size()) - 1; }
    double alpha(int t) const;
    const std::vector<double>& alphas() const { return alpha_; }

    /// sqrt(alpha[t] / alpha[t-1]).
    double bar_alpha(int t) const;

    /// Nonnegative weight on eps in the noising map
    ///   z_t = bar_alpha(t) z_{t-1} + noise_coeff(t) eps.
    double noise_coeff(int t) const;

    struct DenoiseCoeffs {
        double scale;         // sqrt(alpha[t-1] / alpha[t]) >= 1
        double noise_weight;  // sqrt(1/alpha[t-1] - 1) - sqrt(1/alpha[t] - 1) <= 0
    };
    DenoiseCoeffs denoise_coeffs(int t) const;

private:
    NoiseSchedule(std::vector<double> alpha, StepConvention convention)
        : alpha_(std::move(alpha)), convention_(convention) {}
    void check_step(int t) const;

    std::vector<double> alpha_;
    StepConvention convention_;
};

/// Per-step betas interpolated over s = 1..T (linearly, or linearly in
/// sqrt-space for scaled_linear) and accumulated into alpha.
NoiseSchedule build_schedule(BetaSchedule kind, int steps, double beta_start, double beta_end,
                             StepConvention convention = StepConvention::variance_preserving);

/// Betas spread over `train_steps` fine steps, then the cumulative product
/// sampled at `steps` evenly spaced points. Equivalent to build_schedule
/// when train_steps == steps.
NoiseSchedule build_subsampled_schedule(BetaSchedule kind, int steps, double beta_start,
                                        double beta_end, int train_steps,
                                        StepConvention convention = StepConvention::variance_preserving);

}  // namespace invlab
