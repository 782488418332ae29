#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "invlab/latent.hpp"
#include "invlab/schedule.hpp"

namespace invlab {

/// Deterministic noise estimator eps(z, t, y).
///
/// Every call to predict() bumps a per-instance counter by one. The counter is
/// not synchronized: give each concurrent run its own instance via clone().
class EpsilonPredictor {
public:
    virtual ~EpsilonPredictor() = default;

    Latent predict(const Latent& z, int t, const Condition& y) const;

    std::uint64_t eval_count() const { return evals_; }
    void reset_count() { evals_ = 0; }

    /// Deep copy with a zeroed counter.
    virtual std::unique_ptr<EpsilonPredictor> clone() const = 0;

protected:
    virtual std::vector<double> evaluate(std::span<const double> z, int t,
                                         const Condition& y) const = 0;

private:
    mutable std::uint64_t evals_ = 0;
};

/// Isotropic Gaussian mixture over clean latents.
struct GmmModel {
    std::vector<double> weights;
    std::vector<std::vector<double>> means;
    std::vector<double> variances;
    /// Condition token -> component indices. A null token uses every component.
    std::map<std::string, std::vector<std::size_t>> conditions;

    std::size_t components() const { return weights.size(); }
    std::size_t dim() const { return means.empty() ? 0 : means.front().size(); }

    void validate() const;
    /// Indices selected by the token; throws for an unknown name.
    std::vector<std::size_t> active_components(const Condition& y) const;
};

/// Exact eps for the mixture diffused by z_t = sqrt(a_t) z_0 + sqrt(1 - a_t) n:
///   eps(z, t) = -sqrt(1 - a_t) grad log p_t(z).
/// Returns the zero vector where 1 - a_t == 0 (t = 0).
Latent gmm_epsilon(const GmmModel& model, const NoiseSchedule& schedule, const Latent& z, int t,
                   const Condition& y);

class GmmPredictor final : public EpsilonPredictor {
public:
    GmmPredictor(GmmModel model, NoiseSchedule schedule);

    const GmmModel& model() const { return model_; }
    const NoiseSchedule& schedule() const { return schedule_; }
    std::unique_ptr<EpsilonPredictor> clone() const override;

protected:
    std::vector<double> evaluate(std::span<const double> z, int t,
                                 const Condition& y) const override;

private:
    GmmModel model_;
    NoiseSchedule schedule_;
};

class ZeroPredictor final : public EpsilonPredictor {
public:
    explicit ZeroPredictor(std::size_t dim);
    std::unique_ptr<EpsilonPredictor> clone() const override;

protected:
    std::vector<double> evaluate(std::span<const double> z, int t,
                                 const Condition& y) const override;

private:
    std::size_t dim_;
};

enum class Perturbation { none, additive_bias, quantize };

Perturbation parse_perturbation(std::string_view name);
std::string_view to_string(Perturbation mode);

/// Wraps another predictor with a controlled, deterministic degradation.
///
/// additive_bias: eps + magnitude * |eps| * u_t, with u_t a unit vector drawn
/// from (seed, t). quantize: each component rounded to the nearest multiple of
/// magnitude (ties away from zero). magnitude == 0 passes the inner output
/// through untouched.
class PerturbedPredictor final : public EpsilonPredictor {
public:
    PerturbedPredictor(std::unique_ptr<EpsilonPredictor> inner, Perturbation mode,
                       double magnitude, std::uint64_t seed);

    std::unique_ptr<EpsilonPredictor> clone() const override;

    /// The unit bias direction used at timestep t for dimension d.
    std::vector<double> bias_direction(int t, std::size_t dim) const;

protected:
    std::vector<double> evaluate(std::span<const double> z, int t,
                                 const Condition& y) const override;

private:
    std::unique_ptr<EpsilonPredictor> inner_;
    Perturbation mode_;
    double magnitude_;
    std::uint64_t seed_;
};

std::unique_ptr<EpsilonPredictor> perturbed_predictor(std::unique_ptr<EpsilonPredictor> inner,
                                                      Perturbation mode, double magnitude,
                                                      std::uint64_t seed);
std::unique_ptr<EpsilonPredictor> zero_predictor(std::size_t dim);

}  // namespace invlab
