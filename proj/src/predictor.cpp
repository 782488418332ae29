#include "invlab/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace invlab {

Latent EpsilonPredictor::predict(const Latent& z, int t, const Condition& y) const {
    ++evals_;
    return z.with(evaluate(z.values(), t, y), t);
}

// ---------------------------------------------------------------------------
// Gaussian mixture

void GmmModel::validate() const {
    if (weights.empty()) throw std::invalid_argument("mixture needs at least one component");
    if (means.size() != weights.size() || variances.size() != weights.size())
        throw std::invalid_argument("mixture weights, means and variances differ in length");
    const std::size_t d = dim();
    if (d == 0) throw std::invalid_argument("mixture means must be non-empty");
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
            throw std::invalid_argument("mixture weights must be positive");
        if (means[i].size() != d) throw std::invalid_argument("mixture means differ in dimension");
        for (double m : means[i])
            if (!std::isfinite(m)) throw std::invalid_argument("mixture mean is not finite");
        if (!std::isfinite(variances[i]) || variances[i] < 0.0)
            throw std::invalid_argument("mixture variances must be finite and >= 0");
        total += weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
    for (const auto& [name, idx] : conditions) {
        if (idx.empty()) throw std::invalid_argument("condition '" + name + "' selects nothing");
        for (std::size_t i : idx)
            if (i >= weights.size())
                throw std::invalid_argument("condition '" + name + "' references a missing component");
    }
}

std::vector<std::size_t> GmmModel::active_components(const Condition& y) const {
    if (!y.token) {
        std::vector<std::size_t> all(weights.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    const auto it = conditions.find(*y.token);
    if (it == conditions.end()) throw std::invalid_argument("unknown condition token: " + *y.token);
    return it->second;
}

namespace {

std::vector<double> gmm_kernel(const GmmModel& model, const NoiseSchedule& schedule,
                               std::span<const double> z, int t, const Condition& y) {
    require_same_dim(z.size(), model.dim(), "gmm_epsilon");
    const double a = schedule.alpha(t);
    const double one_minus = 1.0 - a;
    std::vector<double> eps(z.size(), 0.0);
    if (one_minus <= 0.0) return eps;

    const double sqrt_a = std::sqrt(a);
    const auto active = model.active_components(y);
    const double d = static_cast<double>(z.size());

    // Log responsibilities, stabilized by the max before exponentiating.
    std::vector<double> logr(active.size());
    std::vector<double> var(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
        const std::size_t i = active[k];
        const double v = a * model.variances[i] + one_minus;
        double sq = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double r = z[j] - sqrt_a * model.means[i][j];
            sq += r * r;
        }
        var[k] = v;
        logr[k] = std::log(model.weights[i]) - 0.5 * d * std::log(v) - 0.5 * sq / v;
    }
    const double top = *std::max_element(logr.begin(), logr.end());
    double total = 0.0;
    for (double& l : logr) {
        l = std::exp(l - top);
        total += l;
    }

    for (std::size_t k = 0; k < active.size(); ++k) {
        const std::size_t i = active[k];
        const double w = logr[k] / total / var[k];
        for (std::size_t j = 0; j < z.size(); ++j) eps[j] += w * (z[j] - sqrt_a * model.means[i][j]);
    }
    const double s = std::sqrt(one_minus);
    for (double& e : eps) e *= s;
    return eps;
}

}  // namespace

Latent gmm_epsilon(const GmmModel& model, const NoiseSchedule& schedule, const Latent& z, int t,
                   const Condition& y) {
    return z.with(gmm_kernel(model, schedule, z.values(), t, y), t);
}

GmmPredictor::GmmPredictor(GmmModel model, NoiseSchedule schedule)
    : model_(std::move(model)), schedule_(std::move(schedule)) {
    model_.validate();
}

std::unique_ptr<EpsilonPredictor> GmmPredictor::clone() const {
    return std::make_unique<GmmPredictor>(model_, schedule_);
}

std::vector<double> GmmPredictor::evaluate(std::span<const double> z, int t,
                                           const Condition& y) const {
    return gmm_kernel(model_, schedule_, z, t, y);
}

// ---------------------------------------------------------------------------
// Zero

ZeroPredictor::ZeroPredictor(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("zero predictor needs d >= 1");
}

std::unique_ptr<EpsilonPredictor> ZeroPredictor::clone() const {
    return std::make_unique<ZeroPredictor>(dim_);
}

std::vector<double> ZeroPredictor::evaluate(std::span<const double> z, int, const Condition&) const {
    require_same_dim(z.size(), dim_, "zero predictor");
    return std::vector<double>(dim_, 0.0);
}

// ---------------------------------------------------------------------------
// Perturbations

Perturbation parse_perturbation(std::string_view name) {
    if (name == "none") return Perturbation::none;
    if (name == "additive-bias" || name == "additive_bias") return Perturbation::additive_bias;
    if (name == "quantize") return Perturbation::quantize;
    throw std::invalid_argument("unknown perturbation mode: " + std::string(name));
}

std::string_view to_string(Perturbation mode) {
    switch (mode) {
        case Perturbation::none: return "none";
        case Perturbation::additive_bias: return "additive-bias";
        case Perturbation::quantize: return "quantize";
    }
    return "none";
}

PerturbedPredictor::PerturbedPredictor(std::unique_ptr<EpsilonPredictor> inner, Perturbation mode,
                                       double magnitude, std::uint64_t seed)
    : inner_(std::move(inner)), mode_(mode), magnitude_(magnitude), seed_(seed) {
    if (!inner_) throw std::invalid_argument("perturbed predictor needs an inner predictor");
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude))
        throw std::invalid_argument("perturbation magnitude must be >= 0");
}

std::unique_ptr<EpsilonPredictor> PerturbedPredictor::clone() const {
    return std::make_unique<PerturbedPredictor>(inner_->clone(), mode_, magnitude_, seed_);
}

std::vector<double> PerturbedPredictor::bias_direction(int t, std::size_t dim) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    std::vector<double> u(dim);
    double n = 0.0;
    while (!(n > 0.0)) {
        for (double& x : u) x = normal(rng);
        n = norm(u);
    }
    for (double& x : u) x /= n;
    return u;
}

std::vector<double> PerturbedPredictor::evaluate(std::span<const double> z, int t,
                                                 const Condition& y) const {
    Latent probe(std::vector<double>(z.begin(), z.end()), t);
    auto eps = inner_->predict(probe, t, y).data;
    if (magnitude_ == 0.0 || mode_ == Perturbation::none) return eps;

    if (mode_ == Perturbation::additive_bias) {
        const double scale = magnitude_ * norm(eps);
        const auto u = bias_direction(t, eps.size());
        for (std::size_t i = 0; i < eps.size(); ++i) eps[i] += scale * u[i];
    } else {
        for (double& e : eps) e = std::round(e / magnitude_) * magnitude_;
    }
    return eps;
}

std::unique_ptr<EpsilonPredictor> perturbed_predictor(std::unique_ptr<EpsilonPredictor> inner,
                                                      Perturbation mode, double magnitude,
                                                      std::uint64_t seed) {
    return std::make_unique<PerturbedPredictor>(std::move(inner), mode, magnitude, seed);
}

std::unique_ptr<EpsilonPredictor> zero_predictor(std::size_t dim) {
    return std::make_unique<ZeroPredictor>(dim);
}

}  // namespace invlab
