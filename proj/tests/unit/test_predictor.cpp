#include <doctest.h>

#include <cmath>
#include <random>

#include "invlab/predictor.hpp"
#include "test_support.hpp"

using namespace invlab;
using namespace invlab::testing;

namespace {

// alpha_1 = 0.5
NoiseSchedule half_schedule() { return NoiseSchedule::from_alphas({1.0, 0.5}); }

// log p_t(z) for the diffused mixture, written out directly.
double log_density(const GmmModel& m, double a, const std::vector<double>& z) {
    double total = 0.0;
    const double d = static_cast<double>(z.size());
    for (std::size_t c = 0; c < m.components(); ++c) {
        const double v = a * m.variances[c] + 1.0 - a;
        double sq = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double r = z[i] - std::sqrt(a) * m.means[c][i];
            sq += r * r;
        }
        total += m.weights[c] * std::exp(-0.5 * sq / v) / std::pow(2.0 * M_PI * v, 0.5 * d);
    }
    return std::log(total);
}

}  // namespace

TEST_CASE("gmm_epsilon closed-form cases") {
    const auto s = half_schedule();
    const auto origin = single_gaussian({0.0, 0.0}, 0.0);
    const auto eps = gmm_epsilon(origin, s, Latent({1.0, 0.0}, 1), 1, {});
    CHECK(eps.data[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(eps.data[1] == 0.0);

    const auto shifted = single_gaussian({0.4, -1.2}, 0.3);
    const auto at_mean = gmm_epsilon(shifted, s, Latent({std::sqrt(0.5) * 0.4, std::sqrt(0.5) * -1.2}, 1), 1, {});
    CHECK(at_mean.data[0] == doctest::Approx(0.0));
    CHECK(at_mean.data[1] == doctest::Approx(0.0));

    // sigma^2 = 0: (z - sqrt(a) mu) / sqrt(1 - a) exactly
    const auto point = single_gaussian({0.7}, 0.0);
    const auto e = gmm_epsilon(point, s, Latent({2.0}, 1), 1, {});
    CHECK(e.data[0] == doctest::Approx((2.0 - std::sqrt(0.5) * 0.7) / std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("gmm_epsilon two components against numerical differentiation") {
    GmmModel m;
    m.weights = {0.5, 0.5};
    m.means = {{1.0}, {-1.0}};
    m.variances = {0.0, 0.0};
    const auto eps = gmm_epsilon(m, half_schedule(), Latent({0.3}, 1), 1, {});
    // tests/oracles/oracles.py: central differences, h = 1e-6
    CHECK(eps.data[0] == doctest::Approx(0.023747479531477853555).epsilon(1e-9));
}

TEST_CASE("gmm_epsilon matches -sqrt(1-a) grad log p on random draws") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5), var(0.0, 0.4);
    const auto s = build_subsampled_schedule(BetaSchedule::scaled_linear, 50, 0.00085, 0.012, 1000);
    std::uniform_int_distribution<int> pick(1, 50);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + trial % 4;
        GmmModel m;
        m.weights = {0.2, 0.3, 0.5};
        for (int c = 0; c < 3; ++c) {
            std::vector<double> mu(d);
            for (double& x : mu) x = u(rng);
            m.means.push_back(mu);
            m.variances.push_back(var(rng));
        }
        const int t = pick(rng);
        std::vector<double> z(d);
        for (double& x : z) x = u(rng);
        const auto eps = gmm_epsilon(m, s, Latent(z, t), t, {});
        for (std::size_t i = 0; i < d; ++i) {
            const double h = 1e-5;
            auto zp = z, zm = z;
            zp[i] += h;
            zm[i] -= h;
            const double grad = (log_density(m, s.alpha(t), zp) - log_density(m, s.alpha(t), zm)) / (2 * h);
            REQUIRE(std::abs(eps.data[i] + std::sqrt(1.0 - s.alpha(t)) * grad) <= 1e-5);
        }
    }
}

TEST_CASE("gmm_epsilon stays finite far from every mode") {
    GmmModel m;
    m.weights = {0.5, 0.5};
    m.means = {{1.0, 0.0}, {-1.0, 0.0}};
    m.variances = {0.01, 0.01};
    const auto eps = gmm_epsilon(m, half_schedule(), Latent({1e4, -3e3}, 1), 1, {});
    CHECK(std::isfinite(eps.data[0]));
    CHECK(std::isfinite(eps.data[1]));
}

TEST_CASE("gmm_epsilon edge cases and errors") {
    const auto s = half_schedule();
    const auto m = single_gaussian({0.0, 0.0}, 0.1);
    const auto at_zero = gmm_epsilon(m, s, Latent({3.0, 4.0}, 0), 0, {});
    CHECK(at_zero.data == std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(gmm_epsilon(m, s, Latent({1.0}, 1), 1, {}), std::invalid_argument);
    CHECK_THROWS_AS(gmm_epsilon(m, s, Latent({1.0, 0.0}, 2), 2, {}), std::out_of_range);
    CHECK_THROWS_AS(gmm_epsilon(m, s, Latent({1.0, 0.0}, -1), -1, {}), std::out_of_range);
}

TEST_CASE("GmmModel validation") {
    GmmModel m = single_gaussian({0.0}, 0.1);
    CHECK_NOTHROW(m.validate());
    m.weights = {0.9};
    CHECK_THROWS(m.validate());
    m = single_gaussian({0.0}, -0.1);
    CHECK_THROWS(m.validate());
    GmmModel empty;
    CHECK_THROWS(empty.validate());
    m = single_gaussian({0.0}, 0.1);
    m.conditions["bad"] = {3};
    CHECK_THROWS(m.validate());
}

TEST_CASE("condition tokens select component subsets") {
    GmmModel m;
    m.weights = {0.5, 0.5};
    m.means = {{1.0}, {-1.0}};
    m.variances = {0.0, 0.0};
    m.conditions["left"] = {1};
    const auto s = half_schedule();
    const auto cond = gmm_epsilon(m, s, Latent({0.3}, 1), 1, Condition::named("left"));
    const auto only_left = gmm_epsilon(single_gaussian({-1.0}, 0.0), s, Latent({0.3}, 1), 1, {});
    CHECK(cond.data[0] == doctest::Approx(only_left.data[0]).epsilon(1e-15));
    CHECK_THROWS_AS(gmm_epsilon(m, s, Latent({0.3}, 1), 1, Condition::named("nope")), std::invalid_argument);
}

TEST_CASE("predictors are deterministic and count their calls") {
    GmmPredictor p(single_gaussian({0.5, 0.5}, 0.05), half_schedule());
    const Latent z({0.2, -0.1}, 1);
    const auto a = p.predict(z, 1, {});
    const auto b = p.predict(z, 1, {});
    CHECK(same_bits(a.data, b.data));
    CHECK(p.eval_count() == 2);
    const auto copy = p.clone();
    CHECK(copy->eval_count() == 0);
    CHECK(same_bits(copy->predict(z, 1, {}).data, a.data));
    p.reset_count();
    CHECK(p.eval_count() == 0);
}

TEST_CASE("zero predictor") {
    auto p = zero_predictor(2);
    for (int k = 0; k < 5; ++k) CHECK(p->predict(Latent({3.0, 4.0}, 1), k, {}).data == std::vector<double>{0.0, 0.0});
    CHECK(p->eval_count() == 5);
    CHECK_THROWS(zero_predictor(0));
    CHECK_THROWS(p->predict(Latent({1.0}, 0), 0, {}));

    auto biased = perturbed_predictor(zero_predictor(2), Perturbation::additive_bias, 0.3, 5);
    CHECK(norm(biased->predict(Latent({3.0, 4.0}, 1), 1, {}).values()) == 0.0);
}

TEST_CASE("perturbed predictor") {
    const auto s = build_subsampled_schedule(BetaSchedule::scaled_linear, 50, 0.00085, 0.012, 1000);
    const auto model = single_gaussian({0.3, -0.2, 0.1}, 0.05);
    GmmPredictor exact(model, s);
    const Latent z({0.4, 0.9, -1.1}, 7);

    SUBCASE("zero magnitude is a pass-through") {
        for (auto mode : {Perturbation::additive_bias, Perturbation::quantize}) {
            auto p = perturbed_predictor(exact.clone(), mode, 0.0, 9);
            CHECK(same_bits(p->predict(z, 7, {}).data, exact.predict(z, 7, {}).data));
        }
    }
    SUBCASE("quantize rounds to the nearest multiple") {
        auto on_grid = perturbed_predictor(std::make_unique<ConstantPredictor>(std::vector<double>{1.0, 1.0}),
                                           Perturbation::quantize, 0.5, 0);
        CHECK(on_grid->predict(Latent({0.0, 0.0}, 1), 1, {}).data == std::vector<double>{1.0, 1.0});
        auto up = perturbed_predictor(std::make_unique<ConstantPredictor>(std::vector<double>{0.26}),
                                      Perturbation::quantize, 0.5, 0);
        CHECK(up->predict(Latent({0.0}, 1), 1, {}).data == std::vector<double>{0.5});
    }
    SUBCASE("additive bias has norm magnitude * |eps| and is fixed per timestep") {
        auto p = perturbed_predictor(exact.clone(), Perturbation::additive_bias, 0.05, 11);
        const auto clean = exact.predict(z, 7, {});
        const auto noisy = p->predict(z, 7, {});
        std::vector<double> diff(3);
        for (std::size_t i = 0; i < 3; ++i) diff[i] = noisy.data[i] - clean.data[i];
        CHECK(norm(diff) == doctest::Approx(0.05 * norm(clean.values())).epsilon(1e-12));

        const auto& pp = dynamic_cast<const PerturbedPredictor&>(*p);
        CHECK(pp.bias_direction(7, 3) == pp.bias_direction(7, 3));
        CHECK(pp.bias_direction(7, 3) != pp.bias_direction(8, 3));
        CHECK(norm(pp.bias_direction(3, 3)) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(same_bits(p->predict(z, 7, {}).data, noisy.data));
    }
    SUBCASE("counter and errors") {
        auto p = perturbed_predictor(exact.clone(), Perturbation::additive_bias, 0.05, 11);
        for (int k = 0; k < 4; ++k) (void)p->predict(z, 3, {});
        CHECK(p->eval_count() == 4);
        CHECK_THROWS_AS(perturbed_predictor(exact.clone(), Perturbation::quantize, -0.1, 0),
                        std::invalid_argument);
        CHECK(parse_perturbation("additive-bias") == Perturbation::additive_bias);
        CHECK_THROWS(parse_perturbation("dropout"));
    }
}
