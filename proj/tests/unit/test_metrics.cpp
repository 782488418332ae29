#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "invlab/metrics.hpp"
#include "test_support.hpp"

using namespace invlab;
using namespace invlab::testing;

namespace {

Latent grid(std::vector<double> v, std::size_t h, std::size_t w) { return Latent(std::move(v), 0, GridShape{h, w}); }

}  // namespace

TEST_CASE("mse") {
    CHECK(mse(Latent({0.0, 0.0}, 0), Latent({3.0, 4.0}, 0)) == 12.5);
    CHECK(mse(Latent({1.0, 2.0}, 0), Latent({1.0, 2.0}, 0)) == 0.0);
    CHECK_THROWS_AS(mse(Latent({1.0}, 0), Latent({1.0, 2.0}, 0)), std::invalid_argument);
}

TEST_CASE("psnr") {
    CHECK(psnr_from_mse(0.01, 1.0) == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(psnr_from_mse(100.0, 255.0) == doctest::Approx(28.130803608679103412).epsilon(1e-14));
    CHECK(psnr_from_mse(0.0, 1.0) == kPsnrCapDb);
    CHECK_THROWS(psnr_from_mse(0.1, 0.0));
    const double tiny = psnr_from_mse(1e-30, 1.0);
    CHECK(tiny > 99.0);
    CHECK(std::isfinite(tiny));
}

TEST_CASE("psnr is strictly decreasing in mse") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(1e-12, 10.0);
    for (int k = 0; k < 1000; ++k) {
        double a = u(rng), b = u(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        REQUIRE(psnr_from_mse(a, 1.0) > psnr_from_mse(b, 1.0));
    }
}

TEST_CASE("ssim") {
    std::vector<double> ramp(64);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) ramp[i * 8 + j] = static_cast<double>(i + j) / 14.0;
    const auto x = grid(ramp, 8, 8);
    CHECK(ssim(x, x) == 1.0);

    std::vector<double> neg(ramp);
    for (double& v : neg) v = -v;
    CHECK(ssim(x, grid(neg, 8, 8)) == doctest::Approx(0.9829466871401603).epsilon(1e-12));

    std::vector<double> flipped(ramp.rbegin(), ramp.rend());
    CHECK(ssim(x, grid(flipped, 8, 8)) < 1.0);

    const auto flat = grid(std::vector<double>(16, 0.5), 4, 4);
    CHECK(ssim(flat, flat) == 1.0);

    CHECK_THROWS(ssim(Latent({1.0}, 0), Latent({1.0}, 0)));
    CHECK_THROWS(ssim(grid({1.0, 2.0}, 1, 2), grid({1.0, 2.0}, 2, 1)));
    CHECK_THROWS(ssim(x, x, SsimParams{SsimWindow::gaussian11}));
}

TEST_CASE("gaussian window ssim") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> a(256), b(256);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = u(rng);
        b[i] = std::clamp(a[i] + 0.05 * (u(rng) - 0.5), 0.0, 1.0);
    }
    const SsimParams p{SsimWindow::gaussian11};
    CHECK(ssim(grid(a, 16, 16), grid(a, 16, 16), p) == doctest::Approx(1.0).epsilon(1e-14));
    const double s = ssim(grid(a, 16, 16), grid(b, 16, 16), p);
    CHECK(s < 1.0);
    CHECK(s > 0.5);
    CHECK(s == doctest::Approx(ssim(grid(b, 16, 16), grid(a, 16, 16), p)).epsilon(1e-14));
}

TEST_CASE("metrics ignore a common permutation of both inputs") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 100; ++k) {
        std::vector<double> a(12), b(12);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = normal(rng);
            b[i] = normal(rng);
        }
        std::vector<std::size_t> perm(12);
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> pa(12), pb(12);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            pa[i] = a[perm[i]];
            pb[i] = b[perm[i]];
        }
        REQUIRE(mse(Latent(pa, 0), Latent(pb, 0)) == doctest::Approx(mse(Latent(a, 0), Latent(b, 0))).epsilon(1e-14));
        REQUIRE(ssim(grid(pa, 3, 4), grid(pb, 3, 4)) == doctest::Approx(ssim(grid(a, 3, 4), grid(b, 3, 4))).epsilon(1e-12));
        REQUIRE(mse(Latent(a, 0), Latent(b, 0)) == mse(Latent(b, 0), Latent(a, 0)));
    }
}

TEST_CASE("aggregate") {
    RunReport rep;
    rep.records = {{"a", 0, 1.0, 10.0, 0.5, {}, 3, 2.0, {}},
                   {"b", 0, 4.0, 40.0, 0.1, {}, 9, 1.0, {}},
                   {"a", 1, 3.0, 30.0, 0.7, {}, 3, 4.0, {}},
                   {"a", 2, 0.0, 0.0, 0.0, {}, 0, 0.0, "boom"}};
    const auto rows = rep.aggregate();
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].method == "a");
    CHECK(rows[0].runs == 3);
    CHECK(rows[0].failures == 1);
    CHECK(rows[0].mse.mean == 2.0);
    CHECK(rows[0].mse.std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(rows[0].ssim.mean == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(rows[0].wall_ms.mean == 3.0);
    CHECK(rows[1].mse.std == 0.0);
    CHECK(rep.find(rows, "b")->evals.mean == 9.0);
    CHECK(rep.find(rows, "c") == nullptr);
}

TEST_CASE("report csv") {
    RunReport rep;
    rep.records = {{"vanilla", 3, 0.25, 12.0, 0.9, {}, 50, 1.5, {}},
                   {"vanilla", 4, 0.0, 0.0, 0.0, {}, 0, 0.0, "bad"}};
    std::ostringstream os;
    write_report_csv(os, rep);
    CHECK(os.str() == "method,seed,mse,psnr_db,ssim,evals,wall_ms\n"
                      "vanilla,3,0.25,12,0.9,50,1.5\n"
                      "vanilla,4,nan,nan,nan,0,0\n");
    std::ostringstream metrics;
    write_metric_columns_csv(metrics, rep);
    CHECK(metrics.str().find("wall_ms") == std::string::npos);
    CHECK(format_real(0.1) == "0.1");
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
}
