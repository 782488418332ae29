#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "invlab/config.hpp"
#include "invlab/experiment.hpp"
#include "test_support.hpp"

using namespace invlab;
using namespace invlab::testing;

namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(int n_seeds = 8) {
    auto cfg = default_config();
    cfg.n_seeds = n_seeds;
    return cfg;
}

std::string metric_csv(const BenchmarkResult& r) {
    std::ostringstream os;
    write_metric_columns_csv(os, r.report);
    return os.str();
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

TEST_CASE("gen_dataset") {
    const auto model = default_model();
    const auto a = gen_dataset(model, 10, 42);
    const auto b = gen_dataset(model, 10, 42);
    const auto c = gen_dataset(model, 10, 43);
    REQUIRE(a.size() == 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same_bits(a[i].data, b[i].data));
        CHECK(a[i].t_index == 0);
        CHECK(a[i].dim() == 2);
    }
    CHECK(!same_bits(a[0].data, c[0].data));
    CHECK_THROWS(gen_dataset(model, 0, 1));
    const auto shaped = gen_dataset(model, 1, 1, GridShape{1, 2});
    CHECK(shaped[0].shape == GridShape{1, 2});
}

TEST_CASE("gen_dataset draws components by weight") {
    GmmModel m;
    m.weights = {0.3, 0.7};
    m.means = {{-10.0}, {10.0}};
    m.variances = {0.0, 0.0};
    const auto data = gen_dataset(m, 10000, 2024);
    int left = 0;
    for (const auto& z : data) left += z.data[0] < 0.0;
    // 3 sigma binomial band: sqrt(1e4 * 0.3 * 0.7) * 3 = 137.48
    CHECK(std::abs(left - 3000) <= 137.4773);
}

TEST_CASE("config json round trip") {
    auto cfg = default_config();
    cfg.perturbation = {Perturbation::quantize, 0.01, 3};
    cfg.condition = Condition::named("top");
    cfg.schedule.convention = StepConvention::printed;
    const auto back = config_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));
    REQUIRE(back.methods.size() == cfg.methods.size());
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) CHECK(back.methods[i].name() == cfg.methods[i].name());
    CHECK(*back.condition.token == "top");
}

TEST_CASE("config errors surface as ConfigError") {
    using nlohmann::json;
    CHECK_THROWS_AS(config_from_json(json{{"n_seeds", 0}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"methods", json::array({{{"method", "easyinv"}, {"eta", 1.5}}})}}),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"methods", json::array({{{"method", "ddpm"}}})}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"schedule", {{"kind", "cosine"}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"shape", {3, 3}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"metric_peak", -1.0}}), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
    CHECK_THROWS_AS(load_config(INVLAB_GOLDEN_DIR "/../data/bad_config.json"), ConfigError);
}

TEST_CASE("run_single") {
    const auto cfg = small_config();
    const Latent z0({0.1, 0.9}, 0, GridShape{1, 2});
    const Latent copy = z0;
    const auto out = run_single(cfg, {Vanilla{}, 50, {}}, z0, 7);
    CHECK(same_bits(z0.data, copy.data));
    CHECK(out.record.ok());
    CHECK(out.record.seed == 7);
    CHECK(out.record.evals == 50);
    CHECK(out.record.mse == mse(out.reconstruction, z0));
    CHECK(out.record.wall_ms >= 0.0);
    CHECK(out.record.ssim <= 1.0);

    const auto fp = run_single(cfg, {FixedPoint{3}, 50, {}}, z0, 7);
    CHECK(fp.record.evals == 3 * out.record.evals);

    const auto eta_one = run_single(cfg, {EasyInv{1.0}, 50, {}}, z0, 7);
    CHECK(eta_one.record.mse == out.record.mse);
    CHECK(eta_one.record.psnr_db == out.record.psnr_db);
    CHECK(eta_one.record.ssim == out.record.ssim);
}

TEST_CASE("run_benchmark is deterministic and execution independent") {
    const auto cfg = small_config(12);
    const auto serial = run_benchmark(cfg, Execution::serial);
    const auto parallel = run_benchmark(cfg, Execution::parallel);
    const auto again = run_benchmark(cfg, Execution::parallel);
    CHECK(metric_csv(serial) == metric_csv(parallel));
    CHECK(metric_csv(parallel) == metric_csv(again));
    CHECK(serial.failures() == 0);
    CHECK(serial.report.records.size() == cfg.methods.size() * 12);
    CHECK(serial.summary.size() == cfg.methods.size());
    for (const auto& m : cfg.methods) CHECK(serial.midpoint_distance.count(m.name()) == 1);
}

TEST_CASE("benchmark rows carry failures instead of aborting") {
    auto cfg = small_config(4);
    cfg.perturbation = {Perturbation::additive_bias, 1e308, 1};
    cfg.methods = {{Vanilla{}, 50, {}}};
    const auto r = run_benchmark(cfg, Execution::serial);
    CHECK(r.failures() == 4);
    REQUIRE(r.summary.size() == 1);
    CHECK(r.summary[0].failures == 4);
    for (const auto& rec : r.report.records) CHECK(!rec.error.empty());

    const auto dir = fs::temp_directory_path() / "invlab_failures";
    fs::remove_all(dir);
    write_benchmark_outputs(r, cfg, dir);
    CHECK(fs::exists(dir / "errors.csv"));
}

TEST_CASE("benchmark outputs") {
    const auto cfg = small_config(4);
    const auto r = run_benchmark(cfg, Execution::serial);
    const auto dir = fs::temp_directory_path() / "invlab_outputs";
    fs::remove_all(dir);
    write_benchmark_outputs(r, cfg, dir);
    std::ifstream report(dir / "report.csv");
    std::string header;
    std::getline(report, header);
    CHECK(header == "method,seed,mse,psnr_db,ssim,evals,wall_ms");
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(!fs::exists(dir / "errors.csv"));
    std::ifstream js(dir / "report.json");
    const auto j = nlohmann::json::parse(js);
    CHECK(j.at("summary").size() == cfg.methods.size());
    CHECK(j.at("summary")[0].at("lpips").is_null());
    CHECK(j.contains("midpoint_distance"));
}

TEST_CASE("golden metric columns") {
    const auto cfg = small_config(6);
    const std::string got = metric_csv(run_benchmark(cfg, Execution::serial));
    const fs::path path = fs::path(INVLAB_GOLDEN_DIR) / "default_metrics.csv";
    if (std::getenv("INVLAB_RECORD_GOLDEN")) {
        std::ofstream(path) << got;
        MESSAGE("recorded " << path.string());
        return;
    }
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), "missing golden file " << path.string());
    std::stringstream want;
    want << in.rdbuf();
    const auto a = split_csv(got), b = split_csv(want.str());
    REQUIRE(a.size() == b.size());
    CHECK(a[0] == b[0]);
    for (std::size_t r = 1; r < a.size(); ++r) {
        REQUIRE(a[r].size() == b[r].size());
        CHECK(a[r][0] == b[r][0]);
        CHECK(a[r][1] == b[r][1]);
        CHECK(a[r][5] == b[r][5]);
        for (std::size_t c = 2; c < 5; ++c) {
            const double x = std::stod(a[r][c]), y = std::stod(b[r][c]);
            CHECK(std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y)));
        }
    }
}
