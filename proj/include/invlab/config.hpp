#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "invlab/inverter.hpp"
#include "invlab/latent.hpp"
#include "invlab/predictor.hpp"
#include "invlab/schedule.hpp"

namespace invlab {

/// Raised for malformed or inconsistent experiment configs (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScheduleSpec {
    BetaSchedule kind = BetaSchedule::scaled_linear;
    double beta_start = 0.00085;
    double beta_end = 0.012;
    /// Fine steps the betas are spread over before sampling T points.
    /// 0 spreads them directly over the T inference steps.
    int train_steps = 1000;
    StepConvention convention = StepConvention::variance_preserving;

    NoiseSchedule build(int steps) const;
};

struct PerturbationSpec {
    Perturbation mode = Perturbation::none;
    double magnitude = 0.0;
    std::uint64_t seed = 0;
};

struct ExperimentConfig {
    ScheduleSpec schedule;
    GmmModel model;
    PerturbationSpec perturbation;
    std::vector<InversionConfig> methods;
    int n_seeds = 200;
    std::size_t dim = 2;
    std::optional<GridShape> shape;
    std::string out_dir = "out";
    std::uint64_t rng_seed = 20240814;
    Condition condition;
    /// PSNR peak and SSIM data range.
    double metric_peak = 2.0;

    /// Throws ConfigError.
    void validate() const;
};

/// d = 2, three equal-weight components on the unit circle with variance
/// 0.05, T = 50, 200 seeds; vanilla, both EasyInv presets, fixed_point(n=3)
/// and renoise(K=2).
ExperimentConfig default_config();

/// Three-component mixture on the unit circle.
GmmModel default_model(double variance = 0.05);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

InversionConfig inversion_from_json(const nlohmann::json& j);
nlohmann::json to_json(const InversionConfig& cfg);
GmmModel model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GmmModel& model);

}  // namespace invlab
