#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "invlab/config.hpp"
#include "invlab/metrics.hpp"
#include "invlab/parallel.hpp"

namespace invlab {

/// n i.i.d. draws from the mixture, tagged t = 0. Reproducible from seed.
std::vector<Latent> gen_dataset(const GmmModel& model, int n, std::uint64_t seed,
                                std::optional<GridShape> shape = std::nullopt);

/// Predictor for one run: the exact mixture predictor, wrapped in the
/// configured perturbation when there is one.
std::unique_ptr<EpsilonPredictor> make_predictor(const ExperimentConfig& cfg,
                                                 const NoiseSchedule& schedule);

struct BenchmarkResult {
    RunReport report;
    std::vector<AggregateRow> summary;
    /// Mean |z*_{T/2} - z_0| per method label.
    std::map<std::string, double> midpoint_distance;
    /// Claims the run contradicts, e.g. EasyInv worse than vanilla.
    std::vector<std::string> flags;

    std::size_t failures() const;
};

/// Every (method, seed): invert, reconstruct, score. Records are ordered by
/// (method index, seed) regardless of execution mode.
BenchmarkResult run_benchmark(const ExperimentConfig& cfg, Execution exec = Execution::parallel);

/// Single run used by the benchmark and the CLI.
struct RunOutcome {
    Trajectory trajectory;
    Latent reconstruction;
    RunRecord record;
};
RunOutcome run_single(const ExperimentConfig& cfg, const InversionConfig& method,
                      const Latent& z0, std::uint64_t seed);

/// report.csv, summary.csv, report.json and errors.csv (only when rows failed).
void write_benchmark_outputs(const BenchmarkResult& result, const ExperimentConfig& cfg,
                             const std::filesystem::path& dir);

}  // namespace invlab
