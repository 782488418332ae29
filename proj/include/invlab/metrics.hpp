#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "invlab/latent.hpp"

namespace invlab {

/// PSNR value reported when the inputs are identical.
inline constexpr double kPsnrCapDb = 99.0;

double mse(const Latent& a, const Latent& b);
double psnr_from_mse(double mse_value, double peak);
double psnr(const Latent& a, const Latent& b, double peak);

enum class SsimWindow { global, gaussian11 };

struct SsimParams {
    SsimWindow window = SsimWindow::global;
    double k1 = 0.01;
    double k2 = 0.03;
    double data_range = 1.0;
};

/// Structural similarity. Both latents need the same grid shape. The
/// gaussian11 variant (11x11, sigma 1.5, valid region) needs H, W >= 11.
double ssim(const Latent& a, const Latent& b, const SsimParams& params = {});

struct RunRecord {
    std::string method;
    std::uint64_t seed = 0;
    double mse = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
    std::optional<double> lpips;
    std::uint64_t evals = 0;
    double wall_ms = 0.0;
    /// Empty when the run succeeded.
    std::string error;

    bool ok() const { return error.empty(); }
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

struct AggregateRow {
    std::string method;
    std::size_t runs = 0;
    std::size_t failures = 0;
    MeanStd mse, psnr_db, ssim, evals, wall_ms;
};

struct RunReport {
    std::vector<RunRecord> records;
    /// Recomputed from records, grouped by method in first-seen order.
    std::vector<AggregateRow> aggregate() const;
    const AggregateRow* find(const std::vector<AggregateRow>& rows, const std::string& method) const;
};

inline constexpr const char* kReportCsvHeader = "method,seed,mse,psnr_db,ssim,evals,wall_ms";

/// One row per record. Failed rows carry "nan" metrics.
void write_report_csv(std::ostream& os, const RunReport& report);
/// Same rows without the wall_ms column (which is not reproducible).
void write_metric_columns_csv(std::ostream& os, const RunReport& report);
void write_summary_csv(std::ostream& os, const std::vector<AggregateRow>& rows);

std::string format_real(double v);

}  // namespace invlab
