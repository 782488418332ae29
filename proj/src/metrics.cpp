#include "invlab/metrics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace invlab {

double mse(const Latent& a, const Latent& b) {
    require_same_dim(a.dim(), b.dim(), "mse");
    if (a.dim() == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s / static_cast<double>(a.dim());
}

double psnr_from_mse(double mse_value, double peak) {
    if (!(peak > 0.0)) throw std::invalid_argument("psnr peak must be > 0");
    if (mse_value == 0.0) return kPsnrCapDb;
    return 10.0 * std::log10(peak * peak / mse_value);
}

double psnr(const Latent& a, const Latent& b, double peak) {
    return psnr_from_mse(mse(a, b), peak);
}

namespace {

struct Moments {
    double mean_a = 0, mean_b = 0, var_a = 0, var_b = 0, cov = 0;
};

// Weighted first and second moments; weights sum to 1.
template <class WeightAt>
Moments weighted_moments(const double* a, const double* b, std::size_t rows, std::size_t cols,
                         std::size_t stride, WeightAt&& weight) {
    Moments m;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double w = weight(r, c);
            m.mean_a += w * a[r * stride + c];
            m.mean_b += w * b[r * stride + c];
        }
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double w = weight(r, c);
            const double da = a[r * stride + c] - m.mean_a;
            const double db = b[r * stride + c] - m.mean_b;
            m.var_a += w * (da * da);
            m.var_b += w * (db * db);
            m.cov += w * (da * db);
        }
    return m;
}

double ssim_from_moments(const Moments& m, double c1, double c2) {
    const double num = (2.0 * m.mean_a * m.mean_b + c1) * (2.0 * m.cov + c2);
    const double den = (m.mean_a * m.mean_a + m.mean_b * m.mean_b + c1) * (m.var_a + m.var_b + c2);
    return num / den;
}

constexpr std::size_t kGaussSize = 11;

std::array<double, kGaussSize * kGaussSize> gaussian_window(double sigma) {
    std::array<double, kGaussSize> g{};
    double total = 0.0;
    const double half = (kGaussSize - 1) / 2.0;
    for (std::size_t i = 0; i < kGaussSize; ++i) {
        const double x = static_cast<double>(i) - half;
        g[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
        total += g[i];
    }
    std::array<double, kGaussSize * kGaussSize> w{};
    for (std::size_t r = 0; r < kGaussSize; ++r)
        for (std::size_t c = 0; c < kGaussSize; ++c) w[r * kGaussSize + c] = g[r] * g[c] / (total * total);
    return w;
}

}  // namespace

double ssim(const Latent& a, const Latent& b, const SsimParams& params) {
    if (!a.shape || !b.shape) throw std::invalid_argument("ssim needs grid shapes on both latents");
    if (!(*a.shape == *b.shape)) throw std::invalid_argument("ssim: shape mismatch");
    require_same_dim(a.dim(), b.dim(), "ssim");
    if (!(params.data_range > 0.0)) throw std::invalid_argument("ssim data range must be > 0");
    const double c1 = (params.k1 * params.data_range) * (params.k1 * params.data_range);
    const double c2 = (params.k2 * params.data_range) * (params.k2 * params.data_range);
    const std::size_t H = a.shape->height;
    const std::size_t W = a.shape->width;

    if (params.window == SsimWindow::global) {
        const double w = 1.0 / static_cast<double>(H * W);
        const auto m = weighted_moments(a.data.data(), b.data.data(), H, W, W,
                                        [w](std::size_t, std::size_t) { return w; });
        return ssim_from_moments(m, c1, c2);
    }

    if (H < kGaussSize || W < kGaussSize)
        throw std::invalid_argument("gaussian ssim window needs H, W >= 11");
    const auto kernel = gaussian_window(1.5);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r0 = 0; r0 + kGaussSize <= H; ++r0)
        for (std::size_t c0 = 0; c0 + kGaussSize <= W; ++c0) {
            const auto m = weighted_moments(
                a.data.data() + r0 * W + c0, b.data.data() + r0 * W + c0, kGaussSize, kGaussSize,
                W, [&](std::size_t r, std::size_t c) { return kernel[r * kGaussSize + c]; });
            total += ssim_from_moments(m, c1, c2);
            ++count;
        }
    return total / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

}  // namespace

std::vector<AggregateRow> RunReport::aggregate() const {
    std::vector<AggregateRow> rows;
    std::vector<std::array<std::vector<double>, 5>> columns;
    for (const auto& r : records) {
        std::size_t k = 0;
        while (k < rows.size() && rows[k].method != r.method) ++k;
        if (k == rows.size()) {
            AggregateRow row;
            row.method = r.method;
            rows.push_back(std::move(row));
            columns.emplace_back();
        }
        ++rows[k].runs;
        if (!r.ok()) {
            ++rows[k].failures;
            continue;
        }
        columns[k][0].push_back(r.mse);
        columns[k][1].push_back(r.psnr_db);
        columns[k][2].push_back(r.ssim);
        columns[k][3].push_back(static_cast<double>(r.evals));
        columns[k][4].push_back(r.wall_ms);
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        rows[k].mse = mean_std(columns[k][0]);
        rows[k].psnr_db = mean_std(columns[k][1]);
        rows[k].ssim = mean_std(columns[k][2]);
        rows[k].evals = mean_std(columns[k][3]);
        rows[k].wall_ms = mean_std(columns[k][4]);
    }
    return rows;
}

const AggregateRow* RunReport::find(const std::vector<AggregateRow>& rows,
                                    const std::string& method) const {
    for (const auto& r : rows)
        if (r.method == method) return &r;
    return nullptr;
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    // Shortest round-trip representation; stable for identical bit patterns.
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace {

void write_row(std::ostream& os, const RunRecord& r, bool with_time) {
    os << r.method << ',' << r.seed << ',';
    if (r.ok())
        os << format_real(r.mse) << ',' << format_real(r.psnr_db) << ',' << format_real(r.ssim) << ','
           << r.evals;
    else
        os << "nan,nan,nan," << r.evals;
    if (with_time) os << ',' << format_real(r.wall_ms);
    os << '\n';
}

}  // namespace

void write_report_csv(std::ostream& os, const RunReport& report) {
    os << kReportCsvHeader << '\n';
    for (const auto& r : report.records) write_row(os, r, true);
}

void write_metric_columns_csv(std::ostream& os, const RunReport& report) {
    os << "method,seed,mse,psnr_db,ssim,evals\n";
    for (const auto& r : report.records) write_row(os, r, false);
}

void write_summary_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
    os << "method,runs,failures,mse_mean,mse_std,psnr_db_mean,psnr_db_std,ssim_mean,ssim_std,"
          "evals_mean,wall_ms_mean,wall_ms_std\n";
    for (const auto& r : rows) {
        os << r.method << ',' << r.runs << ',' << r.failures << ',' << format_real(r.mse.mean) << ','
           << format_real(r.mse.std) << ',' << format_real(r.psnr_db.mean) << ','
           << format_real(r.psnr_db.std) << ',' << format_real(r.ssim.mean) << ','
           << format_real(r.ssim.std) << ',' << format_real(r.evals.mean) << ','
           << format_real(r.wall_ms.mean) << ',' << format_real(r.wall_ms.std) << '\n';
    }
}

}  // namespace invlab
