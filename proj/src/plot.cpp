#include "invlab/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace invlab {

std::vector<double> distance_curve(const Trajectory& traj, const Latent& z0) {
    std::vector<double> out;
    out.reserve(traj.latents.size());
    for (const auto& z : traj.latents) out.push_back(distance(z.values(), z0.values()));
    return out;
}

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 320.0;
constexpr double kMargin = 48.0;
constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c",
                                             "#9467bd", "#ff7f0e", "#17becf"};

struct Range {
    double lo = 0.0, hi = 1.0;

    void widen() {
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void axes(std::ostringstream& os, double x0, const Range& xr, const Range& yr, const char* xlabel,
          const char* ylabel) {
    const double left = x0 + kMargin, right = x0 + kPanelW - 12.0;
    const double top = 24.0, bottom = kPanelH - kMargin;
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left
       << "\" height=\"" << bottom - top << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << (left + right) / 2 << "\" y=\"" << kPanelH - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
    os << "<text x=\"" << x0 + 14 << "\" y=\"" << (top + bottom) / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << x0 + 14 << ' '
       << (top + bottom) / 2 << ")\">" << ylabel << "</text>\n";
    os << "<text x=\"" << left << "\" y=\"" << bottom + 14 << "\" font-size=\"10\">" << xr.lo
       << "</text>\n<text x=\"" << right << "\" y=\"" << bottom + 14
       << "\" font-size=\"10\" text-anchor=\"end\">" << xr.hi << "</text>\n";
    os << "<text x=\"" << left - 4 << "\" y=\"" << bottom << "\" font-size=\"10\" text-anchor=\"end\">"
       << yr.lo << "</text>\n<text x=\"" << left - 4 << "\" y=\"" << top + 10
       << "\" font-size=\"10\" text-anchor=\"end\">" << yr.hi << "</text>\n";
}

}  // namespace

std::string render_trajectories_svg(const std::vector<PlotSeries>& series, const Latent& z0) {
    if (series.empty()) throw std::invalid_argument("plot needs at least one trajectory");
    for (const auto& s : series) {
        if (!s.trajectory || s.trajectory->latents.empty())
            throw std::invalid_argument("plot series has no trajectory");
        require_same_dim(s.trajectory->start().dim(), z0.dim(), "plot");
    }
    const bool planar = z0.dim() == 2;
    const double width = planar ? 2 * kPanelW : kPanelW;

    Range tr{0.0, 0.0}, dr{0.0, 0.0};
    std::vector<std::vector<double>> curves;
    for (const auto& s : series) {
        curves.push_back(distance_curve(*s.trajectory, z0));
        for (const auto& z : s.trajectory->latents) tr.hi = std::max(tr.hi, double(z.t_index));
        dr.hi = std::max(dr.hi, *std::max_element(curves.back().begin(), curves.back().end()));
    }
    tr.widen();
    dr.widen();

    std::ostringstream os;
    os.precision(6);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << kPanelH
       << "\" viewBox=\"0 0 " << width << ' ' << kPanelH << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    axes(os, 0.0, tr, dr, "timestep t", "|z_t - z_0|");
    const double left = kMargin, right = kPanelW - 12.0, top = 24.0, bottom = kPanelH - kMargin;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kColors[k % kColors.size()];
        const auto& lat = series[k].trajectory->latents;
        os << "<polyline class=\"distance\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < lat.size(); ++i)
            os << tr.map(lat[i].t_index, left, right) << ',' << dr.map(curves[k][i], bottom, top)
               << (i + 1 < lat.size() ? " " : "");
        os << "\"/>\n";
        os << "<text x=\"" << left + 8 << "\" y=\"" << top + 16 + 14 * k << "\" font-size=\"11\" fill=\""
           << color << "\">" << escape(series[k].label) << "</text>\n";
    }

    if (planar) {
        Range xr{z0.data[0], z0.data[0]}, yr{z0.data[1], z0.data[1]};
        for (const auto& s : series)
            for (const auto& z : s.trajectory->latents) {
                xr.lo = std::min(xr.lo, z.data[0]);
                xr.hi = std::max(xr.hi, z.data[0]);
                yr.lo = std::min(yr.lo, z.data[1]);
                yr.hi = std::max(yr.hi, z.data[1]);
            }
        xr.widen();
        yr.widen();
        axes(os, kPanelW, xr, yr, "z[0]", "z[1]");
        const double l2 = kPanelW + kMargin, r2 = 2 * kPanelW - 12.0;
        for (std::size_t k = 0; k < series.size(); ++k) {
            const char* color = kColors[k % kColors.size()];
            const auto& lat = series[k].trajectory->latents;
            os << "<polyline class=\"path\" fill=\"none\" stroke=\"" << color
               << "\" stroke-width=\"1.2\" points=\"";
            for (std::size_t i = 0; i < lat.size(); ++i)
                os << xr.map(lat[i].data[0], l2, r2) << ',' << yr.map(lat[i].data[1], bottom, top)
                   << (i + 1 < lat.size() ? " " : "");
            os << "\"/>\n";
        }
        os << "<circle cx=\"" << xr.map(z0.data[0], l2, r2) << "\" cy=\""
           << yr.map(z0.data[1], bottom, top) << "\" r=\"3.5\" fill=\"black\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void plot_trajectories(const std::vector<PlotSeries>& series, const Latent& z0,
                       const std::filesystem::path& path) {
    const std::string svg = render_trajectories_svg(series, z0);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << svg;
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

void plot_trajectory(const Trajectory& traj, const Latent& z0, const std::filesystem::path& path) {
    plot_trajectories({PlotSeries{"trajectory", &traj}}, z0, path);
}

}  // namespace invlab
