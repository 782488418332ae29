#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "invlab/sampler.hpp"

namespace invlab {

struct PlotSeries {
    std::string label;
    const Trajectory* trajectory = nullptr;
};

/// Distance |z_t - z0| per recorded point (one entry per latent, start included).
std::vector<double> distance_curve(const Trajectory& traj, const Latent& z0);

/// Standalone SVG: distance-to-z0 curve per series and, for d = 2, the latent
/// paths in the plane next to it.
std::string render_trajectories_svg(const std::vector<PlotSeries>& series, const Latent& z0);

void plot_trajectories(const std::vector<PlotSeries>& series, const Latent& z0,
                       const std::filesystem::path& path);
void plot_trajectory(const Trajectory& traj, const Latent& z0, const std::filesystem::path& path);

}  // namespace invlab
