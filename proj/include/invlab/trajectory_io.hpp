#pragma once

#include <filesystem>
#include <iosfwd>

#include "invlab/sampler.hpp"

namespace invlab {

/// One row per step: t,wall_ms,z_norm,eps_norm (t is the step's target tag).
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Exact binary dump for replay. Layout, little-endian:
///   "INVTRAJ1" | u64 dim | u64 points | u64 evals | u8 has_shape | u64 H | u64 W
///   points x (i32 t, f64[dim]) | (points-1) x (i32 t, f64[dim]) eps | (points-1) x f64 seconds
///   | u64 blends | blends x i32
void write_trajectory_binary(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_binary(std::istream& is);

void save_trajectory_binary(const std::filesystem::path& path, const Trajectory& traj);
Trajectory load_trajectory_binary(const std::filesystem::path& path);

}  // namespace invlab
