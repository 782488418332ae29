#include "invlab/trajectory_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "invlab/metrics.hpp"

namespace invlab {

static_assert(std::endian::native == std::endian::little, "binary dumps assume little-endian");

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,wall_ms,z_norm,eps_norm\n";
    for (std::size_t k = 0; k < traj.steps(); ++k) {
        const Latent& z = traj.latents[k + 1];
        os << z.t_index << ',' << format_real(traj.step_seconds[k] * 1e3) << ','
           << format_real(norm(z.values())) << ',' << format_real(norm(traj.eps[k].values()))
           << '\n';
    }
}

namespace {

constexpr std::array<char, 8> kMagic{'I', 'N', 'V', 'T', 'R', 'A', 'J', '1'};

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated trajectory dump");
    return v;
}

void put_values(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_values(std::istream& is, std::uint64_t n) {
    std::vector<double> v(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("truncated trajectory dump");
    return v;
}

}  // namespace

void write_trajectory_binary(std::ostream& os, const Trajectory& traj) {
    traj.validate();
    const Latent& first = traj.start();
    os.write(kMagic.data(), kMagic.size());
    put<std::uint64_t>(os, first.dim());
    put<std::uint64_t>(os, traj.latents.size());
    put<std::uint64_t>(os, traj.evals);
    put<std::uint8_t>(os, first.shape ? 1 : 0);
    put<std::uint64_t>(os, first.shape ? first.shape->height : 0);
    put<std::uint64_t>(os, first.shape ? first.shape->width : 0);
    for (const auto& z : traj.latents) {
        put<std::int32_t>(os, z.t_index);
        put_values(os, z.data);
    }
    for (const auto& e : traj.eps) {
        put<std::int32_t>(os, e.t_index);
        put_values(os, e.data);
    }
    for (double s : traj.step_seconds) put<double>(os, s);
    put<std::uint64_t>(os, traj.blended_steps.size());
    for (int t : traj.blended_steps) put<std::int32_t>(os, t);
}

Trajectory read_trajectory_binary(std::istream& is) {
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw std::runtime_error("not a trajectory dump");
    const auto dim = get<std::uint64_t>(is);
    const auto points = get<std::uint64_t>(is);
    if (points == 0) throw std::runtime_error("trajectory dump has no points");
    Trajectory traj;
    traj.evals = get<std::uint64_t>(is);
    const bool has_shape = get<std::uint8_t>(is) != 0;
    const auto h = get<std::uint64_t>(is);
    const auto w = get<std::uint64_t>(is);
    std::optional<GridShape> shape;
    if (has_shape) shape = GridShape{h, w};

    for (std::uint64_t k = 0; k < points; ++k) {
        const auto t = get<std::int32_t>(is);
        traj.latents.emplace_back(get_values(is, dim), t, shape);
    }
    for (std::uint64_t k = 0; k + 1 < points; ++k) {
        const auto t = get<std::int32_t>(is);
        traj.eps.emplace_back(get_values(is, dim), t, shape);
    }
    for (std::uint64_t k = 0; k + 1 < points; ++k) traj.step_seconds.push_back(get<double>(is));
    const auto blends = get<std::uint64_t>(is);
    for (std::uint64_t k = 0; k < blends; ++k) traj.blended_steps.push_back(get<std::int32_t>(is));
    traj.validate();
    return traj;
}

void save_trajectory_binary(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    write_trajectory_binary(os, traj);
}

Trajectory load_trajectory_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    return read_trajectory_binary(is);
}

}  // namespace invlab
