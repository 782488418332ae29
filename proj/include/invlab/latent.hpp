#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace invlab {

struct GridShape {
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t size() const { return height * width; }
    bool operator==(const GridShape&) const = default;
};

/// A flat real vector tagged with the timestep it lives at.
struct Latent {
    std::vector<double> data;
    std::optional<GridShape> shape;
    int t_index = 0;

    Latent() = default;
    Latent(std::vector<double> values, int t, std::optional<GridShape> grid = std::nullopt);

    std::size_t dim() const { return data.size(); }
    std::span<const double> values() const { return data; }

    /// Same metadata, new values and tag.
    Latent with(std::vector<double> values, int t) const;

    /// Throws if a component is non-finite or the shape disagrees with dim().
    void validate() const;
};

double norm(std::span<const double> v);
double distance(std::span<const double> a, std::span<const double> b);

void require_same_dim(std::size_t a, std::size_t b, const char* what);

/// Opaque conditioning token. An empty token selects the unconditional model.
struct Condition {
    std::optional<std::string> token;

    static Condition null() { return {}; }
    static Condition named(std::string name) { return {std::move(name)}; }
};

}  // namespace invlab
