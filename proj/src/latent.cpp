#include "invlab/latent.hpp"

#include <cmath>
#include <stdexcept>

namespace invlab {

Latent::Latent(std::vector<double> values, int t, std::optional<GridShape> grid)
    : data(std::move(values)), shape(grid), t_index(t) {
    if (shape && shape->size() != data.size())
        throw std::invalid_argument("latent shape does not match its dimension");
}

Latent Latent::with(std::vector<double> values, int t) const {
    Latent out;
    out.data = std::move(values);
    out.shape = shape;
    out.t_index = t;
    return out;
}

void Latent::validate() const {
    if (shape && shape->size() != data.size())
        throw std::invalid_argument("latent shape does not match its dimension");
    for (double v : data)
        if (!std::isfinite(v)) throw std::domain_error("latent has a non-finite component");
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a.size(), b.size(), "distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace invlab
