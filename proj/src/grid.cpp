#include "weakpath/grid.hpp"

#include <cmath>
#include <string>

#include "weakpath/errors.hpp"

namespace weakpath {

UniformGrid UniformGrid::symmetric(double halfwidth, std::size_t n) {
    if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) {
        throw ConfigError("grid halfwidth must be positive and finite");
    }
    if (n < 2) throw ConfigError("grid needs at least 2 points");
    const double dx = 2.0 * halfwidth / static_cast<double>(n);
    return UniformGrid{-halfwidth + 0.5 * dx, dx, n};
}

std::vector<double> UniformGrid::nodes() const {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = at(i);
    return x;
}

void UniformGrid::validate() const {
    if (n < 2) throw ConfigError("grid needs at least 2 points, got " + std::to_string(n));
    if (!(dx > 0.0) || !std::isfinite(dx)) throw ConfigError("grid spacing must be positive");
    if (!std::isfinite(x_min) || !std::isfinite(x_max())) {
        throw ConfigError("grid nodes must be finite");
    }
}

double trapezoid(std::span<const double> values, double dx) {
    if (values.size() < 2) return 0.0;
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * dx;
}

}  // namespace weakpath
