#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace weakpath {

// Uniform transverse grid x_i = x_min + i*dx, i in [0, n).
struct UniformGrid {
    double x_min = 0.0;
    double dx = 1.0;
    std::size_t n = 2;

    // Cell-centred grid on [-halfwidth, halfwidth]; x_i = -x_{n-1-i} exactly.
    static UniformGrid symmetric(double halfwidth, std::size_t n);

    double at(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
    double x_max() const { return at(n - 1); }
    std::vector<double> nodes() const;

    // Throws ConfigError unless dx > 0, n >= 2 and all nodes are finite.
    void validate() const;

    bool operator==(const UniformGrid&) const = default;
};

// Composite trapezoid rule on a uniform grid.
double trapezoid(std::span<const double> values, double dx);

}  // namespace weakpath
