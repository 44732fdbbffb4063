#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "weakpath/grid.hpp"

namespace weakpath {

// Interpolates a sampled profile that carries a validity mask.
//
// Inside runs of valid samples the interpolant is a monotone piecewise cubic
// (Fritsch-Carlson slopes). An interval touching a run boundary falls back to
// linear. A masked gap of fewer than max_gap_cells samples is bridged
// linearly; with max_gap_cells == 0 no gap is bridged. Outside the valid
// range, or inside a wider gap, the result is nullopt.
class MaskedInterpolator {
public:
    MaskedInterpolator(const UniformGrid& grid, std::span<const double> values,
                       std::span<const unsigned char> valid, std::size_t max_gap_cells);

    std::optional<double> operator()(double x) const;

    bool empty() const { return nodes_.empty(); }
    double x_first_valid() const;
    double x_last_valid() const;

private:
    struct Node {
        std::size_t index;
        double x;
        double y;
        double slope;
    };

    UniformGrid grid_;
    std::size_t max_gap_cells_;
    std::vector<Node> nodes_;
};

}  // namespace weakpath
