#include "weakpath/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weakpath/errors.hpp"

namespace weakpath {

MaskedInterpolator::MaskedInterpolator(const UniformGrid& grid, std::span<const double> values,
                                       std::span<const unsigned char> valid,
                                       std::size_t max_gap_cells)
    : grid_(grid), max_gap_cells_(max_gap_cells) {
    grid_.validate();
    if (values.size() != grid.n || valid.size() != grid.n) {
        throw ConfigError("profile and mask must match the grid size");
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < grid.n; ++i) {
        if (valid[i] && std::isfinite(values[i])) nodes_.push_back({i, grid.at(i), values[i], nan});
    }
    // Fritsch-Carlson slopes at nodes with valid neighbours on both sides;
    // on a uniform grid the weighted harmonic mean reduces to the plain one.
    for (std::size_t j = 1; j + 1 < nodes_.size(); ++j) {
        const Node& a = nodes_[j - 1];
        const Node& b = nodes_[j + 1];
        Node& c = nodes_[j];
        if (a.index + 1 != c.index || c.index + 1 != b.index) continue;
        const double left = (c.y - a.y) / grid.dx;
        const double right = (b.y - c.y) / grid.dx;
        c.slope = (left * right <= 0.0) ? 0.0 : 2.0 * left * right / (left + right);
    }
}

std::optional<double> MaskedInterpolator::operator()(double x) const {
    if (nodes_.empty() || !std::isfinite(x)) return std::nullopt;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x,
                               [](double v, const Node& n) { return v < n.x; });
    if (it == nodes_.begin()) return std::nullopt;
    if (it == nodes_.end()) {
        if (x == nodes_.back().x) return nodes_.back().y;
        return std::nullopt;
    }
    const Node& a = *(it - 1);
    const Node& b = *it;
    if (x == a.x) return a.y;
    const std::size_t masked = b.index - a.index - 1;
    if (masked > 0 && masked >= max_gap_cells_) return std::nullopt;

    const double h = b.x - a.x;
    const double t = (x - a.x) / h;
    if (masked > 0 || std::isnan(a.slope) || std::isnan(b.slope)) {
        return a.y + t * (b.y - a.y);
    }
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * a.y + (t3 - 2.0 * t2 + t) * h * a.slope +
           (-2.0 * t3 + 3.0 * t2) * b.y + (t3 - t2) * h * b.slope;
}

double MaskedInterpolator::x_first_valid() const {
    return nodes_.empty() ? std::numeric_limits<double>::quiet_NaN() : nodes_.front().x;
}

double MaskedInterpolator::x_last_valid() const {
    return nodes_.empty() ? std::numeric_limits<double>::quiet_NaN() : nodes_.back().x;
}

}  // namespace weakpath
