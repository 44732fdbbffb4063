#include "weakpath/flow.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "weakpath/errors.hpp"
#include "weakpath/parallel.hpp"

namespace weakpath {
namespace {

std::optional<double> slope_at(const OpticalConfig& config, double x, double z) {
    const VelocitySample s = weak_momentum_exact(config, x, z);
    if (!s.valid) return std::nullopt;
    return s.slope;
}

// One RK4 step; nullopt if any stage sits on a node.
std::optional<double> rk4_step(const OpticalConfig& config, double x, double z, double h) {
    const auto k1 = slope_at(config, x, z);
    if (!k1) return std::nullopt;
    const auto k2 = slope_at(config, x + 0.5 * h * *k1, z + 0.5 * h);
    if (!k2) return std::nullopt;
    const auto k3 = slope_at(config, x + 0.5 * h * *k2, z + 0.5 * h);
    if (!k3) return std::nullopt;
    const auto k4 = slope_at(config, x + h * *k3, z + h);
    if (!k4) return std::nullopt;
    return x + h / 6.0 * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
}

void require_finite_state(double x, double z) {
    if (!std::isfinite(x)) {
        std::ostringstream msg;
        msg << "trajectory state became non-finite at z = " << z << " m";
        throw NumericalDiagnostic(msg.str());
    }
}

Trajectory start_trajectory(const OpticalConfig& config, double x0, double z0) {
    if (!std::isfinite(x0)) throw ConfigError("initial position must be finite");
    if (!(z0 >= 0.0)) throw ConfigError("initial plane must satisfy z0 >= 0");
    Trajectory t;
    t.kind = TrajectoryKind::exact;
    t.weight = std::norm(evaluate_field(config, x0, z0));
    t.points.push_back({z0, x0});
    if (!weak_momentum_exact(config, x0, z0).valid) t.status = TrajectoryStatus::node_encountered;
    return t;
}

// Advances t by `steps` RK4 steps of size (z_end - z_start)/steps; returns
// false if a node stopped it. Intermediate points are recorded if `record`.
bool advance(const OpticalConfig& config, Trajectory& t, double z_start, double z_end,
             std::size_t steps, bool record) {
    const double h = (z_end - z_start) / static_cast<double>(steps);
    double x = t.points.back().x;
    for (std::size_t s = 0; s < steps; ++s) {
        const double z = z_start + static_cast<double>(s) * h;
        const auto next = rk4_step(config, x, z, h);
        if (!next) {
            if (!record && t.points.back().z != z && s > 0) t.points.push_back({z, x});
            t.status = TrajectoryStatus::node_encountered;
            return false;
        }
        x = *next;
        const double z_next = (s + 1 == steps) ? z_end : z_start + static_cast<double>(s + 1) * h;
        require_finite_state(x, z_next);
        if (record || s + 1 == steps) t.points.push_back({z_next, x});
    }
    return true;
}

void check_increasing(std::span<const double> xs, const char* what) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) {
            std::ostringstream msg;
            msg << what << " must be strictly increasing (entry " << i << " = " << xs[i]
                << " follows " << xs[i - 1] << ")";
            throw ConfigError(msg.str());
        }
    }
}

Trajectory failed_trajectory(const OpticalConfig& config, double x0, double z0) {
    Trajectory t;
    t.points.push_back({z0, x0});
    t.weight = std::norm(evaluate_field(config, x0, std::max(z0, 0.0)));
    t.status = TrajectoryStatus::failed;
    return t;
}

}  // namespace

double peak_intensity_bound(const OpticalConfig& config, double z) {
    const double a = std::abs(config.amp_plus) + std::abs(config.amp_minus);
    return a * a * config.slit_waist / config.beam_width(z);
}

VelocitySample weak_momentum_exact(const OpticalConfig& config, double x, double z) {
    VelocitySample s;
    s.x = x;
    s.z = z;
    if (!std::isfinite(x) || !std::isfinite(z) || z < 0.0) return s;
    const cplx psi = evaluate_field(config, x, z);
    const double intensity = std::norm(psi);
    if (!(intensity > 0.0) || intensity < kNodeThreshold * peak_intensity_bound(config, z)) {
        return s;
    }
    const cplx grad = evaluate_field_gradient(config, x, z);
    // Im(psi_x / psi) = Im(psi_x conj(psi)) / |psi|^2
    s.slope = std::imag(grad * std::conj(psi)) / intensity / config.wavenumber;
    s.kx_weak = config.wavenumber * s.slope;
    s.valid = std::isfinite(s.slope);
    if (!s.valid) s.slope = s.kx_weak = 0.0;
    return s;
}

std::string_view to_string(TrajectoryKind kind) {
    return kind == TrajectoryKind::exact ? "exact" : "reconstructed";
}

std::string_view to_string(TrajectoryStatus status) {
    switch (status) {
        case TrajectoryStatus::complete: return "complete";
        case TrajectoryStatus::node_encountered: return "node_encountered";
        case TrajectoryStatus::left_domain: return "left_domain";
        case TrajectoryStatus::missing_data: return "missing_data";
        case TrajectoryStatus::failed: return "failed";
    }
    return "unknown";
}

Trajectory trace_trajectory(const OpticalConfig& config, double x0, double z0, double z1,
                            std::size_t steps) {
    if (!(z1 > z0)) throw ConfigError("trajectory range needs z1 > z0");
    if (steps < 1) throw ConfigError("trajectory needs at least one step");
    Trajectory t = start_trajectory(config, x0, z0);
    if (!t.complete()) return t;
    t.points.reserve(steps + 1);
    advance(config, t, z0, z1, steps, true);
    return t;
}

Trajectory trace_through(const OpticalConfig& config, double x0, std::span<const double> knots,
                         double max_step, std::size_t min_substeps) {
    if (knots.size() < 2) throw ConfigError("need at least two knots");
    check_increasing(knots, "trajectory knots");
    if (!(max_step > 0.0)) throw ConfigError("max_step must be positive");
    Trajectory t = start_trajectory(config, x0, knots.front());
    if (!t.complete()) return t;
    for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
        const double dz = knots[j + 1] - knots[j];
        const auto sub = std::max<std::size_t>(
            std::max<std::size_t>(min_substeps, 1),
            static_cast<std::size_t>(std::ceil(dz / max_step)));
        if (!advance(config, t, knots[j], knots[j + 1], sub, false)) break;
    }
    return t;
}

std::vector<Trajectory> trace_bundle(const OpticalConfig& config,
                                     std::span<const double> initial_positions, double z0,
                                     double z1, std::size_t steps, unsigned threads) {
    check_increasing(initial_positions, "initial positions");
    if (!(z1 > z0)) throw ConfigError("trajectory range needs z1 > z0");
    if (steps < 1) throw ConfigError("trajectory needs at least one step");
    std::vector<Trajectory> out(initial_positions.size());
    parallel_for(out.size(), threads, [&](std::size_t i) {
        try {
            out[i] = trace_trajectory(config, initial_positions[i], z0, z1, steps);
        } catch (const NumericalDiagnostic&) {
            out[i] = failed_trajectory(config, initial_positions[i], z0);
        }
    });
    return out;
}

std::vector<Trajectory> trace_bundle_through(const OpticalConfig& config,
                                             std::span<const double> initial_positions,
                                             std::span<const double> knots, double max_step,
                                             unsigned threads) {
    check_increasing(initial_positions, "initial positions");
    std::vector<Trajectory> out(initial_positions.size());
    parallel_for(out.size(), threads, [&](std::size_t i) {
        try {
            out[i] = trace_through(config, initial_positions[i], knots, max_step);
        } catch (const NumericalDiagnostic&) {
            out[i] = failed_trajectory(config, initial_positions[i], knots.front());
        }
    });
    return out;
}

std::vector<double> slit_seed_positions(const OpticalConfig& config, std::size_t per_slit,
                                        double spread_sigmas) {
    if (per_slit == 0) throw ConfigError("need at least one start point per slit");
    std::vector<double> xs;
    xs.reserve(2 * per_slit);
    const double half = 0.5 * config.slit_separation;
    const double span = spread_sigmas * config.slit_waist;
    for (double centre : {-half, half}) {
        for (std::size_t i = 0; i < per_slit; ++i) {
            const double f = per_slit == 1 ? 0.5
                                           : static_cast<double>(i) / static_cast<double>(per_slit - 1);
            xs.push_back(centre - span + 2.0 * span * f);
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

std::size_t count_order_inversions(std::span<const Trajectory> bundle) {
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < bundle.size(); ++i) {
        const auto& a = bundle[i].points;
        const auto& b = bundle[i + 1].points;
        const std::size_t n = std::min(a.size(), b.size());
        for (std::size_t s = 0; s < n; ++s) {
            if (a[s].x >= b[s].x) ++count;
        }
    }
    return count;
}

}  // namespace weakpath
