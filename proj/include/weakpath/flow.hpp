#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "weakpath/wavefield.hpp"

namespace weakpath {

// Samples with |psi|^2 below this fraction of the plane's peak intensity are
// treated as nodes: no velocity is defined there.
inline constexpr double kNodeThreshold = 1e-12;

// Reference peak intensity at distance z: (|a+| + |a-|)^2 * sigma / w(z).
// It bounds |psi(x, z)|^2 from above for every x.
double peak_intensity_bound(const OpticalConfig& config, double z);

// Transverse flow at one point. slope = dx/dz, kx_weak = k * slope.
struct VelocitySample {
    double x = 0.0;
    double z = 0.0;
    double slope = 0.0;
    double kx_weak = 0.0;
    bool valid = false;
};

// kx_weak = Im(psi_x / psi) from the analytic field. Never throws for finite
// input; nodes come back with valid == false and zero velocity.
VelocitySample weak_momentum_exact(const OpticalConfig& config, double x, double z);

enum class TrajectoryKind { exact, reconstructed };

enum class TrajectoryStatus {
    complete,
    node_encountered,  // stopped at a node; points up to there are kept
    left_domain,       // reconstruction walked off the measured x-range
    missing_data,      // reconstruction hit a masked gap it may not bridge
    failed,            // non-finite state; only set inside bundles
};

std::string_view to_string(TrajectoryKind kind);
std::string_view to_string(TrajectoryStatus status);

struct TrajectoryPoint {
    double z = 0.0;
    double x = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    TrajectoryKind kind = TrajectoryKind::exact;
    double weight = 0.0;
    TrajectoryStatus status = TrajectoryStatus::complete;

    bool complete() const { return status == TrajectoryStatus::complete; }
    const TrajectoryPoint& back() const { return points.back(); }
};

// Integrates dx/dz = v(x, z) with classic RK4 at fixed step (z1 - z0)/steps,
// recording every step. Stops early with node_encountered if any stage lands
// on a node. Throws NumericalDiagnostic on a non-finite state and ConfigError
// on bad arguments.
Trajectory trace_trajectory(const OpticalConfig& config, double x0, double z0, double z1,
                            std::size_t steps);

// Same integrator, but records only at the given knots. Each interval gets
// max(min_substeps, ceil(dz / max_step)) RK4 steps. Knots must be strictly
// increasing; the first knot is the starting plane.
Trajectory trace_through(const OpticalConfig& config, double x0, std::span<const double> knots,
                         double max_step, std::size_t min_substeps = 4);

// One trajectory per start position, in input order, weighted by
// |psi(x0, z0)|^2. Starts must be strictly increasing. A failure in one
// trajectory is recorded in its status and does not abort the others.
std::vector<Trajectory> trace_bundle(const OpticalConfig& config,
                                     std::span<const double> initial_positions, double z0,
                                     double z1, std::size_t steps, unsigned threads = 1);

// Bundle variant of trace_through.
std::vector<Trajectory> trace_bundle_through(const OpticalConfig& config,
                                             std::span<const double> initial_positions,
                                             std::span<const double> knots, double max_step,
                                             unsigned threads = 1);

// per_slit start points spread evenly over +-spread*sigma around each slit
// centre, sorted ascending. Points from the two slits are merged, so
// overlapping ranges still give a strictly increasing list.
std::vector<double> slit_seed_positions(const OpticalConfig& config, std::size_t per_slit,
                                        double spread_sigmas = 2.0);

// Number of adjacent pairs (i, i+1) with x_i >= x_{i+1}, summed over every
// step index present in both trajectories.
std::size_t count_order_inversions(std::span<const Trajectory> bundle);

}  // namespace weakpath
