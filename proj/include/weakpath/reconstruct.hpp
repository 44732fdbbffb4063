#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "weakpath/flow.hpp"
#include "weakpath/weakmeas.hpp"

namespace weakpath {

// Where the per-plane momentum comes from. `exact` overwrites the extracted
// profile with weak_momentum_exact on the same grid (oracle injection), which
// isolates the reconstruction step from the measurement chain.
enum class MomentumSource { extracted, exact };

struct ImagingPlaneSet {
    OpticalConfig config;
    CalciteParams params;
    std::optional<double> photon_budget;
    std::uint64_t seed = 0;
    MomentumSource source = MomentumSource::extracted;
    std::vector<WeakMeasurementRecord> planes;

    std::vector<double> z_values() const;
    // Throws ConfigError unless there are >= 2 planes with strictly
    // increasing z on overlapping grids.
    void validate() const;
};

// n planes equally spaced on [z_first, z_last] (inclusive).
std::vector<double> equally_spaced_planes(std::size_t n, double z_first, double z_last);

// One measurement per z. Plane i draws its noise from stream i of the master
// seed, so the result does not depend on the thread count. A failing plane
// aborts with a message naming its index.
ImagingPlaneSet build_dataset(const OpticalConfig& config, std::span<const double> z_list,
                              const CalciteParams& params, const UniformGrid& grid,
                              std::optional<double> photon_budget, std::uint64_t master_seed,
                              MomentumSource source = MomentumSource::extracted,
                              unsigned threads = 1);

enum class MaskPolicy { bridge, strict };

inline constexpr std::size_t kBridgeCells = 5;

// Plane-to-plane explicit stepping
//   x_{j+1} = x_j + (z_{j+1} - z_j) * kx(x_j, z_j) / k
// with kx interpolated in x from plane j. Truncates with a status when the
// momentum is unavailable.
std::vector<Trajectory> reconstruct_trajectories(const ImagingPlaneSet& dataset,
                                                 std::span<const double> initial_positions,
                                                 double wavenumber,
                                                 MaskPolicy policy = MaskPolicy::bridge,
                                                 unsigned threads = 1);

struct TrajectoryDeviation {
    double rms = 0.0;
    double max_abs = 0.0;
    std::size_t samples = 0;
};

struct ComparisonReport {
    std::vector<TrajectoryDeviation> per_trajectory;
    std::size_t crossing_count = 0;
    double coverage = 0.0;
    double fringe_spacing_ref = 0.0;
    double rms_overall = 0.0;     // over every (trajectory, plane) sample
    double rms_final = 0.0;       // across trajectories at the last plane
    double max_deviation = 0.0;
    std::size_t final_samples = 0;
};

// Deviations are taken at the union of the reconstructed z values, with the
// exact trajectories linearly interpolated there. Throws ConfigError if the
// lists differ in length or a pair disagrees at its first reconstructed
// point by more than start_tolerance.
ComparisonReport compare_trajectories(std::span<const Trajectory> reconstructed,
                                      std::span<const Trajectory> exact,
                                      double fringe_spacing_ref, double start_tolerance = 1e-9);

// Linear interpolation of a trajectory at z; nullopt outside its range.
std::optional<double> position_at(const Trajectory& trajectory, double z);

// lambda * z / d.
double far_field_fringe_spacing(const OpticalConfig& config, double z);

}  // namespace weakpath
