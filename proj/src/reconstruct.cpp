#include "weakpath/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "weakpath/errors.hpp"
#include "weakpath/interpolate.hpp"
#include "weakpath/parallel.hpp"

namespace weakpath {
namespace {

void require_increasing(std::span<const double> xs, const char* what) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) {
            std::ostringstream msg;
            msg << what << " must be strictly increasing (entry " << i << ")";
            throw ConfigError(msg.str());
        }
    }
}

void inject_exact_momentum(const OpticalConfig& config, WeakMeasurementRecord& record) {
    auto& m = record.momentum;
    m.all_masked = true;
    for (std::size_t i = 0; i < record.grid.n; ++i) {
        const VelocitySample s = weak_momentum_exact(config, record.grid.at(i), record.z);
        m.kx[i] = s.valid ? s.kx_weak : 0.0;
        m.valid[i] = s.valid ? 1 : 0;
        m.clamped[i] = 0;
        if (s.valid) m.all_masked = false;
    }
}

}  // namespace

std::vector<double> ImagingPlaneSet::z_values() const {
    std::vector<double> z(planes.size());
    std::transform(planes.begin(), planes.end(), z.begin(), [](const auto& p) { return p.z; });
    return z;
}

void ImagingPlaneSet::validate() const {
    if (planes.size() < 2) throw ConfigError("a dataset needs at least two imaging planes");
    require_increasing(z_values(), "imaging plane positions");
    double lo = -INFINITY;
    double hi = INFINITY;
    for (const auto& p : planes) {
        p.grid.validate();
        if (p.momentum.kx.size() != p.grid.n || p.momentum.valid.size() != p.grid.n) {
            throw ConfigError("plane momentum profile does not match its grid");
        }
        lo = std::max(lo, p.grid.x_min);
        hi = std::min(hi, p.grid.x_max());
    }
    if (!(hi > lo)) throw ConfigError("imaging plane grids share no common x-interval");
}

std::vector<double> equally_spaced_planes(std::size_t n, double z_first, double z_last) {
    if (n < 2) throw ConfigError("need at least two planes");
    if (!(z_last > z_first) || !(z_first >= 0.0)) {
        throw ConfigError("plane range needs 0 <= z_first < z_last");
    }
    std::vector<double> z(n);
    const double step = (z_last - z_first) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) z[i] = z_first + static_cast<double>(i) * step;
    z.back() = z_last;
    return z;
}

ImagingPlaneSet build_dataset(const OpticalConfig& config, std::span<const double> z_list,
                              const CalciteParams& params, const UniformGrid& grid,
                              std::optional<double> photon_budget, std::uint64_t master_seed,
                              MomentumSource source, unsigned threads) {
    if (z_list.size() < 2) throw ConfigError("a dataset needs at least two imaging planes");
    require_increasing(z_list, "imaging plane positions");

    ImagingPlaneSet set{config, params, photon_budget, master_seed, source, {}};
    set.planes.resize(z_list.size());
    parallel_for(z_list.size(), threads, [&](std::size_t i) {
        auto tag = [&](const std::exception& e) {
            std::ostringstream msg;
            msg << "imaging plane " << i << " (z = " << z_list[i] << " m): " << e.what();
            return msg.str();
        };
        try {
            set.planes[i] = simulate_plane_measurement(config, z_list[i], params, grid,
                                                       photon_budget, master_seed, i);
            if (source == MomentumSource::exact) inject_exact_momentum(config, set.planes[i]);
        } catch (const ConfigError& e) {
            throw ConfigError(tag(e));
        } catch (const NumericalDiagnostic& e) {
            throw NumericalDiagnostic(tag(e));
        }
    });
    return set;
}

std::vector<Trajectory> reconstruct_trajectories(const ImagingPlaneSet& dataset,
                                                 std::span<const double> initial_positions,
                                                 double wavenumber, MaskPolicy policy,
                                                 unsigned threads) {
    dataset.validate();
    if (!(wavenumber > 0.0)) throw ConfigError("wavenumber must be positive");
    require_increasing(initial_positions, "initial positions");

    const std::size_t gap = policy == MaskPolicy::bridge ? kBridgeCells : 0;
    std::vector<MaskedInterpolator> momentum;
    momentum.reserve(dataset.planes.size());
    for (const auto& p : dataset.planes) {
        momentum.emplace_back(p.grid, p.momentum.kx, p.momentum.valid, gap);
    }

    const auto& first = dataset.planes.front();
    std::vector<double> combined(first.grid.n);
    for (std::size_t i = 0; i < combined.size(); ++i) combined[i] = first.i_left[i] + first.i_right[i];
    const std::vector<unsigned char> all_valid(first.grid.n, 1);
    const MaskedInterpolator intensity(first.grid, combined, all_valid, 0);

    for (double x0 : initial_positions) {
        if (!momentum.front()(x0)) {
            std::ostringstream msg;
            msg << "initial position " << x0 << " m lies outside the first plane's valid range";
            throw ConfigError(msg.str());
        }
    }

    std::vector<Trajectory> out(initial_positions.size());
    parallel_for(out.size(), threads, [&](std::size_t i) {
        Trajectory t;
        t.kind = TrajectoryKind::reconstructed;
        t.weight = std::max(0.0, intensity(initial_positions[i]).value_or(0.0));
        t.points.reserve(dataset.planes.size());
        double x = initial_positions[i];
        t.points.push_back({dataset.planes.front().z, x});
        for (std::size_t j = 0; j + 1 < dataset.planes.size(); ++j) {
            const auto kx = momentum[j](x);
            if (!kx) {
                const bool inside = x >= momentum[j].x_first_valid() && x <= momentum[j].x_last_valid();
                t.status = inside ? TrajectoryStatus::missing_data : TrajectoryStatus::left_domain;
                break;
            }
            const double dz = dataset.planes[j + 1].z - dataset.planes[j].z;
            x += dz * *kx / wavenumber;
            if (!std::isfinite(x)) {
                t.status = TrajectoryStatus::failed;
                break;
            }
            t.points.push_back({dataset.planes[j + 1].z, x});
        }
        out[i] = std::move(t);
    });
    return out;
}

std::optional<double> position_at(const Trajectory& trajectory, double z) {
    const auto& p = trajectory.points;
    if (p.empty() || z < p.front().z || z > p.back().z) return std::nullopt;
    auto it = std::lower_bound(p.begin(), p.end(), z,
                               [](const TrajectoryPoint& a, double v) { return a.z < v; });
    if (it->z == z) return it->x;
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double t = (z - a.z) / (b.z - a.z);
    return a.x + t * (b.x - a.x);
}

double far_field_fringe_spacing(const OpticalConfig& config, double z) {
    return config.wavelength * z / config.slit_separation;
}

ComparisonReport compare_trajectories(std::span<const Trajectory> reconstructed,
                                      std::span<const Trajectory> exact, double fringe_spacing_ref,
                                      double start_tolerance) {
    if (reconstructed.size() != exact.size()) {
        throw ConfigError("reconstructed and exact trajectory lists differ in length");
    }
    if (!(fringe_spacing_ref > 0.0)) throw ConfigError("fringe spacing reference must be positive");

    ComparisonReport report;
    report.fringe_spacing_ref = fringe_spacing_ref;
    report.per_trajectory.resize(reconstructed.size());

    std::vector<double> planes;
    for (const auto& t : reconstructed) {
        for (const auto& p : t.points) planes.push_back(p.z);
    }
    std::sort(planes.begin(), planes.end());
    planes.erase(std::unique(planes.begin(), planes.end()), planes.end());
    if (planes.empty()) return report;
    const double z_final = planes.back();

    double sum_sq = 0.0;
    std::size_t count = 0;
    double final_sq = 0.0;
    std::size_t covered_steps = 0;
    for (std::size_t i = 0; i < reconstructed.size(); ++i) {
        const Trajectory& r = reconstructed[i];
        const Trajectory& e = exact[i];
        if (r.points.empty()) continue;
        const auto start = position_at(e, r.points.front().z);
        if (!start || std::abs(*start - r.points.front().x) > start_tolerance) {
            std::ostringstream msg;
            msg << "trajectory " << i << ": reconstructed start x = " << r.points.front().x
                << " m does not match the exact trajectory at z = " << r.points.front().z << " m";
            throw ConfigError(msg.str());
        }
        covered_steps += r.points.size() - 1;
        TrajectoryDeviation& dev = report.per_trajectory[i];
        double sq = 0.0;
        for (const auto& p : r.points) {
            const auto ref = position_at(e, p.z);
            if (!ref) continue;
            const double d = p.x - *ref;
            sq += d * d;
            dev.max_abs = std::max(dev.max_abs, std::abs(d));
            ++dev.samples;
            if (p.z == z_final) {
                final_sq += d * d;
                ++report.final_samples;
            }
        }
        dev.rms = dev.samples > 0 ? std::sqrt(sq / static_cast<double>(dev.samples)) : 0.0;
        sum_sq += sq;
        count += dev.samples;
        report.max_deviation = std::max(report.max_deviation, dev.max_abs);
    }
    report.rms_overall = count > 0 ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
    report.rms_final =
        report.final_samples > 0 ? std::sqrt(final_sq / static_cast<double>(report.final_samples)) : 0.0;

    const std::size_t expected = reconstructed.size() * (planes.size() - 1);
    report.coverage = expected > 0 ? static_cast<double>(covered_steps) / static_cast<double>(expected)
                                   : 1.0;

    // Order inversions between neighbours (sorted by start position) at every plane.
    std::vector<std::size_t> order(reconstructed.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = reconstructed[a].points;
        const auto& pb = reconstructed[b].points;
        if (pa.empty() || pb.empty()) return !pa.empty() && pb.empty();
        return pa.front().x < pb.front().x;
    });
    auto x_at_plane = [](const Trajectory& t, double z) -> std::optional<double> {
        auto it = std::lower_bound(t.points.begin(), t.points.end(), z,
                                   [](const TrajectoryPoint& a, double v) { return a.z < v; });
        if (it == t.points.end() || it->z != z) return std::nullopt;
        return it->x;
    };
    for (double z : planes) {
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            const auto a = x_at_plane(reconstructed[order[i]], z);
            const auto b = x_at_plane(reconstructed[order[i + 1]], z);
            if (a && b && *a >= *b) ++report.crossing_count;
        }
    }
    return report;
}

}  // namespace weakpath
