#include "weakpath/weakmeas.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "weakpath/errors.hpp"

namespace weakpath {
namespace {

void check_pair(const PolarizationPair& pair) {
    pair.grid.validate();
    if (pair.horizontal.size() != pair.grid.n || pair.vertical.size() != pair.grid.n) {
        throw ConfigError("polarization components must share the pair's grid");
    }
}

std::vector<double> spectrum_power(const PolarizationPair& pair, std::vector<cplx>& h,
                                   std::vector<cplx>& v) {
    h = pair.horizontal;
    v = pair.vertical;
    fft_forward(h);
    fft_forward(v);
    std::vector<double> p(h.size());
    for (std::size_t m = 0; m < h.size(); ++m) p[m] = std::norm(h[m]) + std::norm(v[m]);
    return p;
}

std::mt19937_64 stream_engine(std::uint64_t master_seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

double PolarizationPair::power() const {
    std::vector<double> u(horizontal.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::norm(horizontal[i]) + std::norm(vertical[i]);
    return trapezoid(u, grid.dx);
}

std::size_t MomentumProfile::valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1));
}

std::size_t MomentumProfile::clamped_count() const {
    return static_cast<std::size_t>(std::count(clamped.begin(), clamped.end(), 1));
}

PolarizationPair prepare_diagonal(const PlaneField& field) {
    PolarizationPair pair{field.z, field.grid, field.values, field.values};
    const double s = 1.0 / std::numbers::sqrt2;
    for (auto& v : pair.horizontal) v *= s;
    for (auto& v : pair.vertical) v *= s;
    return pair;
}

PolarizationPair apply_calcite(const PolarizationPair& pair, const CalciteParams& params,
                               double wavenumber) {
    check_pair(pair);
    if (!(wavenumber > 0.0)) throw ConfigError("wavenumber must be positive");
    PolarizationPair out{pair.z, pair.grid, {}, {}};
    const auto power = spectrum_power(pair, out.horizontal, out.vertical);

    double total = 0.0;
    double outer = 0.0;
    const auto k = angular_frequencies(pair.grid.n, pair.grid.dx);
    const double cutoff = 0.9 * std::numbers::pi / pair.grid.dx;
    for (std::size_t m = 0; m < k.size(); ++m) {
        total += power[m];
        if (std::abs(k[m]) >= cutoff) outer += power[m];
    }
    if (total > 0.0 && outer / total > kAliasingTolerance) {
        std::ostringstream msg;
        msg << "calcite step at z = " << pair.z << " m: " << outer / total
            << " of the spectrum lies near the Nyquist wavenumber (limit " << kAliasingTolerance
            << "); refine the grid";
        throw NumericalDiagnostic(msg.str());
    }

    for (std::size_t m = 0; m < k.size(); ++m) {
        const double half_phase = 0.5 * params.phase(k[m], wavenumber);
        out.horizontal[m] *= std::polar(1.0, -half_phase);
        out.vertical[m] *= std::polar(1.0, half_phase);
    }
    fft_inverse(out.horizontal);
    fft_inverse(out.vertical);
    return out;
}

double max_occupied_phase(const PolarizationPair& pair, const CalciteParams& params,
                          double wavenumber) {
    check_pair(pair);
    std::vector<cplx> h, v;
    const auto power = spectrum_power(pair, h, v);
    const double peak = *std::max_element(power.begin(), power.end());
    const auto k = angular_frequencies(pair.grid.n, pair.grid.dx);
    double worst = 0.0;
    for (std::size_t m = 0; m < k.size(); ++m) {
        if (power[m] > kAliasingTolerance * peak) {
            worst = std::max(worst, std::abs(params.phase(k[m], wavenumber)));
        }
    }
    return worst;
}

CircularIntensities circular_intensities(const PolarizationPair& pair) {
    check_pair(pair);
    const std::size_t n = pair.grid.n;
    CircularIntensities out{std::vector<double>(n), std::vector<double>(n)};
    const cplx i{0.0, 1.0};
    for (std::size_t j = 0; j < n; ++j) {
        const cplx h = pair.horizontal[j];
        const cplx v = pair.vertical[j];
        out.right[j] = 0.5 * std::norm(h + i * v);
        out.left[j] = 0.5 * std::norm(h - i * v);
    }
    return out;
}

MomentumProfile extract_momentum(std::span<const double> i_right, std::span<const double> i_left,
                                 const CalciteParams& params, double wavenumber,
                                 double floor_fraction) {
    if (params.coupling == 0.0 || !std::isfinite(params.coupling)) {
        throw ConfigError("momentum extraction needs a nonzero coupling zeta");
    }
    if (i_right.size() != i_left.size()) throw ConfigError("I_R and I_L differ in length");
    const std::size_t n = i_right.size();
    MomentumProfile out{std::vector<double>(n, 0.0), std::vector<unsigned char>(n, 0),
                        std::vector<unsigned char>(n, 0), true};
    double peak = 0.0;
    for (std::size_t j = 0; j < n; ++j) peak = std::max(peak, i_right[j] + i_left[j]);
    const double floor = floor_fraction * peak;
    const double scale = wavenumber / params.coupling;
    for (std::size_t j = 0; j < n; ++j) {
        const double sum = i_right[j] + i_left[j];
        if (!(sum > 0.0) || sum < floor) continue;
        double r = (i_left[j] - i_right[j]) / sum;
        if (std::abs(r) > 1.0) {
            out.clamped[j] = 1;
            r = std::clamp(r, -1.0, 1.0);
        }
        out.kx[j] = scale * (std::asin(r) - params.phase_offset);
        out.valid[j] = 1;
        out.all_masked = false;
    }
    return out;
}

CircularIntensities apply_shot_noise(const CircularIntensities& intensities, const ShotNoise& noise) {
    if (!(noise.photons >= 0.0) || !std::isfinite(noise.photons)) {
        throw ConfigError("photon budget must be finite and >= 0");
    }
    const std::size_t n = intensities.right.size();
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += intensities.right[j] + intensities.left[j];
    CircularIntensities out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    if (!(total > 0.0) || noise.photons == 0.0) return out;

    auto engine = stream_engine(noise.master_seed, noise.stream);
    const double scale = noise.photons / total;
    auto draw = [&](double mean) -> double {
        if (!(mean > 0.0)) return 0.0;
        std::poisson_distribution<long long> poisson(mean);
        return static_cast<double>(poisson(engine));
    };
    for (std::size_t j = 0; j < n; ++j) {
        out.right[j] = draw(scale * intensities.right[j]);
        out.left[j] = draw(scale * intensities.left[j]);
    }
    return out;
}

WeakMeasurementRecord simulate_plane_measurement(const OpticalConfig& config, double z,
                                                 const CalciteParams& params,
                                                 const UniformGrid& grid,
                                                 std::optional<double> photon_budget,
                                                 std::uint64_t master_seed, std::uint64_t stream) {
    if (photon_budget && (!(*photon_budget >= 0.0) || !std::isfinite(*photon_budget))) {
        throw ConfigError("photon budget must be finite and >= 0");
    }
    const PlaneField field = sample_plane(config, z, grid);
    const PolarizationPair pair = apply_calcite(prepare_diagonal(field), params, config.wavenumber);
    CircularIntensities intensities = circular_intensities(pair);
    if (photon_budget) {
        intensities = apply_shot_noise(intensities, {*photon_budget, master_seed, stream});
    }

    WeakMeasurementRecord record;
    record.z = z;
    record.grid = grid;
    record.params = params;
    record.photon_budget = photon_budget;
    record.seed = master_seed;
    record.stream = stream;
    record.max_abs_phase = max_occupied_phase(prepare_diagonal(field), params, config.wavenumber);
    record.momentum = extract_momentum(intensities.right, intensities.left, params, config.wavenumber);
    record.i_left = std::move(intensities.left);
    record.i_right = std::move(intensities.right);
    return record;
}

}  // namespace weakpath
