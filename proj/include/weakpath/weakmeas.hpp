#pragma once

// Calcite weak measurement and circular-basis readout.
//
// The pair (psi_H, psi_V) starts diagonal. The calcite multiplies each
// plane-wave component by exp(-+ i phi(k_x)/2) with phi = zeta k_x/k + phi0.
// A quarter-wave plate and displacer then project onto
//
//   E_R = (psi_H + i psi_V)/sqrt(2),   E_L = (psi_H - i psi_V)/sqrt(2)
//
// so a momentum eigenstate gives I_R ~ 1 - sin(phi) and I_L ~ 1 + sin(phi),
// and the momentum is read back as (k/zeta) (asin((I_L - I_R)/(I_L + I_R)) - phi0).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "weakpath/wavefield.hpp"

namespace weakpath {

struct CalciteParams {
    double coupling = 0.1;      // zeta
    double phase_offset = 0.0;  // phi0 [rad]

    double phase(double kx, double wavenumber) const {
        return coupling * (kx / wavenumber) + phase_offset;
    }
};

struct PolarizationPair {
    double z = 0.0;
    UniformGrid grid;
    std::vector<cplx> horizontal;
    std::vector<cplx> vertical;

    double power() const;
};

struct CircularIntensities {
    std::vector<double> right;
    std::vector<double> left;
};

// Points with I_L + I_R below this fraction of the plane's peak are masked.
inline constexpr double kIntensityFloor = 1e-8;

struct MomentumProfile {
    std::vector<double> kx;              // [1/m]; 0 where invalid
    std::vector<unsigned char> valid;
    std::vector<unsigned char> clamped;  // |ratio| > 1 before clamping
    bool all_masked = false;

    std::size_t valid_count() const;
    std::size_t clamped_count() const;
};

// psi_H = psi_V = psi / sqrt(2).
PolarizationPair prepare_diagonal(const PlaneField& field);

// Unitary calcite coupling applied in the transverse-momentum domain.
// Throws NumericalDiagnostic on aliased input.
PolarizationPair apply_calcite(const PolarizationPair& pair, const CalciteParams& params,
                               double wavenumber);

CircularIntensities circular_intensities(const PolarizationPair& pair);

// Largest |phi(k_x)| over spectral bins holding more than kAliasingTolerance
// of the peak bin power. Extraction is unambiguous only below pi/2.
double max_occupied_phase(const PolarizationPair& pair, const CalciteParams& params,
                          double wavenumber);

// Throws ConfigError if zeta == 0 or the spans differ in length.
MomentumProfile extract_momentum(std::span<const double> i_right, std::span<const double> i_left,
                                 const CalciteParams& params, double wavenumber,
                                 double floor_fraction = kIntensityFloor);

// Replaces each intensity with a Poisson count of mean
// photons * I / sum(I_R + I_L). Deterministic for a given engine state.
struct ShotNoise {
    double photons = 0.0;
    std::uint64_t master_seed = 0;
    std::uint64_t stream = 0;  // plane index
};

CircularIntensities apply_shot_noise(const CircularIntensities& intensities, const ShotNoise& noise);

struct WeakMeasurementRecord {
    double z = 0.0;
    UniformGrid grid;
    std::vector<double> i_left;
    std::vector<double> i_right;
    MomentumProfile momentum;
    CalciteParams params;
    std::optional<double> photon_budget;  // nullopt: noiseless
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    double max_abs_phase = 0.0;  // max |phi| over the occupied spectrum
};

// sample_plane -> prepare_diagonal -> apply_calcite -> circular_intensities
// -> optional shot noise -> extract_momentum.
WeakMeasurementRecord simulate_plane_measurement(const OpticalConfig& config, double z,
                                                 const CalciteParams& params,
                                                 const UniformGrid& grid,
                                                 std::optional<double> photon_budget,
                                                 std::uint64_t master_seed = 0,
                                                 std::uint64_t stream = 0);

}  // namespace weakpath
