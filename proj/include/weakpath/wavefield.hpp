#pragma once

// Two-Gaussian-slit scalar field in the paraxial regime.
//
// The field obeys  dpsi/dz = (i / 2k) d^2psi/dx^2,  i.e. a free Schrodinger
// equation with z in the role of time and k in the role of mass. Each slit
// launches a Gaussian whose *intensity* falls to 1/e^2 at |x - c| = sigma:
//
//   psi(x, 0) = a+ exp(-(x - d/2)^2 / sigma^2) + a- exp(-(x + d/2)^2 / sigma^2)
//
// With z_R = k sigma^2 / 2 and complex beam parameter q(z) = z - i z_R, a
// single slit evolves in closed form as
//
//   G(x; z) = sqrt(q(0) / q(z)) * exp(i k x^2 / (2 q(z)))
//
// which carries the width law w(z) = sigma sqrt(1 + (z/z_R)^2), the wavefront
// curvature and the (1D) Gouy phase. The spectral propagator multiplies by
// exp(-i k_x^2 dz / (2k)), which is the same evolution operator.

#include <complex>
#include <cstddef>
#include <vector>

#include "weakpath/fft.hpp"
#include "weakpath/grid.hpp"

namespace weakpath {

struct OpticalConfig {
    double wavelength = 1.0e-6;       // [m]
    double wavenumber = 0.0;          // 2*pi/wavelength [1/m]
    double slit_separation = 500e-6;  // centre-to-centre [m]
    double slit_waist = 100e-6;       // 1/e^2 intensity half-width at z = 0 [m]
    cplx amp_plus{1.0, 0.0};          // slit centred at +d/2
    cplx amp_minus{1.0, 0.0};         // slit centred at -d/2

    // Validates and fills in the wavenumber. Throws ConfigError.
    static OpticalConfig make(double wavelength, double slit_separation, double slit_waist,
                              cplx amp_plus, cplx amp_minus);

    double rayleigh_range() const;
    double beam_width(double z) const;
    bool symmetric() const { return amp_plus == amp_minus; }
};

// Default geometry. None of these optical numbers are measured values; they
// are picked so the fringes are well resolved over 0..8.2 m.
OpticalConfig default_config();

struct PlaneField {
    double z = 0.0;
    UniformGrid grid;
    std::vector<cplx> values;

    double power() const;  // trapezoid integral of |psi|^2
};

// psi(x, z). Requires z >= 0.
cplx evaluate_field(const OpticalConfig& config, double x, double z);
// d psi / dx, analytic.
cplx evaluate_field_gradient(const OpticalConfig& config, double x, double z);

// Grid request. halfwidth <= 0 selects the automatic extent
// (d + 8 w(z_max)) / 2, the span holding both beams out to four widths.
struct GridSpec {
    std::size_t n = 8192;
    double halfwidth = 0.0;
};

UniformGrid resolve_grid(const OpticalConfig& config, const GridSpec& spec, double z_max);

// Analytic upper bound on the fraction of the beam power lying outside
// [grid.x_min, grid.x_max] at distance z.
double power_outside_fraction(const OpticalConfig& config, const UniformGrid& grid, double z);

inline constexpr double kTruncationTolerance = 1e-6;
inline constexpr double kAliasingTolerance = 1e-8;

// Samples psi on the grid. Throws NumericalDiagnostic if more than
// kTruncationTolerance of the power falls outside the grid.
PlaneField sample_plane(const OpticalConfig& config, double z, const UniformGrid& grid);

// Free paraxial propagation by dz through the transverse-momentum domain.
// Throws NumericalDiagnostic if the input spectrum has more than
// kAliasingTolerance of its mass near the Nyquist wavenumber, or if the
// propagated field wraps into the outer 5% of the periodic window.
PlaneField propagate_spectral(const PlaneField& field, double dz, double wavenumber);

std::vector<double> energy_density(const PlaneField& field);

struct PhaseProfile {
    std::vector<double> phase;        // unwrapped along x [rad]
    std::vector<unsigned char> node;  // 1 where |psi|^2 < threshold * peak
};

// Unwraps arg(psi) along x. Node points are flagged and do not feed the
// unwrapping; the phase is carried across them unchanged.
PhaseProfile phase_profile(const PlaneField& field, double node_threshold = 1e-12);

}  // namespace weakpath
