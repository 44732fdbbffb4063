#include "weakpath/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "weakpath/errors.hpp"

namespace weakpath {
namespace {

constexpr double kSqrtHalfPi = 1.2533141373155002512;  // sqrt(pi/2)

struct BeamState {
    double w2 = 0.0;         // w(z)^2
    double curvature = 0.0;  // k z / (z^2 + z_R^2)
    cplx prefactor;          // sqrt(q(0)/q(z))
};

BeamState beam_state(const OpticalConfig& c, double z) {
    const double zr = c.rayleigh_range();
    const double denom = z * z + zr * zr;
    BeamState s;
    s.w2 = c.slit_waist * c.slit_waist * (1.0 + (z / zr) * (z / zr));
    s.curvature = c.wavenumber * z / denom;
    s.prefactor = std::sqrt(cplx(zr * zr, -zr * z) / denom);
    return s;
}

// exp(i k u^2 / (2 q)) split into real decay and phase so that far tails
// underflow to zero instead of producing NaN.
cplx gaussian(const BeamState& s, double u) {
    const double u2 = u * u;
    return std::polar(std::exp(-u2 / s.w2), 0.5 * s.curvature * u2);
}

void require_nonnegative_z(double z) {
    if (!(z >= 0.0) || !std::isfinite(z)) {
        throw ConfigError("propagation distance z must be finite and >= 0");
    }
}

double edge_fraction(std::span<const cplx> values, double band) {
    const std::size_t n = values.size();
    const auto edge = static_cast<std::size_t>(std::ceil(band * static_cast<double>(n)));
    double total = 0.0;
    double outer = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = std::norm(values[i]);
        total += p;
        if (i < edge || i + edge >= n) outer += p;
    }
    return total > 0.0 ? outer / total : 0.0;
}

}  // namespace

OpticalConfig OpticalConfig::make(double wavelength, double slit_separation, double slit_waist,
                                  cplx amp_plus, cplx amp_minus) {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(wavelength)) throw ConfigError("wavelength must be positive");
    if (!positive(slit_separation)) throw ConfigError("slit separation must be positive");
    if (!positive(slit_waist)) throw ConfigError("slit waist must be positive");
    auto finite = [](cplx a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); };
    if (!finite(amp_plus) || !finite(amp_minus)) throw ConfigError("slit amplitudes must be finite");
    if (amp_plus == cplx{} && amp_minus == cplx{}) {
        throw ConfigError("slit amplitudes must not both be zero");
    }
    OpticalConfig c;
    c.wavelength = wavelength;
    c.wavenumber = 2.0 * std::numbers::pi / wavelength;
    c.slit_separation = slit_separation;
    c.slit_waist = slit_waist;
    c.amp_plus = amp_plus;
    c.amp_minus = amp_minus;
    return c;
}

double OpticalConfig::rayleigh_range() const {
    return 0.5 * wavenumber * slit_waist * slit_waist;
}

double OpticalConfig::beam_width(double z) const {
    const double r = z / rayleigh_range();
    return slit_waist * std::sqrt(1.0 + r * r);
}

OpticalConfig default_config() {
    return OpticalConfig::make(1.0e-6, 500e-6, 100e-6, {1.0, 0.0}, {1.0, 0.0});
}

double PlaneField::power() const {
    std::vector<double> u(values.size());
    std::transform(values.begin(), values.end(), u.begin(), [](cplx v) { return std::norm(v); });
    return trapezoid(u, grid.dx);
}

cplx evaluate_field(const OpticalConfig& config, double x, double z) {
    require_nonnegative_z(z);
    const BeamState s = beam_state(config, z);
    const double half = 0.5 * config.slit_separation;
    cplx sum{};
    if (config.amp_plus != cplx{}) sum += config.amp_plus * gaussian(s, x - half);
    if (config.amp_minus != cplx{}) sum += config.amp_minus * gaussian(s, x + half);
    return s.prefactor * sum;
}

cplx evaluate_field_gradient(const OpticalConfig& config, double x, double z) {
    require_nonnegative_z(z);
    const BeamState s = beam_state(config, z);
    const double half = 0.5 * config.slit_separation;
    // d/dx exp(i k u^2 / 2q) = (i k u / q) exp(...) = (-2u/w^2 + i curvature u) exp(...)
    auto term = [&](cplx amp, double u) {
        if (amp == cplx{}) return cplx{};
        return amp * cplx(-2.0 * u / s.w2, s.curvature * u) * gaussian(s, u);
    };
    return s.prefactor * (term(config.amp_plus, x - half) + term(config.amp_minus, x + half));
}

UniformGrid resolve_grid(const OpticalConfig& config, const GridSpec& spec, double z_max) {
    require_nonnegative_z(z_max);
    double halfwidth = spec.halfwidth;
    if (!(halfwidth > 0.0)) {
        halfwidth = 0.5 * (config.slit_separation + 8.0 * config.beam_width(z_max));
    }
    return UniformGrid::symmetric(halfwidth, spec.n);
}

double power_outside_fraction(const OpticalConfig& config, const UniformGrid& grid, double z) {
    const double w = config.beam_width(z);
    const double sigma = config.slit_waist;
    const double half = 0.5 * config.slit_separation;
    const double lo = grid.x_min - 0.5 * grid.dx;
    const double hi = grid.x_max() + 0.5 * grid.dx;

    // Per-slit power outside, in units of sigma*sqrt(pi/2).
    auto outside = [&](double centre) {
        const double s = std::numbers::sqrt2 / w;
        return 0.5 * (std::erfc(s * (hi - centre)) + std::erfc(s * (centre - lo)));
    };
    const double ap = std::norm(config.amp_plus);
    const double am = std::norm(config.amp_minus);
    // |a+G+ + a-G-|^2 <= 2(|a+G+|^2 + |a-G-|^2)
    const double bound = 2.0 * (ap * outside(half) + am * outside(-half));
    // The slit overlap integral is conserved by free propagation.
    const double overlap = std::exp(-config.slit_separation * config.slit_separation /
                                    (2.0 * sigma * sigma));
    const double total =
        ap + am + 2.0 * std::real(config.amp_plus * std::conj(config.amp_minus)) * overlap;
    if (!(total > 0.0)) return 1.0;
    return std::min(1.0, bound / total);
}

PlaneField sample_plane(const OpticalConfig& config, double z, const UniformGrid& grid) {
    require_nonnegative_z(z);
    grid.validate();
    const double lost = power_outside_fraction(config, grid, z);
    if (lost > kTruncationTolerance) {
        std::ostringstream msg;
        msg << "grid [" << grid.x_min << ", " << grid.x_max() << "] m truncates the beam at z = "
            << z << " m: " << lost << " of the power lies outside (limit "
            << kTruncationTolerance << ")";
        throw NumericalDiagnostic(msg.str());
    }
    PlaneField field{z, grid, std::vector<cplx>(grid.n)};
    for (std::size_t i = 0; i < grid.n; ++i) field.values[i] = evaluate_field(config, grid.at(i), z);
    const double p = field.power();
    if (!(p > 0.0) || !std::isfinite(p)) {
        throw NumericalDiagnostic("sampled field has no finite positive power on the grid");
    }
    return field;
}

PlaneField propagate_spectral(const PlaneField& field, double dz, double wavenumber) {
    if (!(dz >= 0.0) || !std::isfinite(dz)) throw ConfigError("propagation step must be >= 0");
    if (!(wavenumber > 0.0)) throw ConfigError("wavenumber must be positive");
    field.grid.validate();
    if (field.values.size() != field.grid.n) throw ConfigError("field size does not match its grid");

    PlaneField out = field;
    out.z = field.z + dz;
    if (dz == 0.0) return out;

    fft_forward(out.values);
    const double alias = nyquist_band_fraction(out.values, field.grid.dx);
    if (alias > kAliasingTolerance) {
        std::ostringstream msg;
        msg << "spectral propagation from z = " << field.z << " m: " << alias
            << " of the spectrum lies near the Nyquist wavenumber (limit " << kAliasingTolerance
            << "); refine the grid";
        throw NumericalDiagnostic(msg.str());
    }
    const auto k = angular_frequencies(field.grid.n, field.grid.dx);
    const double rate = dz / (2.0 * wavenumber);
    for (std::size_t m = 0; m < k.size(); ++m) out.values[m] *= std::polar(1.0, -k[m] * k[m] * rate);
    fft_inverse(out.values);

    const double wrapped = edge_fraction(out.values, 0.05);
    if (wrapped > kAliasingTolerance && wrapped > 2.0 * edge_fraction(field.values, 0.05)) {
        std::ostringstream msg;
        msg << "spectral propagation to z = " << out.z << " m wraps around the periodic window ("
            << wrapped << " of the power in the outer 5%); widen the grid";
        throw NumericalDiagnostic(msg.str());
    }
    return out;
}

std::vector<double> energy_density(const PlaneField& field) {
    std::vector<double> u(field.values.size());
    std::transform(field.values.begin(), field.values.end(), u.begin(),
                   [](cplx v) { return std::norm(v); });
    return u;
}

PhaseProfile phase_profile(const PlaneField& field, double node_threshold) {
    const std::size_t n = field.values.size();
    PhaseProfile out{std::vector<double>(n, 0.0), std::vector<unsigned char>(n, 0)};
    double peak = 0.0;
    for (auto v : field.values) peak = std::max(peak, std::norm(v));
    const double floor = node_threshold * peak;

    bool have_previous = false;
    double previous = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx v = field.values[i];
        if (peak == 0.0 || std::norm(v) < floor || std::norm(v) == 0.0) {
            out.node[i] = 1;
            out.phase[i] = previous;
            continue;
        }
        const double raw = std::arg(v);
        previous = have_previous
                       ? previous + std::remainder(raw - previous, 2.0 * std::numbers::pi)
                       : raw;
        have_previous = true;
        out.phase[i] = previous;
    }
    return out;
}

}  // namespace weakpath
