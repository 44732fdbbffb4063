#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace weakpath {

using cplx = std::complex<double>;

// In-place forward DFT (no scaling).
void fft_forward(std::span<cplx> data);
// In-place inverse DFT, scaled by 1/n so that inverse(forward(x)) == x.
void fft_inverse(std::span<cplx> data);

// Angular wavenumbers k_m = 2*pi*m/(n*dx) in standard FFT order
// (0, 1, ..., n/2-1, -n/2, ..., -1); the Nyquist bin is negative.
std::vector<double> angular_frequencies(std::size_t n, double dx);

// Fraction of spectral power sitting at |k| >= band * k_nyquist.
double nyquist_band_fraction(std::span<const cplx> spectrum, double dx, double band = 0.9);

}  // namespace weakpath
