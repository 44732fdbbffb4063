#include "weakpath/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace weakpath {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per size and direction and kept for the life of
// the process.
struct PlanCache {
    std::mutex mutex;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans;

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard lock(mutex);
        auto key = std::make_pair(n, sign);
        if (auto it = plans.find(key); it != plans.end()) return it->second;
        auto* scratch = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), scratch, scratch, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        plans.emplace(key, plan);
        return plan;
    }
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

void execute(std::span<cplx> data, int sign) {
    if (data.empty()) return;
    fftw_plan plan = cache().get(data.size(), sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void fft_forward(std::span<cplx> data) { execute(data, FFTW_FORWARD); }

void fft_inverse(std::span<cplx> data) {
    execute(data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

std::vector<double> angular_frequencies(std::size_t n, double dx) {
    std::vector<double> k(n);
    const double base = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx);
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    for (std::size_t m = 0; m < n; ++m) {
        auto idx = static_cast<std::ptrdiff_t>(m);
        if (idx >= half && n > 1) idx -= static_cast<std::ptrdiff_t>(n);
        k[m] = base * static_cast<double>(idx);
    }
    return k;
}

double nyquist_band_fraction(std::span<const cplx> spectrum, double dx, double band) {
    const auto k = angular_frequencies(spectrum.size(), dx);
    const double cutoff = band * std::numbers::pi / dx;
    double total = 0.0;
    double outer = 0.0;
    for (std::size_t m = 0; m < spectrum.size(); ++m) {
        const double p = std::norm(spectrum[m]);
        total += p;
        if (std::abs(k[m]) >= cutoff) outer += p;
    }
    return total > 0.0 ? outer / total : 0.0;
}

}  // namespace weakpath
