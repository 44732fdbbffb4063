#pragma once

// Pipeline driver behind the `weakpath` command line tool. Each run_* call
// writes into its own output directory and finishes with a manifest.txt
// that lists every file it produced.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "weakpath/config.hpp"
#include "weakpath/reconstruct.hpp"

namespace weakpath {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Verbosity { quiet, normal, verbose };

struct GlobalOptions {
    std::string config = "paper-geometry";
    std::uint64_t seed = 0;
    std::filesystem::path out = "weakpath-out";
    unsigned threads = 1;
    Verbosity verbosity = Verbosity::normal;
    // Wall-clock stage timings in the manifest. Off by default because it
    // makes repeated runs differ byte-for-byte.
    bool timings = false;
};

struct SweepSpec {
    double z_first = 0.0;
    double z_last = 8.2;
    std::size_t count = 200;
};

// "Z0:Z1:N"
SweepSpec parse_sweep_spec(std::string_view text);

struct FieldOptions {
    std::optional<double> z;           // single plane (default: trace_z_max)
    std::optional<SweepSpec> sweep;    // (x, z) maps instead of one plane
    std::size_t map_stride = 16;       // x decimation for sweep maps
    bool with_field = false;           // also write the complex PlaneField
};

struct TraceOptions {
    std::vector<double> x0;            // explicit starts; empty -> slit seeds
    std::optional<std::size_t> per_slit;
    double z0 = 0.0;
    std::optional<double> z1;
    std::optional<std::size_t> steps;
    bool convergence = false;          // rerun at 2x steps, report endpoint deltas
};

struct MeasureOptions {
    std::optional<std::string> planes;
    std::optional<double> zeta;
    std::optional<double> phi0;
    std::optional<double> photons;
    bool noiseless = false;
    bool exact_momentum = false;       // oracle injection
};

struct ReconstructOptions {
    std::filesystem::path dataset;
    MaskPolicy policy = MaskPolicy::bridge;
    std::optional<std::size_t> per_slit;
    std::optional<std::size_t> steps;
};

struct RunResult {
    std::vector<std::string> files;    // relative to the output directory
    std::vector<std::string> warnings;
    std::size_t clamped_points = 0;
    std::optional<ComparisonReport> report;
};

// Each throws ConfigError for usage/config problems and NumericalDiagnostic
// when a numerical check fails.
RunResult run_field(const GlobalOptions& global, const FieldOptions& options);
RunResult run_trace(const GlobalOptions& global, const TraceOptions& options);
RunResult run_measure(const GlobalOptions& global, const MeasureOptions& options);
RunResult run_reconstruct(const GlobalOptions& global, const ReconstructOptions& options);
// field + trace + measure + reconstruct into subdirectories of `out`.
RunResult run_all(const GlobalOptions& global);

// Loads a dataset directory written by run_measure.
ImagingPlaneSet load_dataset(const std::filesystem::path& dir);

}  // namespace weakpath
