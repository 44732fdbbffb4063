#pragma once

// Flat key-value run configuration.
//
//   # comment
//   wavelength_m      = 1e-6
//   slit_separation_m = 500e-6
//   ...
//
// Required keys: wavelength_m, slit_separation_m, slit_waist_m, amp_plus_re,
// amp_plus_im, amp_minus_re, amp_minus_im, grid_n, grid_halfwidth_m ("auto"
// or a length). Optional keys with defaults: planes (41@2.75:8.2), zeta
// (0.1), phi0 (0), photon_budget (noiseless), trace_z_max_m (8.2),
// trace_steps (2000), seeds_per_slit (20), seed_spread_sigmas (2).

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weakpath/weakmeas.hpp"

namespace weakpath {

struct PlaneSpec {
    std::size_t count = 41;
    double z_first = 2.75;
    double z_last = 8.2;

    std::vector<double> positions() const;
};

// "N@Z0:Z1" -> N planes equally spaced on [Z0, Z1].
PlaneSpec parse_plane_spec(std::string_view text);

struct RunConfig {
    OpticalConfig optics;
    GridSpec grid;
    PlaneSpec planes;
    CalciteParams calcite;
    std::optional<double> photon_budget;
    double trace_z_max = 8.2;
    std::size_t trace_steps = 2000;
    std::size_t seeds_per_slit = 20;
    double seed_spread_sigmas = 2.0;

    // Effective key-values (defaults filled in), numbers in canonical form.
    std::map<std::string, std::string> entries;

    // SHA-256 over the sorted canonical entries; independent of the order
    // keys appear in the file.
    std::string hash() const;
    std::string canonical_text() const;

    // Grid shared by every plane of this run.
    UniformGrid plane_grid() const;
    double z_reach() const;  // furthest z the run touches
};

// Throws ConfigError naming the offending key.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");

// A path, or the name of a bundled config ("paper-geometry").
RunConfig load_config(const std::string& path_or_name);

std::string_view paper_geometry_config_text();

std::string sha256_hex(std::string_view data);

}  // namespace weakpath
