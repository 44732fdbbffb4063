#include "weakpath/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <set>

#include "weakpath/errors.hpp"
#include "weakpath/io.hpp"
#include "weakpath/reconstruct.hpp"

namespace weakpath {
namespace {

constexpr std::array kRequired = {
    "wavelength_m", "slit_separation_m", "slit_waist_m", "amp_plus_re",  "amp_plus_im",
    "amp_minus_re", "amp_minus_im",      "grid_n",       "grid_halfwidth_m",
};

constexpr std::array<std::pair<const char*, const char*>, 8> kOptional = {{
    {"planes", "41@2.75:8.2"},
    {"zeta", "0.1"},
    {"phi0", "0"},
    {"photon_budget", "noiseless"},
    {"trace_z_max_m", "8.2"},
    {"trace_steps", "2000"},
    {"seeds_per_slit", "20"},
    {"seed_spread_sigmas", "2"},
}};

// Kept in sync with configs/paper-geometry.cfg.
constexpr std::string_view kPaperGeometry = R"(# Canonical two-slit geometry (bundled).
# Measured layout: 41 imaging planes spanning 2.75 m to 8.2 m.
# Optical parameters, zeta and grid are illustrative choices.
wavelength_m      = 1e-6
slit_separation_m = 5e-4
slit_waist_m      = 1e-4
amp_plus_re       = 1
amp_plus_im       = 0
amp_minus_re      = 1
amp_minus_im      = 0
grid_n            = 8192
grid_halfwidth_m  = auto
planes            = 41@2.75:8.2
trace_z_max_m     = 8.2
zeta              = 0.05
phi0              = 0
photon_budget     = noiseless
trace_steps       = 2000
seeds_per_slit    = 20
seed_spread_sigmas = 2
)";

bool is_number(std::string_view s) {
    try {
        parse_double(s, "");
        return true;
    } catch (const ConfigError&) {
        return false;
    }
}

}  // namespace

std::vector<double> PlaneSpec::positions() const {
    return equally_spaced_planes(count, z_first, z_last);
}

PlaneSpec parse_plane_spec(std::string_view text) {
    const auto at = text.find('@');
    const auto colon = text.find(':', at == std::string_view::npos ? 0 : at);
    if (at == std::string_view::npos || colon == std::string_view::npos) {
        throw ConfigError("planes: expected 'N@Z0:Z1', got '" + std::string(text) + "'");
    }
    PlaneSpec p;
    p.count = parse_size(text.substr(0, at), "planes count");
    p.z_first = parse_double(text.substr(at + 1, colon - at - 1), "planes first z");
    p.z_last = parse_double(text.substr(colon + 1), "planes last z");
    if (p.count < 2) throw ConfigError("planes: need at least 2 planes");
    if (!(p.z_first >= 0.0) || !(p.z_last > p.z_first)) {
        throw ConfigError("planes: need 0 <= Z0 < Z1");
    }
    return p;
}

RunConfig parse_config(std::string_view text, std::string_view source) {
    const KeyValues kv = parse_key_values(text, source);
    const std::string src(source);

    std::set<std::string> known(kRequired.begin(), kRequired.end());
    for (const auto& [k, v] : kOptional) known.insert(k);
    for (const auto& [k, v] : kv) {
        if (!known.count(k)) throw ConfigError(src + ": unknown key '" + k + "'");
    }

    RunConfig c;
    for (const char* key : kRequired) {
        const std::string* v = find_value(kv, key);
        if (!v) throw ConfigError(src + ": missing key '" + std::string(key) + "'");
        c.entries[key] = *v;
    }
    for (const auto& [key, fallback] : kOptional) {
        const std::string* v = find_value(kv, key);
        c.entries[key] = v ? *v : fallback;
    }
    // Canonical numbers so that "5e-4" and "0.0005" hash alike.
    for (auto& [k, v] : c.entries) {
        if (is_number(v)) v = format_double(parse_double(v, k));
    }

    auto num = [&](const char* key) {
        try {
            return parse_double(c.entries.at(key), key);
        } catch (const ConfigError& e) {
            throw ConfigError(src + ": key '" + key + "': " + e.what());
        }
    };
    auto count = [&](const char* key) {
        try {
            return parse_size(c.entries.at(key), key);
        } catch (const ConfigError& e) {
            throw ConfigError(src + ": key '" + key + "': " + e.what());
        }
    };
    auto wrap = [&](const char* key, auto&& fn) {
        try {
            return fn();
        } catch (const ConfigError& e) {
            throw ConfigError(src + ": key '" + key + "': " + e.what());
        }
    };

    const double wavelength = num("wavelength_m");
    const double separation = num("slit_separation_m");
    const double waist = num("slit_waist_m");
    const cplx plus{num("amp_plus_re"), num("amp_plus_im")};
    const cplx minus{num("amp_minus_re"), num("amp_minus_im")};
    c.optics = wrap("wavelength_m", [&] {
        return OpticalConfig::make(wavelength, separation, waist, plus, minus);
    });

    c.grid.n = count("grid_n");
    if (c.grid.n < 2) throw ConfigError(src + ": key 'grid_n': need at least 2 points");
    const std::string& hw = c.entries.at("grid_halfwidth_m");
    c.grid.halfwidth = hw == "auto" ? 0.0 : num("grid_halfwidth_m");
    if (hw != "auto" && !(c.grid.halfwidth > 0.0)) {
        throw ConfigError(src + ": key 'grid_halfwidth_m': must be positive or 'auto'");
    }

    c.planes = wrap("planes", [&] { return parse_plane_spec(c.entries.at("planes")); });
    c.calcite.coupling = num("zeta");
    c.calcite.phase_offset = num("phi0");
    if (c.calcite.coupling == 0.0) throw ConfigError(src + ": key 'zeta': must be nonzero");
    const std::string& budget = c.entries.at("photon_budget");
    if (budget != "noiseless") {
        c.photon_budget = num("photon_budget");
        if (*c.photon_budget < 0.0) throw ConfigError(src + ": key 'photon_budget': must be >= 0");
    }
    c.trace_z_max = num("trace_z_max_m");
    if (!(c.trace_z_max > 0.0)) throw ConfigError(src + ": key 'trace_z_max_m': must be positive");
    c.trace_steps = count("trace_steps");
    if (c.trace_steps < 1) throw ConfigError(src + ": key 'trace_steps': must be >= 1");
    c.seeds_per_slit = count("seeds_per_slit");
    if (c.seeds_per_slit < 1) throw ConfigError(src + ": key 'seeds_per_slit': must be >= 1");
    c.seed_spread_sigmas = num("seed_spread_sigmas");
    if (!(c.seed_spread_sigmas >= 0.0)) {
        throw ConfigError(src + ": key 'seed_spread_sigmas': must be >= 0");
    }
    return c;
}

std::string RunConfig::canonical_text() const {
    std::string out;
    for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
    return out;
}

std::string RunConfig::hash() const { return sha256_hex(canonical_text()); }

double RunConfig::z_reach() const { return std::max(trace_z_max, planes.z_last); }

UniformGrid RunConfig::plane_grid() const { return resolve_grid(optics, grid, z_reach()); }

RunConfig load_config(const std::string& path_or_name) {
    if (path_or_name == "paper-geometry") return parse_config(kPaperGeometry, "paper-geometry");
    if (!std::filesystem::exists(path_or_name)) {
        throw ConfigError("config file not found: " + path_or_name);
    }
    return parse_config(read_text_file(path_or_name), path_or_name);
}

std::string_view paper_geometry_config_text() { return kPaperGeometry; }

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

}  // namespace weakpath
