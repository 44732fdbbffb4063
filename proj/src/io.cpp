#include "weakpath/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "weakpath/errors.hpp"

namespace weakpath {
namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void malformed(std::string_view source, std::size_t line, std::string_view why) {
    std::ostringstream msg;
    msg << source << ":" << line << ": " << why;
    throw ConfigError(msg.str());
}

const std::string& require(const KeyValues& kv, std::string_view key, std::string_view source) {
    const std::string* v = find_value(kv, key);
    if (!v) throw ConfigError(std::string(source) + ": missing key '" + std::string(key) + "'");
    return *v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    text = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size() ||
        !std::isfinite(v)) {
        throw ConfigError(std::string(what) + ": expected a finite number, got '" +
                          std::string(text) + "'");
    }
    return v;
}

std::size_t parse_size(std::string_view text, std::string_view what) {
    text = trim(text);
    std::size_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError(std::string(what) + ": expected a non-negative integer, got '" +
                          std::string(text) + "'");
    }
    return v;
}

std::string render_key_values(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

KeyValues parse_key_values(std::string_view text, std::string_view source) {
    KeyValues kv;
    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) malformed(source, i + 1, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) malformed(source, i + 1, "empty key");
        if (find_value(kv, key)) malformed(source, i + 1, "duplicate key '" + key + "'");
        kv.emplace_back(key, value);
    }
    return kv;
}

const std::string* find_value(const KeyValues& kv, std::string_view key) {
    for (const auto& [k, v] : kv) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string render_plane_field_csv(const PlaneField& field) {
    std::string out = "x_m,re,im\n";
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        out += format_double(field.grid.at(i)) + "," + format_double(field.values[i].real()) + "," +
               format_double(field.values[i].imag()) + "\n";
    }
    return out;
}

KeyValues plane_field_metadata(const PlaneField& field, const OpticalConfig& config) {
    return {{"z_m", format_double(field.z)},
            {"wavelength_m", format_double(config.wavelength)},
            {"slit_separation_m", format_double(config.slit_separation)},
            {"slit_waist_m", format_double(config.slit_waist)},
            {"grid_x_min_m", format_double(field.grid.x_min)},
            {"grid_dx_m", format_double(field.grid.dx)},
            {"grid_n", std::to_string(field.grid.n)}};
}

std::string render_trajectories_csv(std::span<const Trajectory> trajectories) {
    std::string out = "traj_id,z_m,x_m,weight\n";
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const std::string id = std::to_string(i);
        const std::string w = format_double(trajectories[i].weight);
        for (const auto& p : trajectories[i].points) {
            out += id + "," + format_double(p.z) + "," + format_double(p.x) + "," + w + "\n";
        }
    }
    return out;
}

std::vector<Trajectory> parse_trajectories_csv(std::string_view text, std::string_view source) {
    const auto lines = lines_of(text);
    if (lines.empty() || trim(lines[0]) != "traj_id,z_m,x_m,weight") {
        malformed(source, 1, "expected header 'traj_id,z_m,x_m,weight'");
    }
    std::vector<Trajectory> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto cols = split(lines[i], ',');
        if (cols.size() != 4) malformed(source, i + 1, "expected 4 columns");
        const std::size_t id = parse_size(cols[0], "traj_id");
        if (id > out.size()) malformed(source, i + 1, "trajectory ids must be contiguous");
        if (id == out.size()) out.emplace_back();
        Trajectory& t = out[id];
        t.weight = parse_double(cols[3], "weight");
        const TrajectoryPoint p{parse_double(cols[1], "z_m"), parse_double(cols[2], "x_m")};
        if (!t.points.empty() && !(p.z > t.points.back().z)) {
            malformed(source, i + 1, "z must increase along a trajectory");
        }
        t.points.push_back(p);
    }
    return out;
}

std::string render_record_csv(const WeakMeasurementRecord& record) {
    std::string out = "x_m,I_L,I_R,kx_extracted,valid,clamped\n";
    for (std::size_t i = 0; i < record.grid.n; ++i) {
        out += format_double(record.grid.at(i)) + "," + format_double(record.i_left[i]) + "," +
               format_double(record.i_right[i]) + "," + format_double(record.momentum.kx[i]) + "," +
               (record.momentum.valid[i] ? "1" : "0") + "," + (record.momentum.clamped[i] ? "1" : "0") +
               "\n";
    }
    return out;
}

KeyValues record_metadata(const WeakMeasurementRecord& record) {
    return {{"z_m", format_double(record.z)},
            {"zeta", format_double(record.params.coupling)},
            {"phi0", format_double(record.params.phase_offset)},
            {"photon_budget",
             record.photon_budget ? format_double(*record.photon_budget) : std::string("noiseless")},
            {"seed", std::to_string(record.seed)},
            {"stream", std::to_string(record.stream)},
            {"grid_x_min_m", format_double(record.grid.x_min)},
            {"grid_dx_m", format_double(record.grid.dx)},
            {"grid_n", std::to_string(record.grid.n)},
            {"valid_count", std::to_string(record.momentum.valid_count())},
            {"clamped_count", std::to_string(record.momentum.clamped_count())},
            {"max_abs_phase_rad", format_double(record.max_abs_phase)}};
}

WeakMeasurementRecord parse_record(std::string_view csv, const KeyValues& meta,
                                   std::string_view source) {
    WeakMeasurementRecord r;
    try {
        r.z = parse_double(require(meta, "z_m", source), "z_m");
        r.params.coupling = parse_double(require(meta, "zeta", source), "zeta");
        r.params.phase_offset = parse_double(require(meta, "phi0", source), "phi0");
        const std::string& budget = require(meta, "photon_budget", source);
        if (budget != "noiseless") r.photon_budget = parse_double(budget, "photon_budget");
        r.seed = parse_size(require(meta, "seed", source), "seed");
        r.stream = parse_size(require(meta, "stream", source), "stream");
        r.grid.x_min = parse_double(require(meta, "grid_x_min_m", source), "grid_x_min_m");
        r.grid.dx = parse_double(require(meta, "grid_dx_m", source), "grid_dx_m");
        r.grid.n = parse_size(require(meta, "grid_n", source), "grid_n");
        if (const auto* p = find_value(meta, "max_abs_phase_rad")) {
            r.max_abs_phase = parse_double(*p, "max_abs_phase_rad");
        }
        r.grid.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(source) + ": " + e.what());
    }

    const auto lines = lines_of(csv);
    if (lines.empty() || trim(lines[0]) != "x_m,I_L,I_R,kx_extracted,valid,clamped") {
        malformed(source, 1, "expected header 'x_m,I_L,I_R,kx_extracted,valid,clamped'");
    }
    r.momentum.all_masked = true;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto cols = split(lines[i], ',');
        if (cols.size() != 6) malformed(source, i + 1, "expected 6 columns");
        try {
            r.i_left.push_back(parse_double(cols[1], "I_L"));
            r.i_right.push_back(parse_double(cols[2], "I_R"));
            r.momentum.kx.push_back(parse_double(cols[3], "kx_extracted"));
            const bool valid = parse_size(cols[4], "valid") != 0;
            r.momentum.valid.push_back(valid ? 1 : 0);
            r.momentum.clamped.push_back(parse_size(cols[5], "clamped") != 0 ? 1 : 0);
            if (valid) r.momentum.all_masked = false;
        } catch (const ConfigError& e) {
            malformed(source, i + 1, e.what());
        }
    }
    if (r.i_left.size() != r.grid.n) {
        throw ConfigError(std::string(source) + ": row count " + std::to_string(r.i_left.size()) +
                          " does not match grid_n " + std::to_string(r.grid.n));
    }
    return r;
}

}  // namespace weakpath
