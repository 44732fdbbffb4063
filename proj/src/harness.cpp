#include "weakpath/harness.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>

#include "weakpath/errors.hpp"
#include "weakpath/io.hpp"
#include "weakpath/parallel.hpp"

namespace weakpath {
namespace {

constexpr const char* kLockName = ".weakpath.lock";
constexpr const char* kDatasetManifest = "dataset.txt";

void log(const GlobalOptions& g, Verbosity level, const std::string& msg) {
    if (static_cast<int>(g.verbosity) >= static_cast<int>(level)) {
        std::cerr << "[weakpath] " << msg << "\n";
    }
}

std::string indexed(std::string_view stem, std::size_t i, std::string_view suffix = "") {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03zu", i);
    return std::string(stem) + buf + std::string(suffix);
}

// Output directory owned by one process for the duration of a run. Files are
// recorded in write order and listed in manifest.txt on finish().
class OutputTree {
public:
    explicit OutputTree(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
        const auto lock = root_ / kLockName;
        fd_ = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0) {
            throw ConfigError("output directory " + root_.string() +
                              " is locked by another run (remove " + lock.string() +
                              " if no run is active)");
        }
    }
    OutputTree(const OutputTree&) = delete;
    OutputTree& operator=(const OutputTree&) = delete;
    ~OutputTree() { release(); }

    void write(const std::string& relative, std::string_view content) {
        write_text_file(root_ / relative, content);
        files_.push_back(relative);
    }

    void warn(const GlobalOptions& g, std::string msg) {
        log(g, Verbosity::normal, "warning: " + msg);
        warnings_.push_back(std::move(msg));
    }

    void time(std::string stage, double seconds) { timings_.emplace_back(std::move(stage), seconds); }

    RunResult finish(const GlobalOptions& g, KeyValues header) {
        header.emplace_back("output_dir", ".");
        header.emplace_back("file_count", std::to_string(files_.size()));
        for (std::size_t i = 0; i < files_.size(); ++i) header.emplace_back(indexed("file.", i), files_[i]);
        header.emplace_back("warning_count", std::to_string(warnings_.size()));
        for (std::size_t i = 0; i < warnings_.size(); ++i) {
            header.emplace_back(indexed("warning.", i), warnings_[i]);
        }
        if (g.timings) {
            for (const auto& [stage, s] : timings_) header.emplace_back("timing." + stage + "_s", format_double(s));
        }
        write_text_file(root_ / "manifest.txt", render_key_values(header));
        release();
        RunResult r;
        r.files = files_;
        r.warnings = warnings_;
        return r;
    }

    const std::filesystem::path& root() const { return root_; }

private:
    void release() {
        if (fd_ >= 0) {
            ::close(fd_);
            std::filesystem::remove(root_ / kLockName);
            fd_ = -1;
        }
    }

    std::filesystem::path root_;
    int fd_ = -1;
    std::vector<std::string> files_;
    std::vector<std::string> warnings_;
    std::vector<std::pair<std::string, double>> timings_;
};

class StageTimer {
public:
    StageTimer(OutputTree& tree, std::string stage) : tree_(tree), stage_(std::move(stage)) {}
    ~StageTimer() {
        const auto dt = std::chrono::steady_clock::now() - start_;
        tree_.time(stage_, std::chrono::duration<double>(dt).count());
    }

private:
    OutputTree& tree_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

KeyValues manifest_header(const GlobalOptions& g, const RunConfig& cfg, std::string_view experiment) {
    return {{"experiment", std::string(experiment)},
            {"tool_version", std::string(kToolVersion)},
            {"config", g.config},
            {"config_hash", cfg.hash()},
            {"seed", std::to_string(g.seed)},
            {"threads_requested", std::to_string(g.threads)}};
}

std::string join(const std::string& prefix, const std::string& name) {
    return prefix.empty() ? name : prefix + "/" + name;
}

// ---- field -----------------------------------------------------------------

void stage_field(const GlobalOptions& g, const RunConfig& cfg, const FieldOptions& opt,
                 OutputTree& tree, const std::string& prefix) {
    StageTimer timer(tree, (prefix.empty() ? std::string("field") : prefix) + (opt.sweep ? "_sweep" : ""));
    if (!opt.sweep) {
        const double z = opt.z.value_or(cfg.trace_z_max);
        const UniformGrid grid = resolve_grid(cfg.optics, cfg.grid, std::max(z, cfg.z_reach()));
        log(g, Verbosity::normal, "field: sampling z = " + format_double(z) + " m");
        const PlaneField field = sample_plane(cfg.optics, z, grid);
        const auto u = energy_density(field);
        const auto phase = phase_profile(field);
        std::string dens = "x_m,u\n";
        std::string ph = "x_m,phase_rad,node\n";
        for (std::size_t i = 0; i < grid.n; ++i) {
            const std::string x = format_double(grid.at(i));
            dens += x + "," + format_double(u[i]) + "\n";
            ph += x + "," + format_double(phase.phase[i]) + "," + (phase.node[i] ? "1" : "0") + "\n";
        }
        tree.write(join(prefix, "energy_density.csv"), dens);
        tree.write(join(prefix, "phase.csv"), ph);
        if (opt.with_field) {
            tree.write(join(prefix, "plane_field.csv"), render_plane_field_csv(field));
            tree.write(join(prefix, "plane_field.meta"),
                       render_key_values(plane_field_metadata(field, cfg.optics)));
        }
        return;
    }

    const SweepSpec& s = *opt.sweep;
    const auto zs = equally_spaced_planes(s.count, s.z_first, s.z_last);
    const UniformGrid grid = resolve_grid(cfg.optics, cfg.grid, std::max(s.z_last, cfg.z_reach()));
    const std::size_t stride = std::max<std::size_t>(1, opt.map_stride);
    log(g, Verbosity::normal,
        "field: sweeping " + std::to_string(zs.size()) + " planes over [" + format_double(s.z_first) +
            ", " + format_double(s.z_last) + "] m");
    std::vector<std::string> dens(zs.size());
    std::vector<std::string> ph(zs.size());
    parallel_for(zs.size(), g.threads, [&](std::size_t j) {
        const PlaneField field = sample_plane(cfg.optics, zs[j], grid);
        const auto u = energy_density(field);
        const auto phase = phase_profile(field);
        const std::string z = format_double(zs[j]);
        for (std::size_t i = stride / 2; i < grid.n; i += stride) {
            const std::string x = format_double(grid.at(i));
            dens[j] += z + "," + x + "," + format_double(u[i]) + "\n";
            ph[j] += z + "," + x + "," + format_double(phase.phase[i]) + "," +
                     (phase.node[i] ? "1" : "0") + "\n";
        }
    });
    std::string d = "z_m,x_m,u\n";
    std::string p = "z_m,x_m,phase_rad,node\n";
    for (std::size_t j = 0; j < zs.size(); ++j) {
        d += dens[j];
        p += ph[j];
    }
    tree.write(join(prefix, "energy_density_map.csv"), d);
    tree.write(join(prefix, "phase_map.csv"), p);
}

// ---- trace -----------------------------------------------------------------

KeyValues bundle_metadata(const RunConfig& cfg, std::span<const Trajectory> bundle,
                          TrajectoryKind kind) {
    KeyValues kv{{"kind", std::string(to_string(kind))},
                 {"config_hash", cfg.hash()},
                 {"trajectory_count", std::to_string(bundle.size())}};
    for (std::size_t i = 0; i < bundle.size(); ++i) {
        kv.emplace_back(indexed("traj.", i, ".status"), std::string(to_string(bundle[i].status)));
    }
    return kv;
}

void stage_trace(const GlobalOptions& g, const RunConfig& cfg, const TraceOptions& opt,
                 OutputTree& tree, const std::string& prefix) {
    StageTimer timer(tree, prefix.empty() ? "trace" : prefix);
    std::vector<double> starts = opt.x0;
    if (starts.empty()) {
        starts = slit_seed_positions(cfg.optics, opt.per_slit.value_or(cfg.seeds_per_slit),
                                     cfg.seed_spread_sigmas);
    } else {
        std::sort(starts.begin(), starts.end());
        if (auto dup = std::adjacent_find(starts.begin(), starts.end()); dup != starts.end()) {
            throw ConfigError("trace: duplicate initial position x0 = " + format_double(*dup) + " m");
        }
    }
    const double z1 = opt.z1.value_or(cfg.trace_z_max);
    const std::size_t steps = opt.steps.value_or(cfg.trace_steps);
    if (!(z1 > opt.z0)) throw ConfigError("trace: need z1 > z0");
    if (steps < 1) throw ConfigError("trace: need at least one step");
    log(g, Verbosity::normal,
        "trace: " + std::to_string(starts.size()) + " trajectories, " + std::to_string(steps) +
            " RK4 steps over [" + format_double(opt.z0) + ", " + format_double(z1) + "] m");

    const auto bundle = trace_bundle(cfg.optics, starts, opt.z0, z1, steps, g.threads);
    for (std::size_t i = 0; i < bundle.size(); ++i) {
        if (!bundle[i].complete()) {
            tree.warn(g, "trajectory " + std::to_string(i) + " stopped early: " +
                             std::string(to_string(bundle[i].status)));
        }
    }
    tree.write(join(prefix, "trajectories.csv"), render_trajectories_csv(bundle));
    KeyValues meta = bundle_metadata(cfg, bundle, TrajectoryKind::exact);
    meta.insert(meta.begin() + 2, {{"steps", std::to_string(steps)},
                                   {"z0_m", format_double(opt.z0)},
                                   {"z1_m", format_double(z1)}});
    tree.write(join(prefix, "trajectories.meta"), render_key_values(meta));

    if (opt.convergence) {
        const auto fine = trace_bundle(cfg.optics, starts, opt.z0, z1, 2 * steps, g.threads);
        KeyValues conv{{"steps_coarse", std::to_string(steps)}, {"steps_fine", std::to_string(2 * steps)}};
        double worst = 0.0;
        for (std::size_t i = 0; i < bundle.size(); ++i) {
            if (!bundle[i].complete() || !fine[i].complete()) {
                conv.emplace_back(indexed("traj.", i, ".endpoint_delta_m"), "incomplete");
                continue;
            }
            const double delta = std::abs(fine[i].back().x - bundle[i].back().x);
            worst = std::max(worst, delta);
            conv.emplace_back(indexed("traj.", i, ".endpoint_delta_m"), format_double(delta));
        }
        conv.emplace_back("max_endpoint_delta_m", format_double(worst));
        tree.write(join(prefix, "convergence.txt"), render_key_values(conv));
    }
}

// ---- measure ---------------------------------------------------------------

std::size_t stage_measure(const GlobalOptions& g, const RunConfig& cfg, const MeasureOptions& opt,
                          OutputTree& tree, const std::string& prefix) {
    StageTimer timer(tree, prefix.empty() ? "measure" : prefix);
    const PlaneSpec planes = opt.planes ? parse_plane_spec(*opt.planes) : cfg.planes;
    CalciteParams params = cfg.calcite;
    if (opt.zeta) params.coupling = *opt.zeta;
    if (opt.phi0) params.phase_offset = *opt.phi0;
    if (params.coupling == 0.0) throw ConfigError("measure: zeta must be nonzero");
    std::optional<double> budget = cfg.photon_budget;
    if (opt.photons) budget = *opt.photons;
    if (opt.noiseless) budget.reset();
    const MomentumSource source = opt.exact_momentum ? MomentumSource::exact : MomentumSource::extracted;

    const auto zs = planes.positions();
    const UniformGrid grid =
        resolve_grid(cfg.optics, cfg.grid, std::max(planes.z_last, cfg.z_reach()));
    log(g, Verbosity::normal,
        "measure: " + std::to_string(zs.size()) + " planes over [" + format_double(planes.z_first) +
            ", " + format_double(planes.z_last) + "] m, zeta = " + format_double(params.coupling) +
            (budget ? ", photons = " + format_double(*budget) : std::string(", noiseless")));
    const ImagingPlaneSet set =
        build_dataset(cfg.optics, zs, params, grid, budget, g.seed, source, g.threads);

    KeyValues manifest{{"format", "weakpath-dataset-1"},
                       {"seed", std::to_string(g.seed)},
                       {"momentum_source", source == MomentumSource::exact ? "exact" : "extracted"},
                       {"zeta", format_double(params.coupling)},
                       {"phi0", format_double(params.phase_offset)},
                       {"photon_budget", budget ? format_double(*budget) : std::string("noiseless")}};
    for (const auto& [k, v] : cfg.entries) manifest.emplace_back("config." + k, v);
    manifest.emplace_back("plane_count", std::to_string(set.planes.size()));

    std::size_t clamped = 0;
    for (std::size_t i = 0; i < set.planes.size(); ++i) {
        const auto& rec = set.planes[i];
        const std::string stem = indexed("plane_", i);
        tree.write(join(prefix, stem + ".csv"), render_record_csv(rec));
        tree.write(join(prefix, stem + ".meta"), render_key_values(record_metadata(rec)));
        manifest.emplace_back(indexed("plane.", i), stem);
        clamped += rec.momentum.clamped_count();
        if (rec.momentum.all_masked) {
            tree.warn(g, "plane " + std::to_string(i) + " is fully masked (no usable intensity)");
        }
        if (rec.max_abs_phase >= 0.5 * std::numbers::pi) {
            tree.warn(g, "plane " + std::to_string(i) + ": |phi| reaches " +
                             format_double(rec.max_abs_phase) +
                             " rad over the occupied spectrum; arcsin readout is ambiguous");
        }
    }
    manifest.emplace_back("clamped_points", std::to_string(clamped));
    tree.write(join(prefix, kDatasetManifest), render_key_values(manifest));
    return clamped;
}

// ---- reconstruct -----------------------------------------------------------

struct LoadedDataset {
    RunConfig config;
    ImagingPlaneSet set;
};

LoadedDataset load_dataset_with_config(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("dataset directory not found: " + dir.string());
    }
    const auto manifest_path = dir / kDatasetManifest;
    if (!std::filesystem::exists(manifest_path)) {
        throw ConfigError("dataset manifest missing: " + manifest_path.string());
    }
    const std::string source = manifest_path.string();
    const KeyValues kv = parse_key_values(read_text_file(manifest_path), source);
    auto need = [&](const std::string& key) -> const std::string& {
        const std::string* v = find_value(kv, key);
        if (!v) throw ConfigError(source + ": missing key '" + key + "'");
        return *v;
    };
    if (need("format") != "weakpath-dataset-1") throw ConfigError(source + ": unsupported format");

    std::string config_text;
    for (const auto& [k, v] : kv) {
        if (k.rfind("config.", 0) == 0) config_text += k.substr(7) + " = " + v + "\n";
    }
    LoadedDataset out{parse_config(config_text, source), {}};
    ImagingPlaneSet& set = out.set;
    set.config = out.config.optics;
    set.seed = parse_size(need("seed"), "seed");
    set.source = need("momentum_source") == "exact" ? MomentumSource::exact : MomentumSource::extracted;
    set.params.coupling = parse_double(need("zeta"), "zeta");
    set.params.phase_offset = parse_double(need("phi0"), "phi0");
    if (need("photon_budget") != "noiseless") {
        set.photon_budget = parse_double(need("photon_budget"), "photon_budget");
    }
    const std::size_t count = parse_size(need("plane_count"), "plane_count");
    for (std::size_t i = 0; i < count; ++i) {
        const std::string stem = need(indexed("plane.", i));
        const auto csv = dir / (stem + ".csv");
        const auto meta = dir / (stem + ".meta");
        for (const auto& p : {csv, meta}) {
            if (!std::filesystem::exists(p)) throw ConfigError("dataset file missing: " + p.string());
        }
        set.planes.push_back(parse_record(read_text_file(csv),
                                          parse_key_values(read_text_file(meta), meta.string()),
                                          csv.string()));
    }
    try {
        set.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return out;
}

ComparisonReport stage_reconstruct(const GlobalOptions& g, const LoadedDataset& data,
                                   const ReconstructOptions& opt, OutputTree& tree,
                                   const std::string& prefix) {
    StageTimer timer(tree, prefix.empty() ? "reconstruct" : prefix);
    const RunConfig& cfg = data.config;
    const ImagingPlaneSet& set = data.set;
    const auto planes = set.z_values();

    const auto seeds = slit_seed_positions(cfg.optics, opt.per_slit.value_or(cfg.seeds_per_slit),
                                           cfg.seed_spread_sigmas);
    std::vector<double> knots;
    if (planes.front() > 0.0) knots.push_back(0.0);
    knots.insert(knots.end(), planes.begin(), planes.end());
    const std::size_t steps = opt.steps.value_or(cfg.trace_steps);
    const double max_step = planes.back() / static_cast<double>(std::max<std::size_t>(steps, 1));
    log(g, Verbosity::normal,
        "reconstruct: " + std::to_string(seeds.size()) + " flow lines through " +
            std::to_string(planes.size()) + " planes");

    const auto traced = trace_bundle_through(cfg.optics, seeds, knots, max_step, g.threads);
    std::vector<Trajectory> exact;
    std::vector<double> starts;
    const std::vector<unsigned char> all_valid(set.planes.front().grid.n, 1);
    for (std::size_t i = 0; i < traced.size(); ++i) {
        const auto x = position_at(traced[i], planes.front());
        if (!x) {
            tree.warn(g, "seed " + std::to_string(i) + " never reached the first plane; skipped");
            continue;
        }
        exact.push_back(traced[i]);
        starts.push_back(*x);
    }
    for (std::size_t i = 1; i < starts.size(); ++i) {
        if (!(starts[i] > starts[i - 1])) {
            throw NumericalDiagnostic("exact flow lines cross before the first imaging plane");
        }
    }
    const auto recon =
        reconstruct_trajectories(set, starts, cfg.optics.wavenumber, opt.policy, g.threads);
    for (std::size_t i = 0; i < recon.size(); ++i) {
        if (!recon[i].complete()) {
            tree.warn(g, "reconstructed trajectory " + std::to_string(i) + " truncated: " +
                             std::string(to_string(recon[i].status)));
        }
    }
    const double fringe = far_field_fringe_spacing(cfg.optics, planes.back());
    const ComparisonReport report = compare_trajectories(recon, exact, fringe);

    tree.write(join(prefix, "reconstructed.csv"), render_trajectories_csv(recon));
    KeyValues rmeta = bundle_metadata(cfg, recon, TrajectoryKind::reconstructed);
    rmeta.emplace_back("mask_policy", opt.policy == MaskPolicy::bridge ? "bridge" : "strict");
    tree.write(join(prefix, "reconstructed.meta"), render_key_values(rmeta));
    tree.write(join(prefix, "exact.csv"), render_trajectories_csv(exact));
    KeyValues emeta = bundle_metadata(cfg, exact, TrajectoryKind::exact);
    emeta.emplace_back("max_step_m", format_double(max_step));
    tree.write(join(prefix, "exact.meta"), render_key_values(emeta));

    KeyValues rep{{"fringe_spacing_ref_m", format_double(report.fringe_spacing_ref)},
                  {"crossing_count", std::to_string(report.crossing_count)},
                  {"coverage", format_double(report.coverage)},
                  {"rms_final_m", format_double(report.rms_final)},
                  {"rms_final_fringes", format_double(report.rms_final / fringe)},
                  {"rms_overall_m", format_double(report.rms_overall)},
                  {"rms_overall_fringes", format_double(report.rms_overall / fringe)},
                  {"max_deviation_m", format_double(report.max_deviation)},
                  {"trajectory_count", std::to_string(report.per_trajectory.size())}};
    for (std::size_t i = 0; i < report.per_trajectory.size(); ++i) {
        rep.emplace_back(indexed("traj.", i, ".rms_m"), format_double(report.per_trajectory[i].rms));
        rep.emplace_back(indexed("traj.", i, ".max_m"), format_double(report.per_trajectory[i].max_abs));
    }
    tree.write(join(prefix, "report.txt"), render_key_values(rep));
    log(g, Verbosity::normal,
        "reconstruct: rms at final plane = " + format_double(report.rms_final / fringe) +
            " fringe spacings, crossings = " + std::to_string(report.crossing_count));
    return report;
}

}  // namespace

SweepSpec parse_sweep_spec(std::string_view text) {
    const auto a = text.find(':');
    const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
    if (b == std::string_view::npos) {
        throw ConfigError("sweep: expected 'Z0:Z1:N', got '" + std::string(text) + "'");
    }
    SweepSpec s;
    s.z_first = parse_double(text.substr(0, a), "sweep first z");
    s.z_last = parse_double(text.substr(a + 1, b - a - 1), "sweep last z");
    s.count = parse_size(text.substr(b + 1), "sweep count");
    if (s.count < 2 || !(s.z_first >= 0.0) || !(s.z_last > s.z_first)) {
        throw ConfigError("sweep: need N >= 2 and 0 <= Z0 < Z1");
    }
    return s;
}

RunResult run_field(const GlobalOptions& global, const FieldOptions& options) {
    const RunConfig cfg = load_config(global.config);
    OutputTree tree(global.out);
    stage_field(global, cfg, options, tree, "");
    return tree.finish(global, manifest_header(global, cfg, "field"));
}

RunResult run_trace(const GlobalOptions& global, const TraceOptions& options) {
    const RunConfig cfg = load_config(global.config);
    OutputTree tree(global.out);
    stage_trace(global, cfg, options, tree, "");
    return tree.finish(global, manifest_header(global, cfg, "trace"));
}

RunResult run_measure(const GlobalOptions& global, const MeasureOptions& options) {
    const RunConfig cfg = load_config(global.config);
    OutputTree tree(global.out);
    const std::size_t clamped = stage_measure(global, cfg, options, tree, "");
    KeyValues header = manifest_header(global, cfg, "measure");
    header.emplace_back("clamped_points", std::to_string(clamped));
    RunResult r = tree.finish(global, std::move(header));
    r.clamped_points = clamped;
    return r;
}

RunResult run_reconstruct(const GlobalOptions& global, const ReconstructOptions& options) {
    const LoadedDataset data = load_dataset_with_config(options.dataset);
    OutputTree tree(global.out);
    const ComparisonReport report = stage_reconstruct(global, data, options, tree, "");
    KeyValues header = manifest_header(global, data.config, "reconstruct");
    header.emplace_back("dataset_seed", std::to_string(data.set.seed));
    RunResult r = tree.finish(global, std::move(header));
    r.report = report;
    return r;
}

RunResult run_all(const GlobalOptions& global) {
    const RunConfig cfg = load_config(global.config);
    OutputTree tree(global.out);

    FieldOptions single;
    stage_field(global, cfg, single, tree, "field");
    FieldOptions sweep;
    sweep.sweep = SweepSpec{0.0, cfg.trace_z_max, 200};
    stage_field(global, cfg, sweep, tree, "field");

    stage_trace(global, cfg, TraceOptions{}, tree, "trace");
    const std::size_t clamped = stage_measure(global, cfg, MeasureOptions{}, tree, "dataset");

    const LoadedDataset data = load_dataset_with_config(tree.root() / "dataset");
    ReconstructOptions ropt;
    ropt.dataset = tree.root() / "dataset";
    const ComparisonReport report = stage_reconstruct(global, data, ropt, tree, "reconstruct");

    KeyValues header = manifest_header(global, cfg, "all");
    header.emplace_back("clamped_points", std::to_string(clamped));
    RunResult r = tree.finish(global, std::move(header));
    r.clamped_points = clamped;
    r.report = report;
    return r;
}

ImagingPlaneSet load_dataset(const std::filesystem::path& dir) {
    return load_dataset_with_config(dir).set;
}

}  // namespace weakpath
