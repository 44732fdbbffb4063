// weakpath: simulate weak-measurement reconstruction of two-slit flow lines.
//
//   weakpath field       --z 8.2 | --sweep 0:8.2:200
//   weakpath trace       [--x0 a,b,...] [--steps N] [--convergence]
//   weakpath measure     [--planes 41@2.75:8.2] [--zeta Z] [--photons N | --noiseless]
//   weakpath reconstruct --dataset DIR [--policy bridge|strict]
//   weakpath all
//
// Global flags: --config PATH, --seed N, --out DIR, --threads N, --quiet, --verbose.
// Exit codes: 0 success, 2 usage/config error, 3 numerical diagnostic.

#include <iostream>

#include "CLI11.hpp"
#include "weakpath/errors.hpp"
#include "weakpath/harness.hpp"

namespace {

int run(int argc, char** argv) {
    using namespace weakpath;

    CLI::App app{"Weak-measurement reconstruction of two-slit energy flow lines"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    GlobalOptions global;
    std::string out = global.out.string();
    bool quiet = false;
    bool verbose = false;
    app.add_option("--config", global.config, "Config file, or 'paper-geometry'")
        ->capture_default_str();
    app.add_option("--seed", global.seed, "Master seed for shot noise")->capture_default_str();
    app.add_option("--out", out, "Output directory")->capture_default_str();
    app.add_option("--threads", global.threads, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--quiet", quiet, "Only report errors");
    app.add_flag("--verbose", verbose, "Extra progress output");
    app.add_flag("--timings", global.timings, "Record stage timings in the manifest");

    FieldOptions field;
    std::string sweep;
    auto* cmd_field = app.add_subcommand("field", "Energy density and phase of the field");
    cmd_field->add_option("--z", field.z, "Plane distance [m]");
    cmd_field->add_option("--sweep", sweep, "Z0:Z1:N map over N planes");
    cmd_field->add_option("--map-stride", field.map_stride, "x decimation for sweep maps")
        ->capture_default_str();
    cmd_field->add_flag("--with-field", field.with_field, "Also write the complex field");

    TraceOptions trace;
    std::size_t per_slit = 0;
    std::size_t trace_steps = 0;
    double trace_z1 = 0.0;
    auto* cmd_trace = app.add_subcommand("trace", "Exact flow-line bundle");
    cmd_trace->add_option("--x0", trace.x0, "Initial positions [m]")->delimiter(',');
    auto* opt_per_slit = cmd_trace->add_option("--per-slit", per_slit, "Seeds per slit");
    cmd_trace->add_option("--z0", trace.z0, "Start plane [m]")->capture_default_str();
    auto* opt_z1 = cmd_trace->add_option("--z1", trace_z1, "End plane [m]");
    auto* opt_steps = cmd_trace->add_option("--steps", trace_steps, "RK4 steps");
    cmd_trace->add_flag("--convergence", trace.convergence, "Rerun at 2x steps and report deltas");

    MeasureOptions measure;
    auto* cmd_measure = app.add_subcommand("measure", "Simulated weak-measurement dataset");
    cmd_measure->add_option("--planes", measure.planes, "N@Z0:Z1");
    cmd_measure->add_option("--zeta", measure.zeta, "Calcite coupling");
    cmd_measure->add_option("--phi0", measure.phi0, "Calcite phase offset [rad]");
    auto* opt_photons = cmd_measure->add_option("--photons", measure.photons, "Photons per plane");
    cmd_measure->add_flag("--noiseless", measure.noiseless, "Disable shot noise")->excludes(opt_photons);
    cmd_measure->add_flag("--exact-momentum", measure.exact_momentum,
                          "Replace extracted momenta with exact weak values");

    ReconstructOptions recon;
    std::string dataset;
    std::string policy = "bridge";
    std::size_t recon_per_slit = 0;
    std::size_t recon_steps = 0;
    auto* cmd_recon = app.add_subcommand("reconstruct", "Reconstruct flow lines from a dataset");
    cmd_recon->add_option("--dataset", dataset, "Dataset directory from 'measure'")->required();
    cmd_recon->add_option("--policy", policy, "Masked-gap policy")
        ->check(CLI::IsMember({"bridge", "strict"}))
        ->capture_default_str();
    auto* opt_recon_per_slit = cmd_recon->add_option("--per-slit", recon_per_slit, "Seeds per slit");
    auto* opt_recon_steps = cmd_recon->add_option("--steps", recon_steps, "RK4 steps for exact lines");

    auto* cmd_all = app.add_subcommand("all", "field + trace + measure + reconstruct");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    global.out = out;
    global.verbosity = quiet ? Verbosity::quiet : verbose ? Verbosity::verbose : Verbosity::normal;
    if (!sweep.empty()) field.sweep = parse_sweep_spec(sweep);
    if (*opt_per_slit) trace.per_slit = per_slit;
    if (*opt_z1) trace.z1 = trace_z1;
    if (*opt_steps) trace.steps = trace_steps;
    recon.dataset = dataset;
    recon.policy = policy == "strict" ? MaskPolicy::strict : MaskPolicy::bridge;
    if (*opt_recon_per_slit) recon.per_slit = recon_per_slit;
    if (*opt_recon_steps) recon.steps = recon_steps;

    RunResult result;
    if (*cmd_field) result = run_field(global, field);
    if (*cmd_trace) result = run_trace(global, trace);
    if (*cmd_measure) result = run_measure(global, measure);
    if (*cmd_recon) result = run_reconstruct(global, recon);
    if (*cmd_all) result = run_all(global);
    if (global.verbosity != Verbosity::quiet) {
        std::cerr << "[weakpath] wrote " << result.files.size() << " files + manifest.txt to "
                  << global.out.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const weakpath::ConfigError& e) {
        std::cerr << "weakpath: error: " << e.what() << "\n";
        return 2;
    } catch (const weakpath::NumericalDiagnostic& e) {
        std::cerr << "weakpath: numerical diagnostic: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "weakpath: failure: " << e.what() << "\n";
        return 3;
    }
}
