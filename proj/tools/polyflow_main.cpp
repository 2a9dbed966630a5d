// polyflow command-line driver.
//
// Subcommands:
//   trace   integrate a piecewise field, write trace CSV + switches JSON
//   solve   construct a formal series solution, write it as JSON
//   asym    asymptotic cell-membership verdict near the equilibrium
//   yamabe  run the discrete curvature flow with edge flips
//   verify  run the randomized property suites
//
// Exit codes: 0 success, 1 configuration/precondition error, 2 chattering
// guard (trace), 3 undecided verdict (asym).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "polyflow/polyflow.hpp"

namespace {

namespace fs = std::filesystem;
using namespace polyflow;

struct CommonFlags {
    std::string config_path;
    std::optional<double> t_end, tol, capture;
    std::optional<int> order;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;

    void attach(CLI::App* app, bool config_required = true) {
        auto* c = app->add_option("--config", config_path, "run configuration JSON");
        if (config_required) c->required();
        app->add_option("--t-end", t_end, "integration end time");
        app->add_option("--order", order, "series truncation order");
        app->add_option("--tol", tol, "boundary/membership tolerance");
        app->add_option("--capture", capture, "equilibrium capture radius");
        app->add_option("--seed", seed, "random seed");
        app->add_option("--out", out_dir, "output directory");
    }

    RunConfig load() const {
        RunConfig cfg = RunConfig::load(config_path);
        if (t_end) cfg.t_end = *t_end;
        if (order) cfg.order = *order;
        if (tol) cfg.tol = *tol;
        if (capture) cfg.capture = *capture;
        if (seed) cfg.seed = *seed;
        if (out_dir) cfg.out_dir = *out_dir;
        cfg.validate();
        return cfg;
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

fs::path ensure_out_dir(const RunConfig& cfg) {
    const fs::path dir = cfg.out_dir ? fs::path(*cfg.out_dir) : fs::path("out");
    fs::create_directories(dir);
    return dir;
}

PiecewiseField load_field(const RunConfig& cfg) {
    if (!cfg.cover_path) throw ConfigError("config: missing \"cover\" path");
    if (!cfg.fields_path) throw ConfigError("config: missing \"fields\" path");
    return load_piecewise_field(*cfg.fields_path, load_cover(*cfg.cover_path));
}

TraceOptions trace_options(const RunConfig& cfg) {
    TraceOptions opt;
    opt.boundary_tol = cfg.tol;
    opt.capture_radius = cfg.capture;
    opt.switch_cap = cfg.switch_cap;
    return opt;
}

int cmd_trace(const CommonFlags& flags) {
    const RunConfig cfg = flags.load();
    const PiecewiseField field = load_field(cfg);
    if (!cfg.x0) throw ConfigError("config: missing \"x0\"");

    const auto consistency = validate_field_consistency(field, 50, cfg.seed);
    if (!consistency.passed)
        throw ConfigError("fields disagree on shared facets (max mismatch " +
                          fmt(consistency.max_mismatch) + ")");

    const fs::path dir = ensure_out_dir(cfg);
    try {
        const FlowTrace tr = trace_flow(field, *cfg.x0, cfg.t_end, trace_options(cfg));
        write_trace_csv(tr, dir / "trace.csv");
        write_switches_json(tr, dir / "switches.json");
        std::cout << "switches: " << tr.switches.size() << "\n";
        if (tr.captured) std::cout << "captured at t = " << fmt(tr.times.back()) << "\n";
        return 0;
    } catch (const ChatteringGuardError& e) {
        write_trace_csv(e.partial, dir / "trace.csv");
        write_switches_json(e.partial, dir / "switches.json");
        std::cout << "chattering guard: " << e.partial.switches.size()
                  << " switches exceed the cap; partial trace written\n";
        return 2;
    }
}

/// Field + spectrum + parameters from the config (cell defaults to 0).
FormalSolution solve_from_config(const RunConfig& cfg, const PiecewiseField& field) {
    if (!field.equilibrium_point || !field.equilibrium_spectrum)
        throw ConfigError("config: fields file declares no equilibrium");
    if (!cfg.c) throw ConfigError("config: missing parameter vector \"c\"");
    const PowerSeries centered = shift(field.fields[cfg.cell], *field.equilibrium_point);
    return construct_formal_solution(centered, *field.equilibrium_spectrum, *cfg.c, cfg.order);
}

int cmd_solve(const CommonFlags& flags) {
    const RunConfig cfg = flags.load();
    const PiecewiseField field = load_field(cfg);
    const FormalSolution sol = solve_from_config(cfg, field);
    const double residual = check_formal_residual(sol);

    const fs::path dir = ensure_out_dir(cfg);
    std::ofstream out(dir / "solution.json");
    out << formal_solution_to_json(sol, residual).dump(2) << "\n";

    std::cout << "residual: " << fmt(residual) << "\n";
    std::cout << "resonances: " << sol.resonance_log.size();
    for (const auto& [J, i] : sol.resonance_log) {
        std::cout << " (J=[";
        for (int k = 0; k < J.size(); ++k) std::cout << (k ? "," : "") << J[k];
        std::cout << "],i=" << i << ")";
    }
    std::cout << "\n";
    for (const auto& w : sol.warnings) std::cout << "warning: " << w << "\n";
    return 0;
}

int cmd_asym(const CommonFlags& flags) {
    const RunConfig cfg = flags.load();
    const PiecewiseField field = load_field(cfg);
    const FormalSolution sol = solve_from_config(cfg, field);
    const MembershipVerdict v = asymptotic_membership(field, sol, cfg.cell, cfg.tol);
    switch (v.kind) {
        case MembershipVerdict::Kind::EventuallyInside:
            std::cout << "EventuallyInside cell " << v.cell << "\n";
            return 0;
        case MembershipVerdict::Kind::EventuallyOutside:
            std::cout << "EventuallyOutside cell " << v.cell << " facet " << v.facet
                      << " dominant a=" << fmt(v.dominant.a) << " q=" << v.dominant.q
                      << " r=" << fmt(v.dominant.r) << "\n";
            return 0;
        case MembershipVerdict::Kind::Undecided:
            std::cout << "Undecided: " << v.reason << "\n";
            return 3;
    }
    return 1;
}

int cmd_yamabe(const CommonFlags& flags) {
    const RunConfig cfg = flags.load();
    if (!cfg.mesh_path) throw ConfigError("config: missing \"mesh\" path");
    const TriangulatedSurface mesh = load_mesh(*cfg.mesh_path);
    Vec u0(mesh.vertex_count(), 0.0);
    if (cfg.u0) u0 = *cfg.u0;
    if (static_cast<int>(u0.size()) != mesh.vertex_count())
        throw ConfigError("config: u0 size does not match the vertex count");

    const auto run = run_flow(ConformalState(mesh, u0), cfg.t_end, OdeOptions{});
    const fs::path dir = ensure_out_dir(cfg);
    write_yamabe_csv(run, dir / "yamabe.csv");
    std::cout << "flips: " << run.total_flips << ", final deviation: "
              << fmt(run.state.deviation()) << "\n";
    return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
    const auto results = verify::verify_suite(suite, seed);
    int failed = 0;
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.detail.empty()) std::cout << ": " << r.detail;
        std::cout << "\n";
        if (!r.passed) ++failed;
    }
    std::cout << results.size() - failed << "/" << results.size() << " properties passed\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"piecewise-analytic flows over polytope covers"};
    app.require_subcommand(1);

    CommonFlags trace_flags, solve_flags, asym_flags, yamabe_flags;
    auto* trace = app.add_subcommand("trace", "integrate a piecewise field with switch detection");
    trace_flags.attach(trace);
    auto* solve = app.add_subcommand("solve", "construct a formal series solution");
    solve_flags.attach(solve);
    auto* asym = app.add_subcommand("asym", "asymptotic cell-membership verdict");
    asym_flags.attach(asym);
    auto* yamabe = app.add_subcommand("yamabe", "run the discrete curvature flow");
    yamabe_flags.attach(yamabe);

    std::string suite = "all";
    std::uint64_t verify_seed = 0;
    auto* verify_cmd = app.add_subcommand("verify", "run randomized property suites");
    verify_cmd->add_option("suite,--suite", suite, "geometry|series|solver|tracer|yamabe|all");
    verify_cmd->add_option("--seed", verify_seed, "random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (trace->parsed()) return cmd_trace(trace_flags);
        if (solve->parsed()) return cmd_solve(solve_flags);
        if (asym->parsed()) return cmd_asym(asym_flags);
        if (yamabe->parsed()) return cmd_yamabe(yamabe_flags);
        if (verify_cmd->parsed()) return cmd_verify(suite, verify_seed);
    } catch (const polyflow::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
