#include "gplab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gplab/config.hpp"
#include "gplab/error.hpp"
#include "gplab/experiments.hpp"
#include "gplab/fock_checks.hpp"
#include "gplab/gp.hpp"
#include "gplab/report_io.hpp"
#include "gplab/scattering.hpp"

namespace gplab::cli {

namespace {

using io::Json;
using config::Config;
using config::Purpose;

/// Validation failure carrying every message.
struct ConfigErrors {
    std::vector<std::string> errors;
};

struct Context {
    RunConfig run;
    Config cfg;
    std::ostream& out;
    std::ostream& err;

    void log(const std::string& msg) const {
        if (run.verbosity > 0) err << "[gplab] " << msg << "\n";
    }
    std::filesystem::path path(const std::string& name) const { return run.out_dir / name; }
};

struct Overrides {
    std::optional<std::string> potential;
    std::optional<int> modes;
    std::optional<int> n_max;
};

Purpose purpose_of(const std::string& sub) {
    if (sub == "scattering") return Purpose::scattering;
    if (sub == "gp") return Purpose::gp;
    if (sub == "ground-state") return Purpose::ground_state;
    if (sub == "modgp-compare") return Purpose::modgp_compare;
    if (sub == "fock-check") return Purpose::fock_check;
    return Purpose::sweep;
}

Config load(const RunConfig& rc, const Overrides& ov) {
    config::Validated v;
    if (!rc.config_path.empty()) v = config::validate_config(rc.config_path, Purpose::any);
    Config cfg = v.config;
    if (ov.potential) cfg.potential.spec = *ov.potential;
    if (ov.modes) cfg.fock.modes = *ov.modes;
    if (ov.n_max) cfg.fock.n_max = *ov.n_max;
    // The identity suite needs some potential for the sector check.
    if (rc.subcommand == "fock-check" && cfg.potential.spec.empty()) cfg.potential.spec = "soft_ball:2,1";
    std::vector<std::string> errs = v.errors;
    for (auto& e : config::check(cfg, purpose_of(rc.subcommand)))
        if (std::find(errs.begin(), errs.end(), e) == errs.end()) errs.push_back(std::move(e));
    if (rc.subcommand == "gp" && cfg.gp.trap != "none")
        errs.push_back("gp.trap is only used by ground-state; real-time evolution runs without a trap");
    for (const auto& [name, value] : rc.tolerances) {
        static const std::vector<std::string> known{"ccr", "weyl_shift", "bogoliubov_action", "symplectic",
                                                    "sector_restriction"};
        if (std::find(known.begin(), known.end(), name) == known.end())
            errs.push_back("unknown tolerance override '" + name + "'");
        else if (!(value > 0.0) || !std::isfinite(value))
            errs.push_back("tolerance override '" + name + "' must be > 0");
        else if (rc.subcommand != "fock-check")
            errs.push_back("tolerance overrides apply to fock-check only");
    }
    if (!errs.empty()) throw ConfigErrors{errs};
    return cfg;
}

void prepare_output(const Context& ctx) {
    std::error_code ec;
    std::filesystem::create_directories(ctx.run.out_dir, ec);
    if (ec || !std::filesystem::is_directory(ctx.run.out_dir))
        throw ValidationError("output directory " + ctx.run.out_dir.string() + " is not writable");
    io::write_text(ctx.path("config.normalized.toml"), config::normalized_toml(ctx.cfg));
}

scattering::ScatteringSolution solve(const Context& ctx, const scattering::RadialPotential& pot) {
    ctx.log("solving the zero-energy scattering equation for " + ctx.cfg.potential.spec);
    return scattering::solve_zero_energy(pot, ctx.cfg.solve_options());
}

Json scattering_json(const Context& ctx, const scattering::ScatteringSolution& sol) {
    Json j;
    j["potential"] = ctx.cfg.potential.spec;
    j["a0"] = sol.a0;
    j["a0_integral"] = sol.a0_integral;
    j["tail_fit_residual"] = sol.tail_fit_residual;
    j["r_max"] = sol.r_max;
    j["steps"] = sol.steps;
    return j;
}

/// a0 from the config or from the scattering solution.
std::pair<double, std::string> resolve_a0(const Context& ctx) {
    if (ctx.cfg.gp.a0) return {*ctx.cfg.gp.a0, "gp.a0"};
    auto pot = scattering::RadialPotential::from_spec(ctx.cfg.potential.spec);
    return {solve(ctx, pot).a0, "potential.spec"};
}

WaveField initial_field(const Config& cfg) {
    const PeriodicGrid grid = cfg.periodic_grid();
    if (cfg.gp.initial == "constant") return gp::constant_field(grid);
    if (cfg.gp.initial == "plane") return gp::plane_wave(grid, cfg.gp.plane_mode);
    return gp::gaussian_packet(grid, cfg.gp.width, cfg.gp.momentum);
}

void write_series(const std::filesystem::path& path, const std::vector<gp::Sample>& series) {
    io::CsvWriter csv({"t", "norm", "energy", "distance"});
    for (const auto& s : series) csv.row({s.t, s.norm, s.energy, s.distance});
    csv.save(path);
}

int cmd_scattering(Context& ctx) {
    auto pot = scattering::RadialPotential::from_spec(ctx.cfg.potential.spec);
    auto sol = solve(ctx, pot);
    Json j = scattering_json(ctx, sol);
    io::write_json(ctx.path("report.json"), j);
    ctx.out << io::dump_json(j);
    return ok;
}

int cmd_gp(Context& ctx) {
    auto [a0, source] = resolve_a0(ctx);
    const auto& g = ctx.cfg.gp;
    WaveField phi0 = initial_field(ctx.cfg);
    gp::GPParams params(a0);
    gp::EvolveOptions opts;
    opts.record_every = g.record_every;
    opts.norm_gate = g.norm_gate;
    ctx.log("evolving GP to t = " + io::format_double(g.t));
    auto res = gp::evolve_gp(phi0, params, g.t, g.dt, opts);
    write_series(ctx.path("series.csv"), res.series);
    Json j;
    j["a0"] = a0;
    j["a0_source"] = source;
    j["t"] = g.t;
    j["dt"] = g.dt;
    j["steps"] = res.steps;
    j["initial_energy"] = res.series.front().energy;
    j["final_energy"] = res.series.back().energy;
    j["final_norm"] = res.series.back().norm;
    j["max_norm_drift"] = res.max_norm_drift;
    j["max_energy_drift"] = res.max_energy_drift;
    j["h1_norm_initial"] = gp::sobolev_norm(phi0, 1);
    j["h1_norm_final"] = gp::sobolev_norm(res.field, 1);
    if (g.dump) {
        io::dump_field(ctx.path("final_field.c64"), res.field);
        j["field_dump"] = "final_field.c64";
    }
    io::write_json(ctx.path("report.json"), j);
    ctx.out << "gp: " << res.steps << " steps, energy drift " << io::format_double(res.max_energy_drift) << "\n";
    return ok;
}

int cmd_ground_state(Context& ctx) {
    auto [a0, source] = resolve_a0(ctx);
    const auto& g = ctx.cfg.gp;
    const PeriodicGrid grid = ctx.cfg.periodic_grid();
    std::optional<std::vector<double>> trap;
    if (g.trap != "none") trap = gp::harmonic_trap(grid, std::stod(g.trap.substr(9)));
    gp::GPParams params(a0, trap);
    gp::GroundStateOptions opts;
    opts.tol = g.tol;
    opts.dtau = g.dtau;
    opts.max_iterations = g.max_iterations;
    opts.record_every = std::max(g.record_every, 1);
    ctx.log("imaginary-time flow with dtau = " + io::format_double(g.dtau));
    auto res = gp::gp_ground_state(params, grid, opts);
    io::CsvWriter csv({"tau", "energy"});
    for (std::size_t i = 0; i < res.energy_history.size(); ++i)
        csv.row({res.history_iterations[i] * g.dtau, res.energy_history[i]});
    csv.save(ctx.path("ground_state.csv"));
    const double constant_energy = gp::gp_energy(gp::constant_field(grid), params);
    Json j;
    j["a0"] = a0;
    j["a0_source"] = source;
    j["trap"] = g.trap;
    j["energy"] = res.energy;
    j["constant_field_energy"] = constant_energy;
    j["iterations"] = res.iterations;
    j["monotone"] = res.monotone;
    j["norm"] = res.field.norm();
    if (g.dump) {
        io::dump_field(ctx.path("ground_state.c64"), res.field);
        j["field_dump"] = "ground_state.c64";
    }
    io::write_json(ctx.path("report.json"), j);
    ctx.out << "ground-state: energy " << io::format_double(res.energy) << " after " << res.iterations
            << " iterations\n";
    return ok;
}

int cmd_modgp_compare(Context& ctx) {
    const auto& g = ctx.cfg.gp;
    auto pot = scattering::RadialPotential::from_spec(ctx.cfg.potential.spec);
    auto sol = solve(ctx, pot);
    const double a0 = g.a0.value_or(sol.a0);
    const PeriodicGrid grid = ctx.cfg.periodic_grid();
    WaveField phi0 = initial_field(ctx.cfg);

    std::vector<WaveField> reference;
    gp::EvolveOptions opts;
    opts.record_every = g.record_every;
    opts.norm_gate = g.norm_gate;
    opts.observer = [&reference](const gp::Sample&, const WaveField& f) { reference.push_back(f); };
    ctx.log("evolving GP reference");
    auto ref = gp::evolve_gp(phi0, gp::GPParams(a0), g.t, g.dt, opts);
    write_series(ctx.path("gp_series.csv"), ref.series);

    Json runs = Json::array();
    std::vector<double> distances;
    for (double n : g.n_list) {
        ctx.log("evolving modified GP at N = " + io::format_double(n));
        auto kernel = gp::build_convolution_kernel(grid, sol, pot, n);
        std::vector<gp::Sample> series;
        std::size_t idx = 0;
        gp::EvolveOptions mo;
        mo.record_every = g.record_every;
        mo.norm_gate = g.norm_gate;
        mo.observer = [&](const gp::Sample& s, const WaveField& f) {
            gp::Sample row = s;
            row.energy = gp::modified_gp_energy(f, kernel);
            row.distance = gp::field_distance(f, reference.at(idx++));
            series.push_back(row);
        };
        auto res = gp::evolve_modified_gp(phi0, kernel, g.t, g.dt, mo);
        const double d = gp::field_distance(res.field, ref.field);
        distances.push_back(d);
        char name[64];
        std::snprintf(name, sizeof name, "modgp_N%g.csv", n);
        write_series(ctx.path(name), series);
        Json r;
        r["n"] = n;
        r["kernel_integral"] = kernel.integral;
        r["kernel_ratio"] = kernel.integral / (8.0 * std::numbers::pi * a0);
        r["distance"] = d;
        r["max_norm_drift"] = res.max_norm_drift;
        r["series"] = name;
        runs.push_back(std::move(r));
    }
    bool non_increasing = true;
    for (std::size_t i = 1; i < distances.size(); ++i) non_increasing &= distances[i] <= distances[i - 1];
    Json j;
    j["a0"] = a0;
    j["scattering"] = scattering_json(ctx, sol);
    j["t"] = g.t;
    j["dt"] = g.dt;
    j["runs"] = std::move(runs);
    j["distances_non_increasing"] = non_increasing;
    io::write_json(ctx.path("report.json"), j);
    ctx.out << "modgp-compare: distances";
    for (double d : distances) ctx.out << " " << io::format_double(d);
    ctx.out << "\n";
    return ok;
}

Json check_json(const fock::CheckResult& c) {
    Json j;
    j["check_name"] = c.name;
    j["max_deviation"] = c.max_deviation;
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
    if (c.same_cutoff_deviation >= 0.0) j["same_cutoff_deviation"] = c.same_cutoff_deviation;
    if (c.working_cutoff > 0) j["working_cutoff"] = c.working_cutoff;
    return j;
}

int cmd_fock_check(Context& ctx) {
    const int m = ctx.cfg.fock.modes;
    const int n_max = ctx.cfg.fock.n_max;
    auto tol = [&ctx](const std::string& name, double fallback) {
        auto it = ctx.run.tolerances.find(name);
        return it == ctx.run.tolerances.end() ? fallback : it->second;
    };
    std::vector<fock::CheckResult> results;
    ctx.log("CCR");
    results.push_back(fock::ccr_check(m, n_max, tol("ccr", 1e-12)));
    ctx.log("Weyl shift");
    results.push_back(
        fock::weyl_shift_check(fock::default_shift(m, std::min(3.0, n_max / 4.0)), n_max, tol("weyl_shift", 1e-5)));
    const fock::Dense k = fock::default_kernel(m, 1.0);
    ctx.log("Bogoliubov action");
    results.push_back(fock::bogoliubov_action_check(k, n_max, tol("bogoliubov_action", 1e-5)));
    results.push_back(fock::symplectic_check(k, tol("symplectic", 1e-10)));
    ctx.log("sector restriction");
    auto pot = scattering::RadialPotential::from_spec(ctx.cfg.potential.spec);
    auto modes = fock::ModeBasis::plane_waves(ctx.cfg.periodic_grid(), m);
    results.push_back(fock::sector_check(modes, pot, ctx.cfg.sweep.n_list.front(), tol("sector_restriction", 1e-10)));

    Json checks = Json::array();
    bool all = true;
    for (const auto& r : results) {
        checks.push_back(check_json(r));
        all &= r.pass;
        ctx.out << (r.pass ? "pass " : "FAIL ") << r.name << " max_deviation=" << io::format_double(r.max_deviation)
                << " tolerance=" << io::format_double(r.tolerance) << "\n";
    }
    Json j;
    j["modes"] = m;
    j["n_max"] = n_max;
    j["checks"] = std::move(checks);
    j["all_pass"] = all;
    io::write_json(ctx.path("report.json"), j);
    return all ? ok : numerical_failure;
}

Json point_json(const experiments::TimePoint& p) {
    Json j;
    j["t"] = p.t;
    j["trace_distance"] = p.trace_distance;
    j["fluctuation_number"] = p.fluctuation_number;
    j["norm_loss"] = p.norm_loss;
    j["projection_error"] = p.projection_error;
    j["modgp_projection_error"] = p.modgp_projection_error;
    j["derivative"] = p.derivative;
    j["derivative_half_step"] = p.derivative_half_step;
    return j;
}

int cmd_sweep(Context& ctx, bool converge) {
    const auto exp = ctx.cfg.experiment();
    experiments::SweepOptions opts;
    opts.require_fit = converge;
    opts.keep_final_states = ctx.cfg.sweep.dump;
    opts.progress = [&ctx](const std::string& s) { ctx.log(s); };
    auto rep = experiments::convergence_sweep(exp, opts);

    io::CsvWriter csv({"N", "t", "trace_dist", "fluct_number", "energy_residual", "norm_loss"});
    Json records = Json::array();
    for (const auto& r : rep.records) {
        Json points = Json::array();
        for (const auto& p : r.points) {
            csv.row({r.n, p.t, p.trace_distance, p.fluctuation_number, r.energy.residual, p.norm_loss});
            points.push_back(point_json(p));
            if (ctx.cfg.sweep.dump && p.fluctuation_state.basis) {
                char name[64];
                std::snprintf(name, sizeof name, "fluctuation_N%g.c64", r.n);
                io::dump_fock_vector(ctx.path(name), p.fluctuation_state);
            }
        }
        Json e;
        e["expectation"] = r.energy.expectation;
        e["gp_energy"] = r.energy.gp_energy;
        e["residual"] = r.energy.residual;
        e["residual_over_n"] = r.energy.residual_over_n;
        e["residual_padded"] = r.energy.residual_padded;
        e["truncation_loss"] = r.energy.truncation_loss;
        Json rec;
        rec["n"] = r.n;
        rec["fock_dimension"] = r.dimension;
        rec["kernel_hs_norm"] = r.hs_norm;
        rec["kernel_mode_hs_norm"] = r.mode_hs_norm;
        rec["number_commutator"] = r.number_commutator;
        rec["initial_fidelity"] = r.initial_fidelity;
        rec["initial_fluctuation_number"] = r.initial_fluctuation_number;
        rec["energy"] = std::move(e);
        rec["points"] = std::move(points);
        records.push_back(std::move(rec));
    }
    csv.save(ctx.path("sweep.csv"));

    Json j;
    j["subcommand"] = ctx.run.subcommand;
    j["a0"] = rep.a0;
    j["records"] = std::move(records);
    Json fit;
    fit["skipped"] = rep.fit.skipped;
    fit["alpha"] = rep.fit.alpha;
    fit["intercept"] = rep.fit.intercept;
    fit["residual"] = rep.fit.residual;
    fit["distances"] = rep.fit_distances;
    j["fit"] = std::move(fit);
    j["distances_decreasing"] = rep.distances_decreasing;
    j["residual_over_n_decreasing"] = rep.residual_over_n_decreasing;
    j["fluctuation_band"] = rep.fluctuation_band;
    io::write_json(ctx.path("report.json"), j);

    ctx.out << ctx.run.subcommand << ": " << rep.records.size() << " values of N";
    if (!rep.fit.skipped) ctx.out << ", alpha " << io::format_double(rep.fit.alpha);
    ctx.out << ", fluctuation band " << io::format_double(rep.fluctuation_band) << "\n";
    return ok;
}

std::optional<std::pair<std::string, double>> split_tolerance(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) return std::nullopt;
    try {
        std::size_t used = 0;
        const std::string rest = s.substr(eq + 1);
        double v = std::stod(rest, &used);
        if (used != rest.size()) return std::nullopt;
        return std::make_pair(s.substr(0, eq), v);
    } catch (...) {
        return std::nullopt;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"gplab: scattering, Gross-Pitaevskii and Fock-space experiments", "gplab"};
    app.require_subcommand(0, 1);

    struct SubArgs {
        std::string config_path;
        std::string out_dir = "out";
        int verbosity = 0;
        std::vector<std::string> tolerances;
        Overrides overrides;
    };
    const std::vector<std::pair<std::string, std::string>> subs{
        {"scattering", "zero-energy scattering solution and a0"},
        {"gp", "real-time Gross-Pitaevskii evolution"},
        {"ground-state", "imaginary-time GP ground state"},
        {"modgp-compare", "modified GP against GP over the N list"},
        {"fock-check", "Fock-space identity checks"},
        {"converge", "many-body convergence sweep with power-law fit"},
        {"fluctuations", "fluctuation dynamics over the N list"}};
    // One storage block per subcommand: CLI11 resets bound flags of subcommands that did not run.
    std::vector<SubArgs> store(subs.size());
    for (std::size_t i = 0; i < subs.size(); ++i) {
        const auto& [name, help] = subs[i];
        SubArgs& a = store[i];
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", a.config_path, "TOML config file");
        sub->add_option("-o,--out", a.out_dir, "output directory")->capture_default_str();
        sub->add_flag("-v,--verbose", a.verbosity, "progress messages on stderr");
        sub->add_option("--tol", a.tolerances, "tolerance override name=value (fock-check)");
        sub->add_option_function<std::string>(
            "--potential", [&a](const std::string& s) { a.overrides.potential = s; },
            "potential spec: soft_ball:V0,R | gaussian:V0,sigma | csv:path | zero");
        if (name == "fock-check" || name == "converge" || name == "fluctuations") {
            sub->add_option_function<int>("--modes", [&a](int m) { a.overrides.modes = m; }, "number of modes M");
            sub->add_option_function<int>("--nmax", [&a](int n) { a.overrides.n_max = n; }, "Fock cutoff n_max");
        }
    }

    if (args.empty()) {
        err << app.help();
        return validation_failure;
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const auto* sub : app.get_subcommands()) target = sub;
        out << target->help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return validation_failure;
    }
    RunConfig rc;
    const SubArgs* chosen = nullptr;
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (app.get_subcommand(subs[i].first)->parsed()) {
            rc.subcommand = subs[i].first;
            chosen = &store[i];
        }
    if (!chosen) {
        err << app.help();
        return validation_failure;
    }
    rc.config_path = chosen->config_path;
    rc.out_dir = chosen->out_dir;
    rc.verbosity = chosen->verbosity;
    const Overrides& ov = chosen->overrides;
    for (const auto& t : chosen->tolerances) {
        auto kv = split_tolerance(t);
        if (!kv) {
            err << "error: --tol expects name=value, got '" << t << "'\n";
            return validation_failure;
        }
        rc.tolerances[kv->first] = kv->second;
    }

    try {
        Context ctx{rc, load(rc, ov), out, err};
        prepare_output(ctx);
        const auto& s = rc.subcommand;
        if (s == "scattering") return cmd_scattering(ctx);
        if (s == "gp") return cmd_gp(ctx);
        if (s == "ground-state") return cmd_ground_state(ctx);
        if (s == "modgp-compare") return cmd_modgp_compare(ctx);
        if (s == "fock-check") return cmd_fock_check(ctx);
        return cmd_sweep(ctx, s == "converge");
    } catch (const ConfigErrors& e) {
        err << "config invalid (" << e.errors.size() << (e.errors.size() == 1 ? " error" : " errors") << "):\n";
        for (const auto& m : e.errors) err << "  " << m << "\n";
        return validation_failure;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return validation_failure;
    } catch (const NumericalError& e) {
        err << "numerical gate failed: " << e.what() << "\n";
        return numerical_failure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return validation_failure;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace gplab::cli
