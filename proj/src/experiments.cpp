#include "gplab/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "gplab/error.hpp"

namespace gplab::experiments {

namespace {

std::string format_n(double n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", n);
    return buf;
}

std::pair<std::string, double> parse_trap(const std::string& spec) {
    if (spec == "none") return {"none", 0.0};
    auto colon = spec.find(':');
    require(colon != std::string::npos, "trap must be none, constant:c or cosine:u0");
    std::string kind = spec.substr(0, colon);
    require(kind == "constant" || kind == "cosine", "unknown trap kind '" + kind + "'");
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(spec.substr(colon + 1), &used);
        require(used == spec.size() - colon - 1, "malformed trap parameter");
    } catch (const std::logic_error&) {
        throw ValidationError("malformed trap parameter in '" + spec + "'");
    }
    require(std::isfinite(value) && value >= 0.0, "trap parameter must be finite and >= 0");
    return {kind, value};
}

fock::Vec phi_coefficients(const ExperimentConfig& cfg) {
    fock::Vec c = fock::Vec::Zero(cfg.modes);
    for (std::size_t i = 0; i < cfg.phi.size() && i < static_cast<std::size_t>(cfg.modes); ++i) c(i) = cfg.phi[i];
    require(c.norm() > 0.0, "phi has no weight on the mode basis");
    return c / c.norm();
}

double number_expectation(const fock::FockVector& v) {
    const auto& b = *v.basis;
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += b.total(i) * std::norm(v.amplitudes(static_cast<Eigen::Index>(i)));
    return s;
}

linalg::ExpmvOptions krylov(const ExperimentConfig& cfg) {
    linalg::ExpmvOptions o;
    o.krylov_dim = cfg.krylov_dim;
    o.tol = cfg.krylov_tol;
    return o;
}

// Advances a field by repeated split-step evolutions so that intermediate times can be read off.
template <class Step>
class FieldClock {
public:
    FieldClock(WaveField start, Step step) : field_(std::move(start)), step_(std::move(step)) {}
    const WaveField& at(double t) {
        require(t >= time_, "field clock cannot run backwards");
        if (t > time_) {
            field_ = step_(field_, t - time_);
            time_ = t;
        }
        return field_;
    }

private:
    WaveField field_;
    Step step_;
    double time_ = 0.0;
};

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& cfg) {
    std::vector<std::string> errs;
    auto check = [&errs](bool ok, const std::string& what) {
        if (!ok) errs.push_back(what);
    };
    check(cfg.grid.dim == 3, "grid.dim must be 3 for Fock experiments");
    check(cfg.modes >= 1 && cfg.modes <= 8, "fock.modes must be in [1, 8]");
    check(cfg.n_max >= 1 && cfg.n_max <= 255, "fock.n_max must be in [1, 255]");
    check(!cfg.n_list.empty(), "sweep.n_list must not be empty");
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        const double n = cfg.n_list[i];
        check(std::isfinite(n) && n >= 1.0, "sweep.n_list entries must be >= 1");
        check(n <= cfg.n_max / 2.0, "sweep.n_list entry " + format_n(n) + " violates N <= fock.n_max / 2 = " +
                                        format_n(cfg.n_max / 2.0));
        if (i > 0) check(n > cfg.n_list[i - 1], "sweep.n_list must be strictly ascending");
    }
    if (cfg.modes >= 1 && cfg.modes <= 8 && cfg.n_max >= 0 && cfg.n_max <= 255)
        check(fock::FockBasis::count(cfg.modes, cfg.n_max + 4) <= cfg.dimension_cap,
              "Fock dimension C(M + n_max + 4, M) exceeds fock.dimension_cap");
    check(std::isfinite(cfg.t_final) && cfg.t_final >= 0.0, "sweep.t_final must be >= 0");
    check(std::isfinite(cfg.dt) && cfg.dt > 0.0, "sweep.dt must be > 0");
    for (double t : cfg.times) check(std::isfinite(t) && t >= 0.0, "sweep.times entries must be >= 0");
    check(!cfg.phi.empty() && cfg.phi.size() <= static_cast<std::size_t>(std::max(cfg.modes, 0)),
          "fock.phi must have between 1 and fock.modes entries");
    double phi_norm = 0.0;
    for (double c : cfg.phi) {
        check(std::isfinite(c), "fock.phi entries must be finite");
        phi_norm += c * c;
    }
    check(phi_norm > 0.0, "fock.phi must not be zero");
    check(cfg.loss_gate > 0.0, "fock.loss_gate must be > 0");
    check(cfg.fit_floor >= 0.0, "sweep.fit_floor must be >= 0");
    check(cfg.krylov_dim >= 2, "fock.krylov_dim must be >= 2");
    check(cfg.krylov_tol > 0.0, "fock.krylov_tol must be > 0");
    try {
        scattering::RadialPotential::from_spec(cfg.potential);
    } catch (const ValidationError& e) {
        errs.push_back(std::string("potential: ") + e.what());
    }
    try {
        parse_trap(cfg.trap);
    } catch (const ValidationError& e) {
        errs.push_back(std::string("trap: ") + e.what());
    }
    return errs;
}

std::vector<double> trap_field(const ExperimentConfig& cfg) {
    auto [kind, value] = parse_trap(cfg.trap);
    if (kind == "none") return {};
    std::vector<double> u(cfg.grid.size(), value);
    if (kind == "cosine") {
        const double q = 2.0 * std::numbers::pi / cfg.grid.box_length;
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = value * (1.0 - std::cos(q * cfg.grid.position(i)[0]));
    }
    return u;
}

System build_system(const ExperimentConfig& cfg, double n) { return build_system(cfg, n, cfg.n_max); }

System build_system(const ExperimentConfig& cfg, double n, int n_max) {
    if (auto errs = validate(cfg); !errs.empty()) throw ValidationError(errs.front());
    require(fock::FockBasis::count(cfg.modes, n_max) <= cfg.dimension_cap, "Fock dimension cap exceeded");
    System s;
    s.cfg = cfg;
    s.n = n;
    s.potential = scattering::RadialPotential::from_spec(cfg.potential);
    s.scattering = scattering::solve_zero_energy(s.potential);
    s.modes = fock::ModeBasis::plane_waves(cfg.grid, cfg.modes);
    if (s.modes.gram_defect() > 1e-10) throw NumericalError("mode basis is not orthonormal");
    s.basis = std::make_shared<const fock::FockBasis>(cfg.modes, n_max);
    s.hamiltonian = fock::assemble_hamiltonian(s.modes, s.potential, n, s.basis).sparse();
    s.hamiltonian_norm = linalg::norm_bound(s.hamiltonian);
    if (auto u = trap_field(cfg); !u.empty()) s.trap = fock::trap_operator(s.modes, u, s.basis).sparse();
    s.phi_coeffs = phi_coefficients(cfg);
    s.phi = s.modes.synthesize(s.phi_coeffs);
    s.phi.normalize();
    s.kernel = gp::build_convolution_kernel(cfg.grid, s.scattering, s.potential, n);
    s.k0 = fock::build_correlation_kernel(s.phi, s.scattering, s.potential, n, s.modes).mode_matrix;
    return s;
}

double number_commutator(const fock::Sparse& h, const fock::BasisPtr& basis) {
    double worst = 0.0;
    for (int r = 0; r < h.outerSize(); ++r)
        for (fock::Sparse::InnerIterator it(h, r); it; ++it) {
            const int dn = basis->total(static_cast<std::size_t>(it.col())) - basis->total(static_cast<std::size_t>(r));
            worst = std::max(worst, std::abs(it.value()) * std::abs(dn));
        }
    return worst;
}

ManyBodyResult evolve_many_body(const fock::FockVector& psi0, const fock::Sparse& h, double t, double dt,
                                const linalg::ExpmvOptions& opts, double norm_gate) {
    require(t >= 0.0 && dt > 0.0, "evolve_many_body needs t >= 0 and dt > 0");
    ManyBodyResult out{psi0, 0.0, 0};
    const double n0 = psi0.norm();
    const double bound = linalg::norm_bound(h);
    auto apply = [&h](const fock::Vec& x, fock::Vec& y) { y.noalias() = h * x; };
    const long full = static_cast<long>(std::floor(t / dt));
    double done = 0.0;
    for (long i = 0; i <= full; ++i) {
        const double tau = i < full ? dt : t - done;
        if (i == full && tau <= 1e-14 * dt) break;
        linalg::expmv_hermitian(apply, bound, out.state.amplitudes, tau, opts);
        done = i < full ? (i + 1) * dt : t;
        ++out.steps;
        out.norm_drift = std::max(out.norm_drift, std::abs(out.state.norm() - n0));
        if (out.norm_drift > norm_gate) throw NumericalError("many-body evolution: norm drift above gate");
    }
    return out;
}

Trajectory run_trajectory(const System& sys, const std::vector<double>& times,
                          const std::vector<double>& derivative_times) {
    const auto& cfg = sys.cfg;
    const double delta = cfg.dt;
    const double sqrt_n = std::sqrt(sys.n);
    const auto opts = krylov(cfg);

    std::vector<double> evals{0.0};
    for (double t : times) evals.push_back(t);
    for (double t : derivative_times) {
        require(t - delta >= 0.0, "derivative time too close to 0 for the difference step");
        for (double d : {-delta, -0.5 * delta, 0.5 * delta, delta}) evals.push_back(t + d);
    }
    std::sort(evals.begin(), evals.end());
    evals.erase(std::unique(evals.begin(), evals.end()), evals.end());

    // psi_{N,0} = W(sqrt N phi) T(k0) chi with chi = vacuum.
    auto init = fock::squeezed_coherent(sys.phi_coeffs, sys.k0, fock::FockVector::vacuum(sys.basis), sys.n,
                                        cfg.loss_gate, opts);

    gp::GPParams params(sys.scattering.a0);
    auto gp_step = [&](const WaveField& f, double dt_) { return gp::evolve_gp(f, params, dt_, cfg.dt).field; };
    auto mod_step = [&](const WaveField& f, double dt_) {
        return gp::evolve_modified_gp(f, sys.kernel, dt_, cfg.dt).field;
    };
    FieldClock gp_clock(sys.phi, gp_step);
    FieldClock mod_clock(sys.phi, mod_step);

    struct Eval {
        double trace = 0.0, fluct = 0.0, loss = 0.0, proj = 0.0, mod_proj = 0.0, fidelity = 0.0;
        fock::FockVector state;
    };
    std::map<double, Eval> results;
    fock::FockVector psi = init.state;
    double t_prev = 0.0;
    for (double t : evals) {
        psi = evolve_many_body(psi, sys.hamiltonian, t - t_prev, cfg.dt, opts).state;
        t_prev = t;
        Eval e;
        const auto& phi_gp = gp_clock.at(t);
        fock::Vec c_gp = sys.modes.coefficients(phi_gp);
        e.proj = std::max(0.0, 1.0 - c_gp.squaredNorm());
        e.trace = fock::trace_norm_distance(fock::reduced_density(psi), c_gp / c_gp.norm());

        const auto& phi_mod = mod_clock.at(t);
        fock::Vec c_mod = sys.modes.coefficients(phi_mod);
        e.mod_proj = std::max(0.0, 1.0 - c_mod.squaredNorm());
        auto w = fock::apply_weyl(-sqrt_n * c_mod, psi, opts);
        fock::Dense kt = fock::build_correlation_kernel(phi_mod, sys.scattering, sys.potential, sys.n, sys.modes)
                             .mode_matrix;
        auto back = fock::apply_bogoliubov(-kt, w.state, opts);
        e.state = back.state;
        e.fluct = number_expectation(back.state);
        e.loss = init.truncation_loss + w.boundary_weight + back.boundary_weight + std::abs(back.state.norm() - 1.0);
        e.fidelity = std::abs(back.state.amplitudes(0));
        results.emplace(t, std::move(e));
    }

    Trajectory out;
    out.initial_fidelity = results.at(0.0).fidelity;
    out.initial_fluctuation_number = results.at(0.0).fluct;
    out.initial_loss = init.truncation_loss;
    for (double t : times) {
        const auto& e = results.at(t);
        TimePoint p;
        p.t = t;
        p.trace_distance = e.trace;
        p.fluctuation_number = e.fluct;
        p.norm_loss = e.loss;
        p.projection_error = e.proj;
        p.modgp_projection_error = e.mod_proj;
        p.fluctuation_state = e.state;
        p.derivative = std::numeric_limits<double>::quiet_NaN();
        p.derivative_half_step = std::numeric_limits<double>::quiet_NaN();
        if (std::find(derivative_times.begin(), derivative_times.end(), t) != derivative_times.end()) {
            p.derivative = (results.at(t + delta).fluct - results.at(t - delta).fluct) / (2.0 * delta);
            p.derivative_half_step =
                (results.at(t + 0.5 * delta).fluct - results.at(t - 0.5 * delta).fluct) / delta;
        }
        out.points.push_back(std::move(p));
    }
    return out;
}

fock::FockVector fluctuation_state(const System& sys, double t) {
    return run_trajectory(sys, {t}).points.front().fluctuation_state;
}

std::vector<double> fluctuation_number(const System& sys, const std::vector<double>& times) {
    auto traj = run_trajectory(sys, times);
    std::vector<double> out;
    for (const auto& p : traj.points) out.push_back(p.fluctuation_number);
    return out;
}

double fluctuation_number_derivative(const System& sys, double t, double delta) {
    System s = sys;
    s.cfg.dt = delta;
    return run_trajectory(s, {t}, {t}).points.front().derivative;
}

EnergyRow energy_row(const System& sys, const System& padded) {
    auto one = [](const System& s, double& loss) {
        auto st = fock::squeezed_coherent(s.phi_coeffs, s.k0, fock::FockVector::vacuum(s.basis), s.n,
                                          s.cfg.loss_gate, krylov(s.cfg));
        loss = st.truncation_loss;
        fock::Vec hv = s.hamiltonian * st.state.amplitudes;
        if (s.trap) hv += *s.trap * st.state.amplitudes;
        return st.state.amplitudes.dot(hv).real();
    };
    EnergyRow row;
    row.n = sys.n;
    double loss_padded = 0.0;
    row.expectation = one(sys, row.truncation_loss);
    auto u = trap_field(sys.cfg);
    gp::GPParams params(sys.scattering.a0, u.empty() ? std::nullopt : std::optional(u));
    row.gp_energy = gp::gp_energy(sys.phi, params);
    row.residual = row.expectation - sys.n * row.gp_energy;
    row.residual_over_n = row.residual / sys.n;
    row.residual_padded = one(padded, loss_padded) - padded.n * row.gp_energy;
    return row;
}

std::vector<EnergyRow> energy_expansion_check(const ExperimentConfig& cfg) {
    std::vector<EnergyRow> rows;
    for (double n : cfg.n_list) rows.push_back(energy_row(build_system(cfg, n), build_system(cfg, n, cfg.n_max + 4)));
    return rows;
}

FitResult fit_power_law(const std::vector<double>& n, const std::vector<double>& d, double floor) {
    require(n.size() == d.size() && n.size() >= 2, "power-law fit needs at least two points");
    FitResult fit;
    for (double x : d)
        if (!(x > floor)) return fit;
    const std::size_t m = n.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = std::log(n[i]), y = std::log(d[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.intercept = (sy - slope * sx) / m;
    fit.alpha = -slope;
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = std::log(d[i]) - (fit.intercept + slope * std::log(n[i]));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / m);
    fit.skipped = false;
    return fit;
}

ExperimentReport convergence_sweep(const ExperimentConfig& cfg, const SweepOptions& opts) {
    if (auto errs = validate(cfg); !errs.empty()) throw ValidationError(errs.front());
    if (opts.require_fit) require(cfg.n_list.size() >= 3, "convergence sweep needs at least three N values");
    ExperimentReport rep;
    rep.cfg = cfg;
    std::vector<double> times = cfg.times;
    if (std::find(times.begin(), times.end(), cfg.t_final) == times.end()) times.push_back(cfg.t_final);
    std::sort(times.begin(), times.end());
    std::vector<double> deriv;
    for (double t : cfg.times)
        if (t - cfg.dt >= 0.0) deriv.push_back(t);

    for (double n : cfg.n_list) {
        if (opts.progress) opts.progress("building N = " + format_n(n));
        System sys = build_system(cfg, n);
        System padded = build_system(cfg, n, cfg.n_max + 4);
        rep.a0 = sys.scattering.a0;
        NRecord rec;
        rec.n = n;
        rec.dimension = sys.basis->size();
        auto ck = fock::build_correlation_kernel(sys.phi, sys.scattering, sys.potential, n, sys.modes);
        rec.hs_norm = ck.hs_norm;
        rec.mode_hs_norm = ck.mode_hs_norm();
        rec.number_commutator = number_commutator(sys.hamiltonian, sys.basis);
        rec.energy = energy_row(sys, padded);
        if (opts.progress) opts.progress("evolving N = " + format_n(n) + ", dimension " + std::to_string(rec.dimension));
        auto traj = run_trajectory(sys, times, deriv);
        rec.initial_fidelity = traj.initial_fidelity;
        rec.initial_fluctuation_number = traj.initial_fluctuation_number;
        for (auto& p : traj.points) {
            if (!(opts.keep_final_states && p.t == cfg.t_final)) p.fluctuation_state = {};
            if (p.norm_loss > cfg.loss_gate)
                throw NumericalError("truncation loss " + std::to_string(p.norm_loss) + " above gate at N = " +
                                     std::to_string(n));
        }
        rec.points = std::move(traj.points);
        rep.records.push_back(std::move(rec));
    }

    std::vector<double> ns;
    for (const auto& r : rep.records) {
        ns.push_back(r.n);
        for (const auto& p : r.points)
            if (p.t == cfg.t_final) rep.fit_distances.push_back(p.trace_distance);
    }
    if (ns.size() >= 2) rep.fit = fit_power_law(ns, rep.fit_distances, cfg.fit_floor);
    rep.distances_decreasing = true;
    rep.residual_over_n_decreasing = true;
    for (std::size_t i = 1; i < rep.records.size(); ++i) {
        rep.distances_decreasing &= rep.fit_distances[i] < rep.fit_distances[i - 1];
        rep.residual_over_n_decreasing &=
            rep.records[i].energy.residual_over_n < rep.records[i - 1].energy.residual_over_n;
    }
    rep.fluctuation_band = 1.0;
    for (double t : cfg.times) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& r : rep.records)
            for (const auto& p : r.points)
                if (p.t == t) {
                    lo = std::min(lo, p.fluctuation_number);
                    hi = std::max(hi, p.fluctuation_number);
                }
        if (hi > 0.0) rep.fluctuation_band = std::max(rep.fluctuation_band, lo > 0.0 ? hi / lo : INFINITY);
    }
    return rep;
}

}  // namespace gplab::experiments
