#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <numbers>
#include <sstream>

#include "gplab/cli.hpp"
#include "gplab/config.hpp"
#include "gplab/error.hpp"
#include "gplab/fock_checks.hpp"
#include "gplab/gp.hpp"
#include "gplab/scattering.hpp"

namespace py = pybind11;
using namespace gplab;

namespace {

py::dict check_dict(const fock::CheckResult& c) {
    py::dict d;
    d["name"] = c.name;
    d["max_deviation"] = c.max_deviation;
    d["tolerance"] = c.tolerance;
    d["pass"] = c.pass;
    if (c.same_cutoff_deviation >= 0.0) d["same_cutoff_deviation"] = c.same_cutoff_deviation;
    if (c.working_cutoff > 0) d["working_cutoff"] = c.working_cutoff;
    return d;
}

config::Purpose purpose_from(const std::string& s) {
    if (s == "any") return config::Purpose::any;
    if (s == "scattering") return config::Purpose::scattering;
    if (s == "gp") return config::Purpose::gp;
    if (s == "ground-state") return config::Purpose::ground_state;
    if (s == "modgp-compare") return config::Purpose::modgp_compare;
    if (s == "fock-check") return config::Purpose::fock_check;
    if (s == "converge" || s == "fluctuations") return config::Purpose::sweep;
    throw ValidationError("unknown purpose '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def(
        "scattering_length",
        [](const std::string& spec, double r_max, int steps) {
            scattering::SolveOptions opts;
            opts.r_max = r_max;
            opts.steps = steps;
            auto v = scattering::RadialPotential::from_spec(spec);
            auto sol = scattering::solve_zero_energy(v, opts);
            py::dict d;
            d["a0"] = sol.a0;
            d["a0_integral"] = sol.a0_integral;
            d["tail_fit_residual"] = sol.tail_fit_residual;
            d["r_max"] = sol.r_max;
            d["born"] = v.integral() / (8.0 * std::numbers::pi);
            return d;
        },
        py::arg("spec"), py::arg("r_max") = 0.0, py::arg("steps") = 20000);

    m.def(
        "evolve_gp",
        [](int dim, int points, double box_length, double a0, double t, double dt, double width,
           std::array<double, 3> momentum, int record_every) {
            PeriodicGrid grid(dim, points, box_length);
            auto phi0 = gp::gaussian_packet(grid, width, momentum);
            gp::EvolveOptions opts;
            opts.record_every = record_every;
            auto res = gp::evolve_gp(phi0, gp::GPParams(a0), t, dt, opts);
            py::array_t<std::complex<double>> field(static_cast<py::ssize_t>(res.field.values.size()));
            std::copy(res.field.values.begin(), res.field.values.end(), field.mutable_data());
            py::list series;
            for (const auto& s : res.series) series.append(py::make_tuple(s.t, s.norm, s.energy, s.distance));
            py::dict d;
            d["field"] = field;
            d["series"] = series;
            d["max_norm_drift"] = res.max_norm_drift;
            d["max_energy_drift"] = res.max_energy_drift;
            d["steps"] = res.steps;
            return d;
        },
        py::arg("dim"), py::arg("points"), py::arg("box_length"), py::arg("a0"), py::arg("t"), py::arg("dt"),
        py::arg("width") = 0.25, py::arg("momentum") = std::array<double, 3>{0, 0, 0}, py::arg("record_every") = 0);

    m.def("ccr_check", [](int modes, int n_max, double tol) { return check_dict(fock::ccr_check(modes, n_max, tol)); },
          py::arg("modes"), py::arg("n_max"), py::arg("tol") = 1e-12);
    m.def("squeeze_check", [](double r, int n_max, double tol) { return check_dict(fock::squeeze_check(r, n_max, tol)); },
          py::arg("r"), py::arg("n_max"), py::arg("tol") = 1e-6);
    m.def(
        "weyl_shift_check",
        [](int modes, double norm_sq, int n_max, double tol) {
            return check_dict(fock::weyl_shift_check(fock::default_shift(modes, norm_sq), n_max, tol));
        },
        py::arg("modes"), py::arg("norm_sq"), py::arg("n_max"), py::arg("tol") = 1e-5);
    m.def(
        "symplectic_check",
        [](int modes, double hs_norm, double tol) {
            return check_dict(fock::symplectic_check(fock::default_kernel(modes, hs_norm), tol));
        },
        py::arg("modes"), py::arg("hs_norm"), py::arg("tol") = 1e-10);

    m.def(
        "validate_config",
        [](const std::string& text, const std::string& purpose) {
            return config::parse(text, purpose_from(purpose)).errors;
        },
        py::arg("text"), py::arg("purpose") = "any");
    m.def("normalized_toml", [](const std::string& text) {
        auto v = config::parse(text);
        if (!v.ok()) {
            std::string msg;
            for (const auto& e : v.errors) msg += (msg.empty() ? "" : "; ") + e;
            throw ValidationError(msg);
        }
        return config::normalized_toml(v.config);
    });

    m.def(
        "run",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
