#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gplab::scattering {

/// Spherically symmetric repulsive potential, piecewise linear between samples.
class RadialPotential {
public:
    RadialPotential() = default;
    RadialPotential(std::vector<double> r_samples, std::vector<double> v_samples);

    /// V0 on [0, R], zero beyond (the edge is a ramp of relative width 1e-10).
    static RadialPotential soft_ball(double v0, double radius);
    /// V0 exp(-r^2 / (2 sigma^2)) sampled on [0, cutoff * sigma] and zero beyond.
    static RadialPotential gaussian(double v0, double sigma, double cutoff = 8.0, int samples = 801);
    static RadialPotential zero();
    /// `soft_ball:V0,R`, `gaussian:V0,sigma`, `csv:path` or `zero`.
    static RadialPotential from_spec(const std::string& spec);
    /// CSV with header `r,v`.
    static RadialPotential from_csv(const std::string& path);

    double operator()(double r) const;
    /// Radius beyond which V vanishes identically.
    double support() const { return r_support_; }
    /// Integral of V over R^3, exact for the piecewise-linear representation.
    double integral() const;
    /// lambda^2 V(lambda r).
    RadialPotential scaled(double lambda) const;

    const std::vector<double>& r_samples() const { return r_; }
    const std::vector<double>& v_samples() const { return v_; }

private:
    std::vector<double> r_;
    std::vector<double> v_;
    double r_support_ = 0.0;
};

struct SolveOptions {
    double r_max = 0.0;        // 0 selects 10 * support (or 10 for V = 0)
    int steps = 20000;
    double consistency_tol = 1e-5;  // relative, against max(a0, 1e-8)
    double residual_tol = 1e-8;     // absolute, on the rescaled tail of u
};

struct ScatteringSolution {
    std::vector<double> r_grid;
    std::vector<double> f_values;
    std::vector<double> u_values;   // u = r f
    std::vector<double> du_values;  // u'
    double a0 = 0.0;
    double a0_integral = 0.0;
    double tail_fit_residual = 0.0;
    double r_max = 0.0;
    int steps = 0;

    /// f(r) for any r >= 0; beyond r_max uses 1 - a0 / r.
    double f(double r) const;
};

/// Radial zero-energy solution: u'' = V u / 2, u(0) = 0, with the tail rescaled to r - a0.
/// Also fills a0_integral and checks the two values agree.
ScatteringSolution solve_zero_energy(const RadialPotential& v, const SolveOptions& opts = {});

/// (8 pi)^-1 \int f V d^3x by Simpson quadrature on the solution grid.
double scattering_length_integral(const ScatteringSolution& sol, const RadialPotential& v);

/// f(N |x|) at the given radii |x|.
std::vector<double> scaled_scattering_profile(const ScatteringSolution& sol, double n,
                                              std::span<const double> radii);

}  // namespace gplab::scattering
