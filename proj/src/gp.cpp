#include "gplab/gp.hpp"

#include <cmath>
#include <numbers>

#include "gplab/error.hpp"
#include "gplab/kernels.hpp"

namespace gplab::gp {

namespace {

constexpr double kPi = std::numbers::pi;

double kinetic_energy(const WaveField& phi) {
    std::vector<cd> spec(phi.values);
    fft_for(phi.grid).forward(spec);
    auto k2 = phi.grid.k_squared();
    double s = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) s += k2[i] * std::norm(spec[i]);
    return s * phi.grid.cell_volume() / static_cast<double>(spec.size());
}

std::vector<double> density(const WaveField& phi) {
    std::vector<double> rho(phi.values.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(phi.values[i]);
    return rho;
}

// Potential that multiplies phi in the nonlinear sub-step.
using PotentialFn = std::function<void(const WaveField&, std::vector<double>&)>;

class SplitStepper {
public:
    SplitStepper(const PeriodicGrid& grid, PotentialFn pot) : grid_(grid), pot_(std::move(pot)), k2_(grid.k_squared()) {}

    void step(WaveField& phi, double dt) {
        half_nonlinear(phi, dt);
        kinetic(phi, dt);
        half_nonlinear(phi, dt);
    }

private:
    void half_nonlinear(WaveField& phi, double dt) {
        pot_(phi, buf_);
        for (std::size_t i = 0; i < phi.values.size(); ++i) phi.values[i] *= std::polar(1.0, -0.5 * dt * buf_[i]);
    }

    void kinetic(WaveField& phi, double dt) {
        if (dt != phase_dt_) {
            phase_.resize(k2_.size());
            const double inv = 1.0 / static_cast<double>(k2_.size());
            for (std::size_t i = 0; i < k2_.size(); ++i) phase_[i] = std::polar(inv, -dt * k2_[i]);
            phase_dt_ = dt;
        }
        const auto& fft = fft_for(grid_);
        fft.forward(phi.values);
        for (std::size_t i = 0; i < phase_.size(); ++i) phi.values[i] *= phase_[i];
        fft.backward(phi.values);
    }

    PeriodicGrid grid_;
    PotentialFn pot_;
    std::vector<double> k2_;
    std::vector<cd> phase_;
    double phase_dt_ = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> buf_;
};

EvolveResult run_evolution(const WaveField& phi0, PotentialFn pot, const std::function<double(const WaveField&)>& energy,
                           double t, double dt, const EvolveOptions& opts) {
    require(t >= 0.0 && std::isfinite(t), "evolution time must be finite and >= 0");
    require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
    EvolveResult res;
    res.field = phi0;
    const double n0 = phi0.norm();
    const double e0 = energy(phi0);

    int n_steps = t > 0.0 ? static_cast<int>(std::ceil(t / dt - 1e-9)) : 0;
    double last = t - (n_steps - 1) * dt;
    if (n_steps > 0 && last <= 0.0) last = dt;

    auto record = [&](double time) {
        Sample s{time, res.field.norm(), energy(res.field), field_distance(res.field, phi0)};
        res.max_norm_drift = std::max(res.max_norm_drift, std::abs(s.norm - n0));
        res.max_energy_drift = std::max(res.max_energy_drift, std::abs(s.energy - e0));
        res.series.push_back(s);
        if (opts.observer) opts.observer(s, res.field);
    };
    record(0.0);

    SplitStepper stepper(phi0.grid, std::move(pot));
    double time = 0.0;
    for (int k = 1; k <= n_steps; ++k) {
        double h = (k == n_steps) ? last : dt;
        stepper.step(res.field, h);
        time = (k == n_steps) ? t : k * dt;
        bool rec = (k == n_steps) || (opts.record_every > 0 && k % opts.record_every == 0);
        if (rec) {
            record(time);
        } else {
            double drift = std::abs(res.field.norm() - n0);
            res.max_norm_drift = std::max(res.max_norm_drift, drift);
        }
        if (res.max_norm_drift > opts.norm_gate)
            throw NumericalError("norm drift " + std::to_string(res.max_norm_drift) + " exceeds gate; reduce dt");
    }
    res.steps = n_steps;
    return res;
}

}  // namespace

GPParams::GPParams(double a0_, std::optional<std::vector<double>> trap_) : a0(a0_), trap(std::move(trap_)) {
    require(std::isfinite(a0) && a0 >= 0.0, "a0 must be finite and >= 0");
    if (trap)
        for (double u : *trap) require(std::isfinite(u), "trap values must be finite");
}

double GPParams::coupling() const { return 8.0 * kPi * a0; }

ConvolutionKernel build_convolution_kernel(const PeriodicGrid& grid, const scattering::ScatteringSolution& sol,
                                           const scattering::RadialPotential& v, double n) {
    ConvolutionKernel k;
    k.grid = grid;
    k.n = n;
    k.values = kernels::scaled_scattering_kernel(grid, sol, v, n);
    double s = 0.0;
    for (double x : k.values) s += x;
    k.integral = s * grid.cell_volume();
    return k;
}

ConvolutionKernel uniform_kernel(const PeriodicGrid& grid, double total) {
    ConvolutionKernel k;
    k.grid = grid;
    k.values.assign(grid.size(), total / grid.volume());
    k.integral = total;
    return k;
}

double gp_energy(const WaveField& phi, const GPParams& p) {
    double e = kinetic_energy(phi);
    const double dv = phi.grid.cell_volume();
    double pot = 0.0, quart = 0.0;
    if (p.trap) require(p.trap->size() == phi.values.size(), "trap size does not match grid");
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        double r = std::norm(phi.values[i]);
        if (p.trap) pot += (*p.trap)[i] * r;
        quart += r * r;
    }
    return e + dv * pot + 4.0 * kPi * p.a0 * dv * quart;
}

double modified_gp_energy(const WaveField& phi, const ConvolutionKernel& kernel) {
    require(kernel.grid == phi.grid, "kernel and field grids differ");
    auto rho = density(phi);
    std::vector<cd> rc(rho.begin(), rho.end());
    auto conv = periodic_convolve(phi.grid, kernel.values, rc);
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += conv[i].real() * rho[i];
    return kinetic_energy(phi) + 0.5 * s * phi.grid.cell_volume();
}

double sobolev_norm(const WaveField& phi, int s) {
    std::vector<cd> spec(phi.values);
    fft_for(phi.grid).forward(spec);
    auto k2 = phi.grid.k_squared();
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) acc += std::pow(1.0 + k2[i], s) * std::norm(spec[i]);
    return std::sqrt(acc * phi.grid.cell_volume() / static_cast<double>(spec.size()));
}

EvolveResult evolve_gp(const WaveField& phi0, const GPParams& p, double t, double dt, const EvolveOptions& opts) {
    const double g = p.coupling();
    GPParams free_params(p.a0);
    auto pot = [g](const WaveField& phi, std::vector<double>& out) {
        out.resize(phi.values.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = g * std::norm(phi.values[i]);
    };
    return run_evolution(phi0, pot, [&](const WaveField& f) { return gp_energy(f, free_params); }, t, dt, opts);
}

EvolveResult evolve_modified_gp(const WaveField& phi0, const ConvolutionKernel& kernel, double t, double dt,
                                const EvolveOptions& opts) {
    require(kernel.grid == phi0.grid, "kernel and field grids differ");
    auto spec = kernel_spectrum(kernel.grid, kernel.values);
    const auto* fft = &fft_for(kernel.grid);
    std::vector<cd> work;
    auto pot = [spec = std::move(spec), fft, work](const WaveField& phi, std::vector<double>& out) mutable {
        const std::size_t n = phi.values.size();
        work.resize(n);
        for (std::size_t i = 0; i < n; ++i) work[i] = std::norm(phi.values[i]);
        fft->forward(work);
        for (std::size_t i = 0; i < n; ++i) work[i] *= spec[i];
        fft->backward(work);
        out.resize(n);
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = work[i].real() * inv;
    };
    return run_evolution(phi0, pot, [&](const WaveField& f) { return modified_gp_energy(f, kernel); }, t, dt, opts);
}

GroundStateResult gp_ground_state(const GPParams& p, const PeriodicGrid& grid, const GroundStateOptions& opts) {
    require(opts.dtau > 0.0 && opts.tol > 0.0, "ground state: dtau and tol must be positive");
    if (p.trap) require(p.trap->size() == grid.size(), "trap size does not match grid");

    // Start from a positive field that is not an eigenstate of the trap.
    WaveField phi(grid);
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        double u = p.trap ? (*p.trap)[i] : 0.0;
        phi.values[i] = 1.0 / std::sqrt(1.0 + std::max(u, 0.0));
    }
    phi.normalize();

    const double g = p.coupling();
    const auto k2 = grid.k_squared();
    const double inv = 1.0 / static_cast<double>(grid.size());
    std::vector<double> kin(k2.size());
    for (std::size_t i = 0; i < k2.size(); ++i) kin[i] = std::exp(-opts.dtau * k2[i]) * inv;
    const auto& fft = fft_for(grid);

    auto half = [&](WaveField& f) {
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            double u = (p.trap ? (*p.trap)[i] : 0.0) + g * std::norm(f.values[i]);
            f.values[i] *= std::exp(-0.5 * opts.dtau * u);
        }
    };

    GroundStateResult res;
    double e_prev = gp_energy(phi, p);
    res.energy_history.push_back(e_prev);
    res.history_iterations.push_back(0);
    for (int it = 1; it <= opts.max_iterations; ++it) {
        half(phi);
        fft.forward(phi.values);
        for (std::size_t i = 0; i < kin.size(); ++i) phi.values[i] *= kin[i];
        fft.backward(phi.values);
        half(phi);
        phi.normalize();
        double e = gp_energy(phi, p);
        if (e > e_prev + 1e-14 * std::max(1.0, std::abs(e_prev))) res.monotone = false;
        const bool recorded = opts.record_every > 0 && it % opts.record_every == 0;
        if (recorded) {
            res.energy_history.push_back(e);
            res.history_iterations.push_back(it);
        }
        double dec = e_prev - e;
        e_prev = e;
        if (std::abs(dec) < opts.tol) {
            res.field = std::move(phi);
            res.energy = e;
            res.iterations = it;
            if (!recorded) {
                res.energy_history.push_back(e);
                res.history_iterations.push_back(it);
            }
            return res;
        }
    }
    throw NumericalError("ground state: no convergence within the iteration cap; reduce dtau or loosen tol");
}

double field_distance(const WaveField& phi, const WaveField& psi) {
    require(phi.grid == psi.grid, "field_distance: grids differ");
    double s = 0.0;
    for (std::size_t i = 0; i < phi.values.size(); ++i) s += std::norm(phi.values[i] - psi.values[i]);
    return std::sqrt(s * phi.grid.cell_volume());
}

WaveField constant_field(const PeriodicGrid& grid) {
    WaveField f(grid);
    const double c = 1.0 / std::sqrt(grid.volume());
    for (auto& z : f.values) z = c;
    return f;
}

WaveField plane_wave(const PeriodicGrid& grid, const std::array<int, 3>& mode) {
    WaveField f(grid);
    const double c = 1.0 / std::sqrt(grid.volume());
    const double q = 2.0 * kPi / grid.box_length;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        auto x = grid.position(i);
        double ph = 0.0;
        for (int d = 0; d < grid.dim; ++d) ph += q * mode[d] * x[d];
        f.values[i] = std::polar(c, ph);
    }
    return f;
}

WaveField gaussian_packet(const PeriodicGrid& grid, double width, const std::array<double, 3>& momentum) {
    require(width > 0.0, "gaussian width must be positive");
    WaveField f(grid);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        auto x = grid.position(i);
        double r2 = 0.0, ph = 0.0;
        for (int d = 0; d < grid.dim; ++d) {
            r2 += x[d] * x[d];
            ph += momentum[d] * x[d];
        }
        f.values[i] = std::polar(std::exp(-0.5 * r2 / (width * width)), ph);
    }
    f.normalize();
    return f;
}

std::vector<double> harmonic_trap(const PeriodicGrid& grid, double omega) {
    std::vector<double> u(grid.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        auto x = grid.position(i);
        double r2 = 0.0;
        for (int d = 0; d < grid.dim; ++d) r2 += x[d] * x[d];
        u[i] = omega * omega * r2;
    }
    return u;
}

}  // namespace gplab::gp
