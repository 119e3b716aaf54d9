#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/scattering.hpp"

namespace gplab::gp {

struct GPParams {
    double a0 = 0.0;
    std::optional<std::vector<double>> trap;  // U sampled on the grid

    GPParams() = default;
    explicit GPParams(double a0_, std::optional<std::vector<double>> trap_ = std::nullopt);

    double coupling() const;  // 8 pi a0
};

/// N^3 f(N.) V(N.) sampled (cell-averaged) on a 3D periodic grid.
struct ConvolutionKernel {
    PeriodicGrid grid;
    std::vector<double> values;
    double integral = 0.0;
    double n = 0.0;
};

ConvolutionKernel build_convolution_kernel(const PeriodicGrid& grid, const scattering::ScatteringSolution& sol,
                                           const scattering::RadialPotential& v, double n);

/// A spatially uniform kernel c / volume: the fully smeared limit.
ConvolutionKernel uniform_kernel(const PeriodicGrid& grid, double total);

/// \int |grad phi|^2 + U |phi|^2 + 4 pi a0 |phi|^4 (gradient term spectral).
double gp_energy(const WaveField& phi, const GPParams& p);

/// Same functional with the quartic term replaced by (1/2) \int (K * |phi|^2) |phi|^2.
double modified_gp_energy(const WaveField& phi, const ConvolutionKernel& kernel);

/// Sobolev norm ||phi||_{H^s} from the spectrum: (\sum (1 + k^2)^s |phi_k|^2)^{1/2}.
double sobolev_norm(const WaveField& phi, int s);

struct Sample {
    double t = 0.0;
    double norm = 0.0;
    double energy = 0.0;
    double distance = 0.0;  // to the initial field
};

using Observer = std::function<void(const Sample&, const WaveField&)>;

struct EvolveOptions {
    int record_every = 0;            // 0: only the endpoints
    double norm_gate = 1e-6;         // throw above this drift
    Observer observer;               // optional callback per recorded sample
};

struct EvolveResult {
    WaveField field;
    std::vector<Sample> series;
    double max_norm_drift = 0.0;
    double max_energy_drift = 0.0;
    int steps = 0;
};

/// Strang split-step evolution of i d_t phi = -Lap phi + 8 pi a0 |phi|^2 phi (trap ignored).
EvolveResult evolve_gp(const WaveField& phi0, const GPParams& p, double t, double dt, const EvolveOptions& opts = {});

/// Same scheme with the nonlinearity (K * |phi|^2) phi.
EvolveResult evolve_modified_gp(const WaveField& phi0, const ConvolutionKernel& kernel, double t, double dt,
                                const EvolveOptions& opts = {});

struct GroundStateOptions {
    double tol = 1e-12;      // stop when the energy decrease per step drops below this
    double dtau = 1e-3;
    int max_iterations = 500000;
    int record_every = 100;
};

struct GroundStateResult {
    WaveField field;
    double energy = 0.0;
    int iterations = 0;
    std::vector<double> energy_history;  // every record_every iterations and at the end
    std::vector<int> history_iterations;
    bool monotone = true;                // energy never increased between iterations
};

/// Imaginary-time split-step flow with renormalisation after every step.
GroundStateResult gp_ground_state(const GPParams& p, const PeriodicGrid& grid, const GroundStateOptions& opts = {});

/// Discrete L2 norm of phi - psi.
double field_distance(const WaveField& phi, const WaveField& psi);

/// Helpers for initial data and traps.
WaveField constant_field(const PeriodicGrid& grid);
WaveField plane_wave(const PeriodicGrid& grid, const std::array<int, 3>& mode);
WaveField gaussian_packet(const PeriodicGrid& grid, double width, const std::array<double, 3>& momentum = {0, 0, 0});
std::vector<double> harmonic_trap(const PeriodicGrid& grid, double omega = 1.0);

}  // namespace gplab::gp
