#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gplab/fock.hpp"
#include "gplab/gp.hpp"
#include "gplab/scattering.hpp"

namespace gplab::experiments {

struct ExperimentConfig {
    PeriodicGrid grid{3, 32, 6.283185307179586};
    int modes = 4;
    int n_max = 28;
    std::vector<double> n_list{2, 4, 8};
    double t_final = 0.1;
    double dt = 1e-3;
    std::vector<double> times{0.05, 0.1, 0.2};
    std::string potential = "soft_ball:0.5,1";
    std::vector<double> phi{1.0};  // real mode coefficients, padded with zeros and normalised
    std::string trap = "none";     // none | constant:c | cosine:u0
    std::size_t dimension_cap = 200000;
    double loss_gate = 1e-4;
    double fit_floor = 1e-8;
    int krylov_dim = 30;
    double krylov_tol = 1e-12;
};

/// Checks the invariants of a configuration; returns every violation.
std::vector<std::string> validate(const ExperimentConfig& cfg);

/// Trap field named by cfg.trap on cfg.grid (empty for none).
std::vector<double> trap_field(const ExperimentConfig& cfg);

/// Everything that depends on N but not on time.
struct System {
    ExperimentConfig cfg;
    double n = 0.0;
    scattering::RadialPotential potential;
    scattering::ScatteringSolution scattering;
    fock::ModeBasis modes;
    fock::BasisPtr basis;
    fock::Sparse hamiltonian;
    double hamiltonian_norm = 0.0;
    std::optional<fock::Sparse> trap;
    fock::Vec phi_coeffs;  // unit vector
    WaveField phi;         // synthesised on the grid
    gp::ConvolutionKernel kernel;
    fock::Dense k0;
};

System build_system(const ExperimentConfig& cfg, double n);
System build_system(const ExperimentConfig& cfg, double n, int n_max);

/// max |[H, N]| over matrix entries.
double number_commutator(const fock::Sparse& h, const fock::BasisPtr& basis);

struct ManyBodyResult {
    fock::FockVector state;
    double norm_drift = 0.0;
    int steps = 0;
};

/// e^{-iHt} by ceil(t / dt) Krylov steps, the last one fractional.
ManyBodyResult evolve_many_body(const fock::FockVector& psi0, const fock::Sparse& h, double t, double dt,
                                const linalg::ExpmvOptions& opts = {}, double norm_gate = 1e-8);

struct TimePoint {
    double t = 0.0;
    double trace_distance = 0.0;       // gamma(psi_t) against the projected GP solution
    double fluctuation_number = 0.0;   // <U_N(t) chi, N U_N(t) chi>
    double norm_loss = 0.0;            // boundary weights plus norm defect
    double projection_error = 0.0;     // 1 - ||P phi_t||^2 for the GP solution
    double modgp_projection_error = 0.0;
    double derivative = 0.0;           // central difference of the fluctuation number (NaN if not requested)
    double derivative_half_step = 0.0;
    fock::FockVector fluctuation_state;
};

struct Trajectory {
    std::vector<TimePoint> points;  // in the order of the requested times
    double initial_fidelity = 0.0;  // |<chi, U_N(0) chi>|
    double initial_fluctuation_number = 0.0;
    double initial_loss = 0.0;
};

/// Runs psi_{N,t} = e^{-iHt} W(sqrt N phi) T(k0) chi and the fluctuation dynamics at the given times.
/// Derivatives are evaluated at the times listed in derivative_times.
Trajectory run_trajectory(const System& sys, const std::vector<double>& times,
                          const std::vector<double>& derivative_times = {});

/// U_N(t) chi and its number expectation at a single time.
fock::FockVector fluctuation_state(const System& sys, double t);
std::vector<double> fluctuation_number(const System& sys, const std::vector<double>& times);
double fluctuation_number_derivative(const System& sys, double t, double delta);

struct EnergyRow {
    double n = 0.0;
    double expectation = 0.0;
    double gp_energy = 0.0;   // E_GP(phi)
    double residual = 0.0;    // expectation - N E_GP
    double residual_over_n = 0.0;
    double residual_padded = 0.0;  // same at n_max + 4
    double truncation_loss = 0.0;
};

std::vector<EnergyRow> energy_expansion_check(const ExperimentConfig& cfg);
EnergyRow energy_row(const System& sys, const System& padded);

struct FitResult {
    bool skipped = true;
    double alpha = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // root-mean-square residual of log(distance)
};

/// Least-squares fit log d = c - alpha log N; skipped if any distance is below the floor.
FitResult fit_power_law(const std::vector<double>& n, const std::vector<double>& d, double floor);

struct NRecord {
    double n = 0.0;
    std::size_t dimension = 0;
    double hs_norm = 0.0;
    double mode_hs_norm = 0.0;
    double number_commutator = 0.0;
    double initial_fidelity = 0.0;
    double initial_fluctuation_number = 0.0;
    EnergyRow energy;
    std::vector<TimePoint> points;
};

struct ExperimentReport {
    ExperimentConfig cfg;
    double a0 = 0.0;
    std::vector<NRecord> records;
    FitResult fit;
    std::vector<double> fit_distances;  // trace distance at t_final per N
    bool distances_decreasing = false;
    bool residual_over_n_decreasing = false;
    double fluctuation_band = 0.0;  // max ratio of <N>_t across N, over the sampled times
};

struct SweepOptions {
    bool require_fit = true;         // demand at least three N values
    bool keep_final_states = false;  // keep the fluctuation state at t_final
    std::function<void(const std::string&)> progress;
};

/// Full sweep over cfg.n_list: trace distances, fluctuation numbers, energy residuals and the fit.
ExperimentReport convergence_sweep(const ExperimentConfig& cfg, const SweepOptions& opts = {});

}  // namespace gplab::experiments
