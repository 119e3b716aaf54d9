#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gplab/experiments.hpp"
#include "gplab/grid.hpp"
#include "gplab/scattering.hpp"

namespace gplab::config {

struct GridSection {
    int dim = 3;
    int points = 32;
    double box_length = 6.283185307179586;
};

struct PotentialSection {
    std::string spec;  // empty: no scattering reference
    double r_max = 0.0;
    int steps = 20000;
    double consistency_tol = 1e-5;
};

struct GPSection {
    std::optional<double> a0;  // overrides the value computed from [potential]
    double t = 0.1;
    double dt = 1e-3;
    std::string initial = "gaussian";  // gaussian | constant | plane
    double width = 0.25;
    std::array<double, 3> momentum{0, 0, 0};
    std::array<int, 3> plane_mode{1, 0, 0};
    std::string trap = "none";  // none | harmonic:omega (ground state only)
    int record_every = 10;
    std::vector<double> n_list{4, 8, 16, 32};
    double norm_gate = 1e-6;
    double tol = 1e-12;
    double dtau = 1e-3;
    int max_iterations = 500000;
    bool dump = false;
};

struct FockSection {
    int modes = 4;
    int n_max = 28;
    std::vector<double> phi{1.0};
    std::string trap = "none";
    double loss_gate = 1e-4;
    int krylov_dim = 30;
    double krylov_tol = 1e-12;
    int dimension_cap = 200000;
};

struct SweepSection {
    std::vector<double> n_list{2, 4, 8};
    double t_final = 0.1;
    double dt = 1e-3;
    std::vector<double> times{0.05, 0.1, 0.2};
    double fit_floor = 1e-8;
    bool dump = false;
};

struct Config {
    GridSection grid;
    PotentialSection potential;
    GPSection gp;
    FockSection fock;
    SweepSection sweep;

    PeriodicGrid periodic_grid() const { return {grid.dim, grid.points, grid.box_length}; }
    scattering::SolveOptions solve_options() const;
    experiments::ExperimentConfig experiment() const;
};

/// Which subcommand the config feeds; decides the cross-field checks.
enum class Purpose { any, scattering, gp, ground_state, modgp_compare, fock_check, sweep };

struct Validated {
    Config config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};

/// Strict parse: unknown sections or keys, wrong types and out-of-range values are all reported.
Validated parse(const std::string& toml_text, Purpose purpose = Purpose::any);
Validated validate_config(const std::filesystem::path& path, Purpose purpose = Purpose::any);

/// Range and consistency checks on an already-built config.
std::vector<std::string> check(const Config& cfg, Purpose purpose);

/// TOML with every key present, floats at 17 significant digits.
std::string normalized_toml(const Config& cfg);

}  // namespace gplab::config
