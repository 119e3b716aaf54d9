#pragma once

#include <string>
#include <vector>

#include "gplab/fock.hpp"

namespace gplab::fock {

struct CheckResult {
    std::string name;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    double same_cutoff_deviation = -1.0;  // < 0 when not computed
    int working_cutoff = 0;
};

/// ([a_i, a*_j] - delta_ij) on the states with sum n <= n_max - 1.
CheckResult ccr_check(int modes, int n_max, double tol = 1e-12);

/// W*(g) a_i W(g) - a_i - g_i on sum n <= n_max / 2, evaluated in a working cutoff that is
/// enlarged until the top-shell weight of every W(g)|n> is negligible.
CheckResult weyl_shift_check(const Vec& g, int n_max, double tol = 1e-5);

/// T*(k) a*_i T(k) - sum_j (a*_j cosh(k)_ji + a_j conj(sinh(k))_ji) on sum n <= n_max / 2.
CheckResult bogoliubov_action_check(const Dense& k, int n_max, double tol = 1e-5);

/// <N> on T(r) Omega for one mode against sinh(r)^2.
CheckResult squeeze_check(double r, int n_max, double tol = 1e-6);

/// cosh cosh* - sinh sinh* - 1.
CheckResult symplectic_check(const Dense& k, double tol = 1e-10);

/// Fock Hamiltonian on the one- and two-particle sectors against the first-quantized
/// Hamiltonian built from direct real-space sums.
CheckResult sector_check(const ModeBasis& modes, const scattering::RadialPotential& v, double n,
                         double tol = 1e-10);

/// Deterministic test arguments of the requested size.
Vec default_shift(int modes, double norm_sq);
Dense default_kernel(int modes, double hs_norm);

}  // namespace gplab::fock
