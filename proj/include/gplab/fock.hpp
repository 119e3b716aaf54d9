#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/krylov.hpp"
#include "gplab/scattering.hpp"

namespace gplab::fock {

using Dense = Eigen::MatrixXcd;
using Sparse = Eigen::SparseMatrix<cd, Eigen::RowMajor>;
using Vec = Eigen::VectorXcd;

/// All occupations (n_1..n_M) with sum <= n_max, graded by total and lexicographically
/// descending within a shell. Index 0 is the vacuum.
class FockBasis {
public:
    FockBasis(int modes, int n_max);

    static std::size_t count(int modes, int n_max);

    int modes() const { return modes_; }
    int n_max() const { return n_max_; }
    std::size_t size() const { return totals_.size(); }
    std::size_t vacuum() const { return 0; }

    std::span<const std::uint8_t> occupation(std::size_t idx) const {
        return {occ_.data() + idx * modes_, static_cast<std::size_t>(modes_)};
    }
    int total(std::size_t idx) const { return totals_[idx]; }
    std::optional<std::size_t> index(std::span<const std::uint8_t> occ) const;
    std::optional<std::size_t> index(std::span<const int> occ) const;

    /// Basis states with total particle number n occupy [shell_begin(n), shell_end(n)).
    std::size_t shell_begin(int n) const { return shells_[n]; }
    std::size_t shell_end(int n) const { return shells_[n + 1]; }

private:
    std::uint64_t key(std::span<const std::uint8_t> occ) const;

    int modes_ = 0;
    int n_max_ = 0;
    std::vector<std::uint8_t> occ_;
    std::vector<int> totals_;
    std::vector<std::size_t> shells_;
    std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

struct FockVector {
    BasisPtr basis;
    Vec amplitudes;

    FockVector() = default;
    FockVector(BasisPtr b, Vec a);
    static FockVector vacuum(BasisPtr b);
    double norm() const { return amplitudes.norm(); }
};

/// Operator on a truncated Fock space; sparse for ladder-built operators, dense for exponentials.
class FockOperator {
public:
    FockOperator(BasisPtr basis, Sparse m) : basis_(std::move(basis)), mat_(std::move(m)) {}
    FockOperator(BasisPtr basis, Dense m) : basis_(std::move(basis)), mat_(std::move(m)) {}

    const BasisPtr& basis() const { return basis_; }
    bool is_sparse() const { return std::holds_alternative<Sparse>(mat_); }
    const Sparse& sparse() const { return std::get<Sparse>(mat_); }
    const Dense& dense() const { return std::get<Dense>(mat_); }
    Dense to_dense() const;
    Vec apply(const Vec& v) const;
    FockVector apply(const FockVector& v) const;

private:
    BasisPtr basis_;
    std::variant<Sparse, Dense> mat_;
};

/// Plane-wave (or user-supplied) one-particle modes on a periodic grid.
struct ModeBasis {
    PeriodicGrid grid;
    std::vector<std::array<int, 3>> momenta;  // integer frequencies
    std::vector<WaveField> fields;
    Dense kinetic;                            // <grad xi_i, grad xi_j>
    std::vector<double> kinetic_diag;

    /// M lowest-|k| plane waves; ties ordered by axis (x first) with -k before +k.
    static ModeBasis plane_waves(const PeriodicGrid& grid, int m);
    static ModeBasis from_momenta(const PeriodicGrid& grid, std::vector<std::array<int, 3>> momenta);

    int size() const { return static_cast<int>(fields.size()); }
    /// Coefficients <xi_i, phi>.
    Vec coefficients(const WaveField& phi) const;
    /// sum_i c_i xi_i on the grid.
    WaveField synthesize(const Vec& c) const;
    /// max |<xi_i, xi_j> - delta_ij|.
    double gram_defect() const;
};

/// Projection of k(x;y) onto mode pairs: k_ij = <xi_i (x) xi_j, k>.
struct CorrelationKernel {
    Dense mode_matrix;
    double hs_norm = 0.0;  // of the full-grid kernel
    double mode_hs_norm() const { return mode_matrix.norm(); }
};

// Ladder algebra ------------------------------------------------------------------------------

Sparse annihilator(const FockBasis& basis, int mode);
std::vector<std::pair<FockOperator, FockOperator>> ladder_ops(const BasisPtr& basis);
FockOperator number_operator(const BasisPtr& basis);
Sparse number_matrix(const FockBasis& basis);

/// Lift a one-body matrix h to sum_ij h_ij a*_i a_j.
Sparse one_body(const FockBasis& basis, const Dense& h);

/// Anti-Hermitian generators sum_i (g_i a*_i - conj(g_i) a_i) and
/// (1/2) sum_ij k_ij a*_i a*_j - h.c.
Sparse weyl_generator(const FockBasis& basis, const Vec& g);
Sparse bogoliubov_generator(const FockBasis& basis, const Dense& k);

struct UnitaryOptions {
    bool check_preconditions = true;
    double unitarity_gate = 1e-6;
};

/// Dense W(g) = exp(weyl_generator) by scaling and squaring.
FockOperator weyl(const Vec& g, const BasisPtr& basis, const UnitaryOptions& opts = {});
/// Dense T(k) = exp(bogoliubov_generator).
FockOperator bogoliubov(const CorrelationKernel& k, const BasisPtr& basis, const UnitaryOptions& opts = {});
FockOperator bogoliubov(const Dense& k, const BasisPtr& basis, const UnitaryOptions& opts = {});

/// Matrix-free actions exp(G) v by Lanczos; report the weight left in the top shell.
struct Action {
    FockVector state;
    double boundary_weight = 0.0;
};
Action apply_weyl(const Vec& g, const FockVector& v, const linalg::ExpmvOptions& opts = {});
Action apply_bogoliubov(const Dense& k, const FockVector& v, const linalg::ExpmvOptions& opts = {});

/// cosh(k) = sum (k conj(k))^n / (2n)!, sinh(k) = sum (k conj(k))^n k / (2n+1)!.
std::pair<Dense, Dense> cosh_sinh(const Dense& k);

/// Weight of v in the two highest shells sum n >= n_max - 1 (pair creation skips a shell).
double boundary_weight(const FockVector& v);
cd expectation(const FockVector& v, const Sparse& op);

// Grid-derived objects ------------------------------------------------------------------------

/// k0(x;y) = -N (1 - f(N(x-y))) phi(x) phi(y) projected on mode pairs.
CorrelationKernel build_correlation_kernel(const WaveField& phi, const scattering::ScatteringSolution& sol,
                                           const scattering::RadialPotential& v, double n, const ModeBasis& modes);

/// V_ijkl = \iint conj(xi_i(x) xi_j(y)) N^3 V(N(x-y)) xi_k(x) xi_l(y), index (((i*M+j)*M+k)*M+l).
std::vector<cd> interaction_tensor(const ModeBasis& modes, const scattering::RadialPotential& v, double n);
std::vector<cd> interaction_tensor(const ModeBasis& modes, std::span<const double> centred_kernel);

/// Kinetic one-body part plus (1/2N) sum V_ijkl a*_i a*_j a_l a_k.
FockOperator assemble_hamiltonian(const ModeBasis& modes, const scattering::RadialPotential& v, double n,
                                  const BasisPtr& basis);
FockOperator assemble_hamiltonian(const ModeBasis& modes, std::span<const cd> tensor, double n, const BasisPtr& basis);

/// One-body operator with matrix elements <xi_i, U xi_j>.
FockOperator trap_operator(const ModeBasis& modes, std::span<const double> trap, const BasisPtr& basis);

struct SqueezedCoherent {
    FockVector state;
    double truncation_loss = 0.0;  // boundary weight after each factor, summed
};

/// W(sqrt(N) phi) T(k) chi with phi given by its mode coefficients.
SqueezedCoherent squeezed_coherent(const Vec& phi_coeffs, const Dense& k, const FockVector& chi, double n,
                                   double loss_gate = 1e-4, const linalg::ExpmvOptions& opts = {});

/// gamma_ij = <psi, a*_j a_i psi> / <psi, N psi>.
Dense reduced_density(const FockVector& psi);

/// Sum of |eigenvalues| of gamma - |phi><phi|.
double trace_norm_distance(const Dense& gamma, const Vec& phi);

}  // namespace gplab::fock
