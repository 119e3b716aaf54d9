#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <functional>

namespace gplab::linalg {

using cd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using SparseH = Eigen::SparseMatrix<cd, Eigen::RowMajor>;

struct ExpmvOptions {
    int krylov_dim = 30;
    double tol = 1e-12;  // accumulated a-posteriori error bound over the whole interval
    bool full_reorthogonalization = false;
};

struct ExpmvStats {
    int substeps = 0;
    int matvecs = 0;
    double error_estimate = 0.0;
};

/// Upper bound on the spectral norm of a Hermitian matrix (max absolute row sum).
double norm_bound(const SparseH& h);

/// v <- exp(-i t H) v for Hermitian H given as a matrix-vector product, by Lanczos with
/// adaptive substeps. Throws NumericalError on breakdown with non-finite data.
ExpmvStats expmv_hermitian(const std::function<void(const Vec&, Vec&)>& apply_h, double h_norm, Vec& v, double t,
                           const ExpmvOptions& opts = {});

ExpmvStats expmv_hermitian(const SparseH& h, Vec& v, double t, const ExpmvOptions& opts = {});

}  // namespace gplab::linalg
