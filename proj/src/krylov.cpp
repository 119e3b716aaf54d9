#include "gplab/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gplab/error.hpp"

namespace gplab::linalg {

double norm_bound(const SparseH& h) {
    double best = 0.0;
    for (int r = 0; r < h.outerSize(); ++r) {
        double s = 0.0;
        for (SparseH::InnerIterator it(h, r); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

ExpmvStats expmv_hermitian(const std::function<void(const Vec&, Vec&)>& apply_h, double h_norm, Vec& v, double t,
                           const ExpmvOptions& opts) {
    ExpmvStats stats;
    if (t == 0.0) return stats;
    const double beta0 = v.norm();
    if (beta0 == 0.0) return stats;
    const int m_max = std::max(2, opts.krylov_dim);
    const double sign = t > 0 ? 1.0 : -1.0;
    double remaining = std::abs(t);
    const double total = remaining;

    std::vector<Vec> basis;
    basis.reserve(m_max + 1);
    Vec w(v.size());

    while (remaining > 0.0) {
        const double beta = v.norm();
        basis.clear();
        basis.push_back(v / beta);
        std::vector<double> alpha, offd;
        bool happy = false;
        for (int j = 0; j < m_max; ++j) {
            apply_h(basis[j], w);
            ++stats.matvecs;
            // Three-term recurrence; full reorthogonalisation on request.
            const int first = opts.full_reorthogonalization ? 0 : std::max(0, j - 1);
            for (int pass = 0; pass < 2; ++pass)
                for (int i = first; i <= j; ++i) {
                    cd c = basis[i].dot(w);
                    if (pass == 0 && i == j) alpha.push_back(c.real());
                    w -= c * basis[i];
                }
            double b = w.norm();
            if (!std::isfinite(b)) throw NumericalError("Lanczos: non-finite vector (Krylov breakdown)");
            if (b <= 1e-13 * std::max(1.0, h_norm)) {
                happy = true;
                break;
            }
            offd.push_back(b);
            basis.push_back(w / b);
        }
        const int m = static_cast<int>(alpha.size());
        Eigen::MatrixXd tm = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) tm(i, i) = alpha[i];
        for (int i = 0; i + 1 < m; ++i) tm(i, i + 1) = tm(i + 1, i) = offd[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tm);
        const auto& lam = es.eigenvalues();
        const auto& q = es.eigenvectors();

        auto small_exp = [&](double tau) {
            Eigen::VectorXcd y(m);
            for (int i = 0; i < m; ++i) {
                cd acc = 0.0;
                for (int k = 0; k < m; ++k) acc += q(i, k) * std::polar(1.0, -sign * tau * lam(k)) * q(0, k);
                y(i) = acc;
            }
            return y;
        };

        double tau = remaining;
        Eigen::VectorXcd y;
        double err = 0.0;
        if (happy) {
            y = small_exp(tau);
        } else {
            const double beta_m = offd.back();
            // The estimate cannot drop below the rounding level of the small exponential.
            const double floor = 64.0 * std::numeric_limits<double>::epsilon() * beta;
            auto budget = [&](double tau_) { return std::max(opts.tol * tau_ / total, floor); };
            for (int tries = 0;; ++tries) {
                y = small_exp(tau);
                err = beta * beta_m * std::abs(y(m - 1));
                if (err <= budget(tau) || tries > 60) break;
                tau *= 0.5;
            }
            if (err > budget(tau)) throw NumericalError("Lanczos: step control failed");
        }
        v.setZero();
        for (int i = 0; i < m; ++i) v += (beta * y(i)) * basis[i];
        stats.error_estimate += err;
        ++stats.substeps;
        remaining -= tau;
        if (remaining < 1e-15 * total) remaining = 0.0;
    }
    return stats;
}

ExpmvStats expmv_hermitian(const SparseH& h, Vec& v, double t, const ExpmvOptions& opts) {
    return expmv_hermitian([&h](const Vec& x, Vec& y) { y.noalias() = h * x; }, norm_bound(h), v, t, opts);
}

}  // namespace gplab::linalg
