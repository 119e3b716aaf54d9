#include "gplab/fock_checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gplab/error.hpp"
#include "gplab/kernels.hpp"

namespace gplab::fock {

namespace {

constexpr double kBoundaryFraction = 1e-3;
constexpr int kPadStep = 4;

constexpr int kPadLimit = 240;

// Columns U|s> for every basis state s with total <= low_cutoff, and the largest top-shell weight.
template <class Apply>
std::pair<Dense, double> transformed_columns(const BasisPtr& work, int low_cutoff, Apply apply) {
    const auto low = static_cast<Eigen::Index>(work->shell_end(low_cutoff));
    Dense x(static_cast<Eigen::Index>(work->size()), low);
    double boundary = 0.0;
    for (Eigen::Index s = 0; s < low; ++s) {
        Vec e = Vec::Zero(x.rows());
        e(s) = 1.0;
        Action a = apply(FockVector(work, std::move(e)));
        x.col(s) = a.state.amplitudes;
        boundary = std::max(boundary, a.boundary_weight);
    }
    return {x, boundary};
}

// max over i of |<U r, L_i U s> - <r, R_i s>| for r, s in the low subspace.
double conjugation_deviation(const Dense& x, const std::vector<Sparse>& conjugated, const std::vector<Sparse>& predicted) {
    const auto low = x.cols();
    Dense eye = Dense::Identity(x.rows(), low);
    double dev = 0.0;
    for (std::size_t i = 0; i < conjugated.size(); ++i) {
        Dense lhs = x.adjoint() * (conjugated[i] * x);
        Dense rhs = (predicted[i] * eye).topRows(low);
        dev = std::max(dev, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return dev;
}

// Evaluates run(n) at the stated cutoff (reported as informational) and then in growing working
// cutoffs until the top-shell weight is far below the tolerance.
template <class Run>
CheckResult padded(const std::string& name, int n_max, double tol, Run run) {
    CheckResult out{name, 0.0, tol, false, -1.0, n_max};
    out.same_cutoff_deviation = run(n_max).first;
    const double target = kBoundaryFraction * tol;
    int n_prev = 0;
    double w_prev = 0.0;
    int n_work = n_max + kPadStep;
    for (;;) {
        auto [dev, w] = run(n_work);
        out.max_deviation = dev;
        out.working_cutoff = n_work;
        if (w < target || n_work >= n_max + kPadLimit) break;
        // The top-shell weight decays geometrically in the cutoff; extrapolate to the target.
        int next = n_work + kPadStep;
        if (n_prev > 0 && w > 0.0 && w_prev > w) {
            const double rate = std::log(w_prev / w) / (n_work - n_prev);
            next = std::max(next, n_work + static_cast<int>(std::ceil(1.2 * std::log(w / target) / rate)));
        }
        n_prev = n_work;
        w_prev = w;
        n_work = std::min({next, n_work * 3 / 2, n_max + kPadLimit});
    }
    out.pass = out.max_deviation < tol;
    return out;
}

}  // namespace

CheckResult ccr_check(int modes, int n_max, double tol) {
    require(n_max >= 3, "CCR check needs n_max >= 3");
    auto basis = std::make_shared<const FockBasis>(modes, n_max);
    const auto low = static_cast<Eigen::Index>(basis->shell_end(n_max - 1));
    std::vector<Sparse> a;
    for (int i = 0; i < modes; ++i) a.push_back(annihilator(*basis, i));
    double dev = 0.0;
    for (int i = 0; i < modes; ++i)
        for (int j = 0; j < modes; ++j) {
            Sparse adj = a[j].adjoint();
            Dense c = Dense(a[i] * adj) - Dense(adj * a[i]);
            if (i == j) c -= Dense::Identity(c.rows(), c.cols());
            dev = std::max(dev, c.topLeftCorner(low, low).cwiseAbs().maxCoeff());
        }
    return {"ccr", dev, tol, dev <= tol, -1.0, n_max};
}

CheckResult weyl_shift_check(const Vec& g, int n_max, double tol) {
    const int modes = static_cast<int>(g.size());
    require(modes >= 1, "Weyl check needs at least one mode");
    require(g.squaredNorm() <= n_max / 4.0 + 1e-12, "Weyl check: ||g||^2 exceeds n_max / 4");
    const linalg::ExpmvOptions opts{30, 1e-11};
    auto run = [&](int n_work) {
        auto work = std::make_shared<const FockBasis>(modes, n_work);
        auto [x, w] = transformed_columns(work, n_max / 2, [&](const FockVector& e) { return apply_weyl(g, e, opts); });
        std::vector<Sparse> a, shifted;
        Sparse one(static_cast<Eigen::Index>(work->size()), static_cast<Eigen::Index>(work->size()));
        one.setIdentity();
        for (int i = 0; i < modes; ++i) {
            a.push_back(annihilator(*work, i));
            shifted.push_back(a.back() + g(i) * one);
        }
        return std::pair{conjugation_deviation(x, a, shifted), w};
    };
    return padded("weyl_shift", n_max, tol, run);
}

CheckResult bogoliubov_action_check(const Dense& k, int n_max, double tol) {
    const int modes = static_cast<int>(k.rows());
    require(k.rows() == k.cols() && modes >= 1, "Bogoliubov check needs a square kernel");
    auto [c, s] = cosh_sinh(k);
    const linalg::ExpmvOptions opts{30, 1e-11};
    auto run = [&](int n_work) {
        auto work = std::make_shared<const FockBasis>(modes, n_work);
        auto [x, w] =
            transformed_columns(work, n_max / 2, [&](const FockVector& e) { return apply_bogoliubov(k, e, opts); });
        std::vector<Sparse> a, ad, mixed;
        for (int i = 0; i < modes; ++i) {
            a.push_back(annihilator(*work, i));
            ad.push_back(a.back().adjoint());
        }
        for (int i = 0; i < modes; ++i) {
            Sparse r(ad[0].rows(), ad[0].cols());
            for (int j = 0; j < modes; ++j) r += c(j, i) * ad[j] + std::conj(s(j, i)) * a[j];
            mixed.push_back(r);
        }
        return std::pair{conjugation_deviation(x, ad, mixed), w};
    };
    return padded("bogoliubov_action", n_max, tol, run);
}

CheckResult squeeze_check(double r, int n_max, double tol) {
    require(n_max >= 2, "squeeze check needs n_max >= 2");
    const linalg::ExpmvOptions opts{30, 1e-13};
    Dense k(1, 1);
    k(0, 0) = r;
    const double expected = std::pow(std::sinh(r), 2);
    auto run = [&](int n_work) {
        auto work = std::make_shared<const FockBasis>(1, n_work);
        auto a = apply_bogoliubov(k, FockVector::vacuum(work), opts);
        const double n = expectation(a.state, number_matrix(*work)).real();
        return std::pair{std::abs(n - expected), a.boundary_weight};
    };
    return padded("single_mode_squeeze", n_max, tol, run);
}

CheckResult symplectic_check(const Dense& k, double tol) {
    auto [c, s] = cosh_sinh(k);
    Dense d = c * c.adjoint() - s * s.adjoint() - Dense::Identity(k.rows(), k.cols());
    double dev = d.cwiseAbs().maxCoeff();
    return {"symplectic", dev, tol, dev < tol, -1.0, 0};
}

CheckResult sector_check(const ModeBasis& modes, const scattering::RadialPotential& v, double n, double tol) {
    const int m = modes.size();
    const auto& grid = modes.grid;
    require(grid.dim == 3, "sector check needs a 3D grid");
    auto basis = std::make_shared<const FockBasis>(m, 2);
    Dense h = assemble_hamiltonian(modes, v, n, basis).to_dense();

    // One-body part: plane waves are exact eigenfunctions of the Laplacian.
    const double q = 2.0 * std::numbers::pi / grid.box_length;
    std::vector<double> kin(m);
    for (int i = 0; i < m; ++i) {
        const auto& p = modes.momenta[i];
        kin[i] = q * q * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    }

    // Two-body integrals by a direct sum over the nonzero kernel offsets.
    auto kernel = kernels::scaled_potential(grid, v, n);
    const double dv = grid.cell_volume();
    const int c = grid.points / 2;
    std::vector<std::pair<std::array<int, 3>, double>> offsets;
    for (std::size_t idx = 0; idx < kernel.size(); ++idx)
        if (kernel[idx] != 0.0) {
            auto ijk = grid.unflatten(idx);
            offsets.push_back({{ijk[0] - c, ijk[1] - c, ijk[2] - c}, kernel[idx]});
        }
    std::vector<cd> tensor(static_cast<std::size_t>(m) * m * m * m);
    std::vector<cd> hjl(grid.size());
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) {
            for (std::size_t x = 0; x < grid.size(); ++x) {
                auto ijk = grid.unflatten(x);
                cd acc = 0.0;
                for (const auto& [d, w] : offsets) {
                    auto y = grid.flatten({ijk[0] - d[0], ijk[1] - d[1], ijk[2] - d[2]});
                    acc += w * std::conj(modes.fields[j].values[y]) * modes.fields[l].values[y];
                }
                hjl[x] = acc * dv;
            }
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < m; ++k) {
                    cd s = 0.0;
                    for (std::size_t x = 0; x < grid.size(); ++x)
                        s += std::conj(modes.fields[i].values[x]) * modes.fields[k].values[x] * hjl[x];
                    tensor[((static_cast<std::size_t>(i) * m + j) * m + k) * m + l] = s * dv;
                }
        }
    auto vt = [&](int a, int b, int cc, int d) { return tensor[((static_cast<std::size_t>(a) * m + b) * m + cc) * m + d]; };
    auto two_body = [&](int a, int b, int cc, int d) {
        cd r = vt(a, b, cc, d) / n;
        if (a == cc && b == d) r += kin[a] + kin[b];
        return r;
    };

    double dev = 0.0;
    // One-particle sector.
    std::vector<int> occ(m, 0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            std::fill(occ.begin(), occ.end(), 0);
            occ[i] = 1;
            auto ri = *basis->index(std::span<const int>(occ));
            std::fill(occ.begin(), occ.end(), 0);
            occ[j] = 1;
            auto rj = *basis->index(std::span<const int>(occ));
            cd expect = i == j ? cd(kin[i]) : cd(0.0);
            dev = std::max(dev, std::abs(h(ri, rj) - expect));
        }
    // Two-particle sector in the symmetrised product basis.
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) pairs.push_back({i, j});
    auto fock_index = [&](std::pair<int, int> p) {
        std::fill(occ.begin(), occ.end(), 0);
        occ[p.first] += 1;
        occ[p.second] += 1;
        return *basis->index(std::span<const int>(occ));
    };
    for (auto p : pairs)
        for (auto r : pairs) {
            const double np = p.first == p.second ? 2.0 : std::sqrt(2.0);
            const double nr = r.first == r.second ? 2.0 : std::sqrt(2.0);
            cd e = 0.0;
            for (auto [a, b] : {p, std::pair{p.second, p.first}})
                for (auto [cc, d] : {r, std::pair{r.second, r.first}}) e += two_body(a, b, cc, d);
            e /= np * nr;
            dev = std::max(dev, std::abs(h(fock_index(p), fock_index(r)) - e));
        }
    return {"sector_restriction", dev, tol, dev < tol, -1.0, 2};
}

Vec default_shift(int modes, double norm_sq) {
    Vec g(modes);
    for (int i = 0; i < modes; ++i) g(i) = std::polar(1.0 + 0.5 * i, 0.7 * (i + 1));
    return g * std::sqrt(norm_sq) / g.norm();
}

Dense default_kernel(int modes, double hs_norm) {
    Dense k(modes, modes);
    for (int i = 0; i < modes; ++i)
        for (int j = 0; j < modes; ++j) k(i, j) = std::polar(0.3 + 0.2 * (i + j), 0.4 * (i + j) + 0.3 * i * j);
    return k * (hs_norm / k.norm());
}

}  // namespace gplab::fock
