#include "gplab/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gplab/error.hpp"

namespace gplab::kernels {

namespace {

constexpr double kPi = std::numbers::pi;

void require_3d(const PeriodicGrid& grid) {
    require(grid.dim == 3, "scaled interaction kernels are defined on 3D grids only");
}

std::vector<double> scaled_breaks(const scattering::RadialPotential& v, double n) {
    std::vector<double> out;
    for (double r : v.r_samples())
        if (r > 0.0 && r <= v.support()) out.push_back(r / n);
    return out;
}

// Integral of g(r) r^2 over the ray from the origin to the cube face, summed over directions:
// \int_cube g(|x|) d^3x for the cube of side h centred at the origin.
double origin_cube_integral(double h, const std::function<double(double)>& radial_antiderivative) {
    const int nt = 96, np = 192;
    auto [ct, wt] = gauss_legendre(nt);
    double total = 0.0;
    for (int i = 0; i < nt; ++i) {
        double c = ct[i], s = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (int j = 0; j < np; ++j) {
            double ph = 2.0 * kPi * (j + 0.5) / np;
            double m = std::max({std::abs(s * std::cos(ph)), std::abs(s * std::sin(ph)), std::abs(c)});
            total += wt[i] * (2.0 * kPi / np) * radial_antiderivative(0.5 * h / m);
        }
    }
    return total;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    require(n >= 1, "gauss_legendre: n >= 1");
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = k / std::sqrt(4.0 * k * k - 1.0);
        jac(k, k - 1) = jac(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        w[i] = 2.0 * v0 * v0;
    }
    return {x, w};
}

std::vector<double> cell_average_compact(const PeriodicGrid& grid, const std::function<double(double)>& g,
                                         double rho, std::vector<double> breaks) {
    require_3d(grid);
    std::vector<double> out(grid.size(), 0.0);
    if (!(rho > 0.0)) return out;
    const double dx = grid.spacing();
    require(rho < 0.5 * grid.box_length, "compact kernel support exceeds half the box");

    breaks.push_back(0.0);
    breaks.push_back(rho);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [rho](double b) { return b > rho; }), breaks.end());

    const int nt = std::max(24, static_cast<int>(std::ceil(8.0 * kPi * rho / dx)));
    const int np = 2 * nt;
    auto [ct, wt] = gauss_legendre(nt);
    const int half = grid.points / 2;

    for (std::size_t s = 1; s < breaks.size(); ++s) {
        double a = breaks[s - 1], b = breaks[s];
        if (b - a <= 0.0) continue;
        int nr = std::max(12, static_cast<int>(std::ceil(8.0 * (b - a) / dx)));
        nr = std::min(nr, 256);
        auto [xr, wr] = gauss_legendre(nr);
        for (int k = 0; k < nr; ++k) {
            double r = 0.5 * (a + b) + 0.5 * (b - a) * xr[k];
            double radial = 0.5 * (b - a) * wr[k] * r * r * g(r);
            if (radial == 0.0) continue;
            for (int i = 0; i < nt; ++i) {
                double c = ct[i], sn = std::sqrt(std::max(0.0, 1.0 - c * c));
                for (int j = 0; j < np; ++j) {
                    double ph = 2.0 * kPi * (j + 0.5) / np;
                    double p[3] = {r * sn * std::cos(ph), r * sn * std::sin(ph), r * c};
                    std::array<int, 3> ijk{};
                    for (int d = 0; d < 3; ++d) ijk[d] = static_cast<int>(std::lround(p[d] / dx)) + half;
                    out[grid.flatten(ijk)] += radial * wt[i] * (2.0 * kPi / np);
                }
            }
        }
    }
    const double inv = 1.0 / grid.cell_volume();
    for (auto& x : out) x *= inv;
    return out;
}

std::vector<double> cell_average_inverse_power(const PeriodicGrid& grid, int p) {
    require_3d(grid);
    require(p == 1 || p == 2, "inverse power must be 1 or 2");
    const double h = grid.spacing();
    const int half = grid.points / 2;
    std::vector<double> out(grid.size(), 0.0);
    auto [xg, wg] = gauss_legendre(6);
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        auto ijk = grid.unflatten(idx);
        int o[3];
        int cheb = 0;
        for (int d = 0; d < 3; ++d) {
            o[d] = ijk[d] - half;
            cheb = std::max(cheb, std::abs(o[d]));
        }
        if (cheb == 0) {
            // \int_0^rho r^{2-p} dr
            double v = origin_cube_integral(h, [p](double rr) { return p == 1 ? 0.5 * rr * rr : rr; });
            out[idx] = v / (h * h * h);
        } else if (cheb <= 3) {
            // Smooth on the cell: tensor Gauss-Legendre with 2x2x2 subcells.
            double acc = 0.0;
            for (int sx = 0; sx < 2; ++sx)
                for (int sy = 0; sy < 2; ++sy)
                    for (int sz = 0; sz < 2; ++sz)
                        for (int a = 0; a < 6; ++a)
                            for (int b = 0; b < 6; ++b)
                                for (int c = 0; c < 6; ++c) {
                                    double x = (o[0] - 0.5 + 0.5 * sx + 0.25 * (1 + xg[a])) * h;
                                    double y = (o[1] - 0.5 + 0.5 * sy + 0.25 * (1 + xg[b])) * h;
                                    double z = (o[2] - 0.5 + 0.5 * sz + 0.25 * (1 + xg[c])) * h;
                                    double r = std::sqrt(x * x + y * y + z * z);
                                    acc += wg[a] * wg[b] * wg[c] / std::pow(r, p);
                                }
            out[idx] = acc / 64.0;
        } else {
            double r = grid.wrapped_radius(idx);
            out[idx] = 1.0 / std::pow(r, p);
        }
    }
    return out;
}

std::vector<double> scaled_potential(const PeriodicGrid& grid, const scattering::RadialPotential& v, double n) {
    require_3d(grid);
    require(n >= 1.0, "N must be >= 1");
    const double n3 = n * n * n;
    return cell_average_compact(grid, [&](double r) { return n3 * v(n * r); }, v.support() / n, scaled_breaks(v, n));
}

std::vector<double> scaled_scattering_kernel(const PeriodicGrid& grid, const scattering::ScatteringSolution& sol,
                                             const scattering::RadialPotential& v, double n) {
    require_3d(grid);
    require(n >= 1.0, "N must be >= 1");
    const double n3 = n * n * n;
    return cell_average_compact(
        grid, [&](double r) { return n3 * sol.f(n * r) * v(n * r); }, v.support() / n, scaled_breaks(v, n));
}

std::vector<double> pair_correlation(const PeriodicGrid& grid, const scattering::ScatteringSolution& sol,
                                     const scattering::RadialPotential& v, double n) {
    require_3d(grid);
    require(n >= 1.0, "N must be >= 1");
    auto out = cell_average_inverse_power(grid, 1);
    for (auto& x : out) x *= sol.a0;
    if (v.support() > 0.0) {
        // Inside the scaled support the profile departs from a0 / r.
        auto core = cell_average_compact(
            grid, [&](double r) { return n * (1.0 - sol.f(n * r)) - sol.a0 / r; }, v.support() / n,
            scaled_breaks(v, n));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += core[i];
    }
    return out;
}

std::vector<double> pair_correlation_squared(const PeriodicGrid& grid, const scattering::ScatteringSolution& sol,
                                             const scattering::RadialPotential& v, double n) {
    require_3d(grid);
    require(n >= 1.0, "N must be >= 1");
    auto out = cell_average_inverse_power(grid, 2);
    for (auto& x : out) x *= sol.a0 * sol.a0;
    if (v.support() > 0.0) {
        auto core = cell_average_compact(
            grid,
            [&](double r) {
                double w = n * (1.0 - sol.f(n * r));
                return w * w - sol.a0 * sol.a0 / (r * r);
            },
            v.support() / n, scaled_breaks(v, n));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += core[i];
    }
    return out;
}

}  // namespace gplab::kernels
