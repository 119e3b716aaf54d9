#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/scattering.hpp"

namespace gplab::kernels {

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Cell-averaged samples of a radial function g supported on [0, rho] (3D, centred layout).
/// Mass is deposited from a spherical product quadrature, so the grid sum times the cell volume
/// equals the radial integral 4 pi \int g r^2 dr up to that 1D rule. `breaks` lists radii where
/// g may jump.
std::vector<double> cell_average_compact(const PeriodicGrid& grid, const std::function<double(double)>& g,
                                         double rho, std::vector<double> breaks);

/// Cell averages of |x|^-p for p in {1, 2} with minimum-image distance (3D, centred layout).
std::vector<double> cell_average_inverse_power(const PeriodicGrid& grid, int p);

/// N^3 V(N |x|).
std::vector<double> scaled_potential(const PeriodicGrid& grid, const scattering::RadialPotential& v, double n);

/// N^3 f(N |x|) V(N |x|).
std::vector<double> scaled_scattering_kernel(const PeriodicGrid& grid, const scattering::ScatteringSolution& sol,
                                             const scattering::RadialPotential& v, double n);

/// N (1 - f(N |x|)), wrapped periodically. Equals a0 / |x| outside the scaled support.
std::vector<double> pair_correlation(const PeriodicGrid& grid, const scattering::ScatteringSolution& sol,
                                     const scattering::RadialPotential& v, double n);

/// N^2 (1 - f(N |x|))^2, wrapped periodically.
std::vector<double> pair_correlation_squared(const PeriodicGrid& grid, const scattering::ScatteringSolution& sol,
                                             const scattering::RadialPotential& v, double n);

}  // namespace gplab::kernels
