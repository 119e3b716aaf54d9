#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gplab/error.hpp"
#include "gplab/gp.hpp"
#include "gplab/grid.hpp"
#include "gplab/kernels.hpp"

using namespace gplab;
constexpr double kPi = std::numbers::pi;

namespace {

double max_abs_diff(const WaveField& a, const WaveField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

double grid_sum(const std::vector<double>& v, const PeriodicGrid& g) {
    double s = 0.0;
    for (double x : v) s += x;
    return s * g.cell_volume();
}

}  // namespace

TEST_CASE("grid geometry") {
    PeriodicGrid g(3, 8, 2.0);
    CHECK(g.size() == 512);
    CHECK(g.spacing() == doctest::Approx(0.25));
    CHECK(g.volume() == doctest::Approx(8.0));
    CHECK(g.coordinate(4) == doctest::Approx(0.0));
    CHECK(g.frequency(3) == 3);
    CHECK(g.frequency(4) == -4);
    CHECK(g.wavenumber(1) == doctest::Approx(kPi));
    for (std::size_t idx : {0ul, 17ul, 511ul}) CHECK(g.flatten(g.unflatten(idx)) == idx);
    CHECK_THROWS_AS(PeriodicGrid(4, 8, 1.0), ValidationError);
    CHECK_THROWS_AS(PeriodicGrid(1, 8, -1.0), ValidationError);
}

TEST_CASE("inner product and normalisation") {
    PeriodicGrid g(2, 16, 3.0);
    auto a = gp::plane_wave(g, {1, 0, 0});
    auto b = gp::plane_wave(g, {0, 2, 0});
    CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(inner(a, b)) < 1e-14);
    CHECK(std::abs(inner(a, a) - 1.0) < 1e-14);
}

TEST_CASE("FFT round trip and periodic convolution against a direct sum") {
    PeriodicGrid g(1, 32, 5.0);
    auto f = gp::gaussian_packet(g, 0.6, {2.0, 0, 0});
    auto copy = f.values;
    const auto& fft = fft_for(g);
    fft.forward(copy);
    fft.backward(copy);
    for (std::size_t i = 0; i < copy.size(); ++i) CHECK(std::abs(copy[i] / 32.0 - f.values[i]) < 1e-14);

    std::vector<double> kernel(32);
    for (int j = 0; j < 32; ++j) kernel[j] = std::exp(-std::pow(g.coordinate(j), 2)) + 0.1 * (j % 3);
    auto conv = periodic_convolve(g, kernel, f.values);
    for (int i = 0; i < 32; ++i) {
        cd direct = 0.0;
        for (int j = 0; j < 32; ++j) direct += kernel[((i - j + 16) % 32 + 32) % 32] * f.values[j] * g.spacing();
        CHECK(std::abs(conv[i] - direct) < 1e-13);
    }
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    auto [x, w] = kernels::gauss_legendre(6);
    for (int p = 0; p <= 11; ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], p);
        CHECK(s == doctest::Approx(p % 2 ? 0.0 : 2.0 / (p + 1)).epsilon(1e-13));
    }
}

TEST_CASE("deposited kernels carry the exact radial mass") {
    PeriodicGrid g(3, 32, 2.0 * kPi);
    auto ball = kernels::cell_average_compact(g, [](double) { return 1.0; }, 0.7, {});
    CHECK(grid_sum(ball, g) == doctest::Approx(4.0 * kPi * std::pow(0.7, 3) / 3.0).epsilon(1e-12));

    auto v = scattering::RadialPotential::soft_ball(0.5, 1.0);
    auto sol = scattering::solve_zero_energy(v);
    for (double n : {1.0, 4.0, 32.0}) {
        CHECK(grid_sum(kernels::scaled_potential(g, v, n), g) == doctest::Approx(v.integral()).epsilon(1e-9));
        CHECK(grid_sum(kernels::scaled_scattering_kernel(g, sol, v, n), g) ==
              doctest::Approx(8.0 * kPi * sol.a0).epsilon(1e-6));
    }
}

TEST_CASE("pair correlation has the Coulomb tail a0 / |x|") {
    PeriodicGrid g(3, 32, 2.0 * kPi);
    auto v = scattering::RadialPotential::soft_ball(2.0, 1.0);
    auto sol = scattering::solve_zero_energy(v);
    auto w = kernels::pair_correlation(g, sol, v, 8.0);
    // Sample five cells along x from the centre; 1/|x| is nearly linear over a cell there.
    const std::size_t idx = g.flatten({16 + 5, 16, 16});
    const double r = 5.0 * g.spacing();
    CHECK(w[idx] == doctest::Approx(sol.a0 / r).epsilon(0.01));
}

TEST_CASE("GP energies of simple states") {
    PeriodicGrid g(3, 16, 2.0 * kPi);
    const double a0 = 0.3;
    gp::GPParams p(a0);
    CHECK(gp::gp_energy(gp::constant_field(g), p) == doctest::Approx(4.0 * kPi * a0 / g.volume()).epsilon(1e-13));
    // |k|^2 with k = 2 pi m / L = m for L = 2 pi.
    auto pw = gp::plane_wave(g, {1, 2, 0});
    CHECK(gp::gp_energy(pw, p) == doctest::Approx(5.0 + 4.0 * kPi * a0 / g.volume()).epsilon(1e-12));
    CHECK(gp::sobolev_norm(pw, 2) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("plane waves evolve by a pure phase") {
    PeriodicGrid g(1, 64, 2.0 * kPi);
    const double a0 = 0.2;
    auto pw = gp::plane_wave(g, {3, 0, 0});
    const double t = 0.37;
    auto res = gp::evolve_gp(pw, gp::GPParams(a0), t, 1e-3);
    const double omega = 9.0 + 8.0 * kPi * a0 / g.volume();
    WaveField exact(g);
    for (std::size_t i = 0; i < exact.values.size(); ++i) exact.values[i] = pw.values[i] * std::polar(1.0, -omega * t);
    CHECK(max_abs_diff(res.field, exact) < 1e-10);
    CHECK(res.max_norm_drift < 1e-12);
}

TEST_CASE("free Gaussian spreads as the analytic solution") {
    PeriodicGrid g(1, 512, 60.0);
    const double w = 1.0, t = 1.5;
    auto phi0 = gp::gaussian_packet(g, w);
    auto res = gp::evolve_gp(phi0, gp::GPParams(0.0), t, 1e-2);
    // i d_t phi = -phi'' maps exp(-x^2 / (2 s)) to exp(-x^2 / (2 (s + 2 i t))) sqrt(s / (s + 2 i t)).
    WaveField exact(g);
    const cd s0 = w * w, st = s0 + cd(0.0, 2.0 * t);
    for (std::size_t i = 0; i < exact.values.size(); ++i) {
        const double x = g.position(i)[0];
        exact.values[i] = std::sqrt(s0 / st) * std::exp(-x * x / (2.0 * st));
    }
    const double scale = 1.0 / std::sqrt(std::sqrt(kPi) * w);
    for (auto& v : exact.values) v *= scale;
    CHECK(max_abs_diff(res.field, exact) < 1e-6);
}

TEST_CASE("energy drift of the Strang scheme is second order") {
    PeriodicGrid g(1, 256, 20.0);
    auto phi0 = gp::gaussian_packet(g, 1.0, {1.0, 0, 0});
    gp::GPParams p(0.5);
    gp::EvolveOptions opts;
    opts.record_every = 1;
    auto coarse = gp::evolve_gp(phi0, p, 1.0, 4e-3, opts);
    auto fine = gp::evolve_gp(phi0, p, 1.0, 2e-3, opts);
    const double ratio = coarse.max_energy_drift / fine.max_energy_drift;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
    CHECK(fine.max_norm_drift < 1e-12);
}

TEST_CASE("harmonic ground state in one dimension") {
    PeriodicGrid g(1, 256, 20.0);
    gp::GPParams p(0.0, gp::harmonic_trap(g, 1.0));
    gp::GroundStateOptions opts;
    opts.dtau = 1e-3;
    opts.tol = 1e-13;
    auto res = gp::gp_ground_state(p, g, opts);
    // -d^2/dx^2 + x^2 has lowest eigenvalue 1.
    CHECK(res.energy == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(res.monotone);
    CHECK(res.history_iterations.back() == res.iterations);

    gp::GPParams q(0.05, gp::harmonic_trap(g, 1.0));
    auto inter = gp::gp_ground_state(q, g, opts);
    CHECK(inter.energy > res.energy);
    CHECK(inter.energy <= gp::gp_energy(gp::constant_field(g), q));
}

TEST_CASE("field distance") {
    PeriodicGrid g(1, 32, 4.0);
    auto a = gp::plane_wave(g, {1, 0, 0});
    auto b = gp::plane_wave(g, {2, 0, 0});
    WaveField neg(g);
    for (std::size_t i = 0; i < a.values.size(); ++i) neg.values[i] = -a.values[i];
    CHECK(gp::field_distance(a, a) == 0.0);
    CHECK(gp::field_distance(a, neg) == doctest::Approx(2.0));
    CHECK(gp::field_distance(a, b) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(gp::field_distance(a, gp::plane_wave(PeriodicGrid(1, 16, 4.0), {1, 0, 0})), ValidationError);
}

TEST_CASE("convolution kernel normalisation and the constant-field identity") {
    PeriodicGrid g(3, 32, 2.0 * kPi);
    auto v = scattering::RadialPotential::soft_ball(0.5, 1.0);
    auto sol = scattering::solve_zero_energy(v);
    const double target = 8.0 * kPi * sol.a0;
    gp::GPParams p(sol.a0);
    auto c = gp::constant_field(g);
    for (double n : {4.0, 8.0, 16.0, 32.0}) {
        auto k = gp::build_convolution_kernel(g, sol, v, n);
        CHECK(std::abs(k.integral - target) / target < 0.01);
        CHECK(gp::modified_gp_energy(c, k) == doctest::Approx(gp::gp_energy(c, p)).epsilon(1e-6));
    }
    auto u = gp::uniform_kernel(g, target);
    auto res_mod = gp::evolve_modified_gp(c, u, 0.2, 1e-3);
    auto res_gp = gp::evolve_gp(c, p, 0.2, 1e-3);
    CHECK(gp::field_distance(res_mod.field, res_gp.field) < 1e-12);
}

TEST_CASE("modified GP approaches GP as N grows on a resolved box") {
    PeriodicGrid g(3, 32, 1.5);
    auto v = scattering::RadialPotential::soft_ball(0.5, 1.0);
    auto sol = scattering::solve_zero_energy(v);
    auto phi0 = gp::gaussian_packet(g, 0.25);
    auto ref = gp::evolve_gp(phi0, gp::GPParams(sol.a0), 0.05, 1e-3);
    double prev = INFINITY;
    for (double n : {4.0, 8.0, 16.0}) {
        auto k = gp::build_convolution_kernel(g, sol, v, n);
        const double d = gp::field_distance(gp::evolve_modified_gp(phi0, k, 0.05, 1e-3).field, ref.field);
        CHECK(d < prev);
        prev = d;
    }
}
