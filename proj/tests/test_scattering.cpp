#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "gplab/error.hpp"
#include "gplab/scattering.hpp"

using namespace gplab;
using scattering::RadialPotential;

namespace {

// u'' = V0/2 u inside the ball, matched to r - a0 outside.
double soft_ball_a0(double v0, double r) {
    const double kappa = std::sqrt(v0 / 2.0);
    return r - std::tanh(kappa * r) / kappa;
}

// Independent shooting oracle: classical RK4 on (u, u') with the exact Gaussian, 200k steps.
double gaussian_a0_oracle(double v0, double sigma) {
    auto v = [&](double r) { return v0 * std::exp(-r * r / (2 * sigma * sigma)); };
    const double r_max = 12.0 * sigma;
    const int steps = 200000;
    const double h = r_max / steps;
    double u = 0.0, du = 1.0, r = 0.0;
    auto rhs = [&](double rr, double uu) { return 0.5 * v(rr) * uu; };
    for (int i = 0; i < steps; ++i) {
        double k1u = du, k1d = rhs(r, u);
        double k2u = du + 0.5 * h * k1d, k2d = rhs(r + 0.5 * h, u + 0.5 * h * k1u);
        double k3u = du + 0.5 * h * k2d, k3d = rhs(r + 0.5 * h, u + 0.5 * h * k2u);
        double k4u = du + h * k3d, k4d = rhs(r + h, u + h * k3u);
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
        du += h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d);
        r += h;
    }
    return r - u / du;
}

}  // namespace

TEST_CASE("soft ball scattering length matches the closed form") {
    for (auto [v0, radius] : {std::pair{2.0, 1.0}, {0.5, 1.0}, {10.0, 0.5}, {1.0, 2.0}}) {
        auto sol = scattering::solve_zero_energy(RadialPotential::soft_ball(v0, radius));
        CHECK(sol.a0 == doctest::Approx(soft_ball_a0(v0, radius)).epsilon(1e-8));
        CHECK(std::abs(sol.a0 - sol.a0_integral) <= 1e-5 * sol.a0);
    }
}

TEST_CASE("soft ball V0=2 R=1 gives 1 - tanh(1)") {
    auto sol = scattering::solve_zero_energy(RadialPotential::from_spec("soft_ball:2,1"));
    CHECK(std::abs(sol.a0 - (1.0 - std::tanh(1.0))) < 1e-9);
}

TEST_CASE("gaussian potential against an independent shooting solution") {
    auto sol = scattering::solve_zero_energy(RadialPotential::gaussian(3.0, 0.7));
    CHECK(sol.a0 == doctest::Approx(gaussian_a0_oracle(3.0, 0.7)).epsilon(1e-4));
}

TEST_CASE("weak coupling approaches the first Born term") {
    for (double v0 : {1e-3, 1e-2}) {
        auto v = RadialPotential::soft_ball(v0, 1.0);
        auto sol = scattering::solve_zero_energy(v);
        const double born = v.integral() / (8.0 * std::numbers::pi);
        CHECK(born == doctest::Approx(v0 / 6.0).epsilon(1e-12));
        CHECK(std::abs(sol.a0 - born) / born < 0.01);
    }
}

TEST_CASE("scattering length never exceeds the Born bound") {
    for (const char* spec : {"soft_ball:0.5,1", "soft_ball:2,1", "soft_ball:50,0.3", "gaussian:4,1", "gaussian:0.1,2"}) {
        auto v = RadialPotential::from_spec(spec);
        auto sol = scattering::solve_zero_energy(v);
        CHECK(sol.a0 > 0.0);
        CHECK(sol.a0 <= v.integral() / (8.0 * std::numbers::pi));
    }
}

TEST_CASE("rescaled potential scales the scattering length") {
    auto v = RadialPotential::soft_ball(2.0, 1.0);
    const double a = scattering::solve_zero_energy(v).a0;
    for (double lambda : {2.0, 4.0}) {
        auto sol = scattering::solve_zero_energy(v.scaled(lambda));
        CHECK(sol.a0 == doctest::Approx(a / lambda).epsilon(1e-7));
    }
}

TEST_CASE("profile is monotone, bounded and follows the tail") {
    auto sol = scattering::solve_zero_energy(RadialPotential::soft_ball(2.0, 1.0));
    double prev = -1.0;
    for (double r = 0.0; r < 30.0; r += 0.05) {
        const double f = sol.f(r);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        CHECK(f >= prev - 1e-14);
        prev = f;
    }
    for (double r : {2.0, 5.0, 40.0}) CHECK(sol.f(r) == doctest::Approx(1.0 - sol.a0 / r).epsilon(1e-9));
    // Inside the ball f = sinh(r) / (r cosh(1)) with the normalisation fixed by the tail.
    for (double r : {0.25, 0.5, 0.9})
        CHECK(sol.f(r) == doctest::Approx(std::sinh(r) / (r * std::cosh(1.0))).epsilon(1e-7));
}

TEST_CASE("refining the radial grid leaves a0 stable") {
    auto v = RadialPotential::gaussian(2.0, 1.0);
    auto solve = [&](int steps) {
        scattering::SolveOptions opts;
        opts.steps = steps;
        opts.consistency_tol = 1e-3;
        return scattering::solve_zero_energy(v, opts).a0;
    };
    const double fine = solve(128000);
    for (int steps : {1001, 2000, 8000, 32000}) CHECK(std::abs(solve(steps) - fine) < 1e-9);
    CHECK(fine == doctest::Approx(gaussian_a0_oracle(2.0, 1.0)).epsilon(1e-4));
}

TEST_CASE("zero potential has zero scattering length") {
    auto sol = scattering::solve_zero_energy(RadialPotential::zero());
    CHECK(std::abs(sol.a0) < 1e-12);
    CHECK(sol.f(3.0) == doctest::Approx(1.0));
}

TEST_CASE("CSV potentials") {
    const auto dir = std::filesystem::temp_directory_path() / "gplab_test_scattering";
    std::filesystem::create_directories(dir);
    auto ref = RadialPotential::gaussian(3.0, 0.7);
    {
        std::ofstream out(dir / "gauss.csv");
        out << "r,v\n";
        out.precision(17);
        for (std::size_t i = 0; i < ref.r_samples().size(); ++i)
            out << ref.r_samples()[i] << "," << ref.v_samples()[i] << "\n";
    }
    auto from_file = RadialPotential::from_spec("csv:" + (dir / "gauss.csv").string());
    CHECK(scattering::solve_zero_energy(from_file).a0 ==
          doctest::Approx(scattering::solve_zero_energy(ref).a0).epsilon(1e-13));

    {
        std::ofstream out(dir / "bad_header.csv");
        out << "radius,value\n0,1\n1,0\n";
    }
    CHECK_THROWS_AS(RadialPotential::from_csv((dir / "bad_header.csv").string()), ValidationError);
    {
        std::ofstream out(dir / "decreasing.csv");
        out << "r,v\n0,1\n1,0.5\n0.5,0\n";
    }
    CHECK_THROWS_AS(RadialPotential::from_csv((dir / "decreasing.csv").string()), ValidationError);
    {
        std::ofstream out(dir / "attractive.csv");
        out << "r,v\n0,-1\n1,0\n";
    }
    CHECK_THROWS_AS(RadialPotential::from_csv((dir / "attractive.csv").string()), ValidationError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed potential specs are rejected") {
    CHECK_THROWS_AS(RadialPotential::from_spec("soft_ball:2"), ValidationError);
    CHECK_THROWS_AS(RadialPotential::from_spec("hard_core:1,1"), ValidationError);
    CHECK_THROWS_AS(RadialPotential::from_spec("soft_ball:2,x"), ValidationError);
    CHECK_THROWS_AS(RadialPotential::from_spec("soft_ball:-1,1"), ValidationError);
}
