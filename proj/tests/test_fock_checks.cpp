#include <doctest.h>

#include <numbers>

#include "gplab/error.hpp"
#include "gplab/fock_checks.hpp"

using namespace gplab;
using namespace gplab::fock;

TEST_CASE("identity suite passes on small spaces") {
    for (auto [m, n_max] : {std::pair{1, 6}, {2, 8}, {3, 6}}) {
        CAPTURE(m);
        CAPTURE(n_max);
        auto ccr = ccr_check(m, n_max);
        CHECK(ccr.pass);
        CHECK(ccr.max_deviation < 1e-12);
        auto w = weyl_shift_check(default_shift(m, std::min(3.0, n_max / 4.0)), n_max);
        CHECK(w.pass);
        CHECK(w.working_cutoff >= n_max);
        auto b = bogoliubov_action_check(default_kernel(m, 1.0), n_max);
        CHECK(b.pass);
        CHECK(b.working_cutoff >= n_max);
    }
}

TEST_CASE("truncation at the requested cutoff is visible in the informational deviation") {
    auto w = weyl_shift_check(default_shift(2, 3.0), 12);
    CHECK(w.pass);
    CHECK(w.same_cutoff_deviation > 1e-3);
    CHECK(w.working_cutoff > 12);
}

TEST_CASE("tolerances gate the verdict") {
    auto c = ccr_check(2, 6, 0.0);
    CHECK(c.tolerance == 0.0);
    CHECK(c.pass == (c.max_deviation == 0.0));
    auto b = bogoliubov_action_check(default_kernel(2, 1.0), 8, 1e-30);
    CHECK_FALSE(b.pass);
}

TEST_CASE("symplectic relations") {
    for (double hs : {0.1, 1.0, 3.0}) CHECK(symplectic_check(default_kernel(3, hs)).pass);
}

TEST_CASE("deterministic test arguments have the requested size") {
    CHECK(default_shift(4, 2.5).squaredNorm() == doctest::Approx(2.5));
    Dense k = default_kernel(4, 0.7);
    CHECK(k.norm() == doctest::Approx(0.7));
    CHECK((k - k.transpose()).norm() == 0.0);
    CHECK((default_kernel(3, 1.0) - default_kernel(3, 1.0)).norm() == 0.0);
}

TEST_CASE("sector restriction against first quantisation") {
    PeriodicGrid g(3, 16, 2.0 * std::numbers::pi);
    auto v = scattering::RadialPotential::soft_ball(2.0, 1.0);
    for (int m : {2, 4}) {
        auto r = sector_check(ModeBasis::plane_waves(g, m), v, 2.0);
        CHECK(r.pass);
        CHECK(r.max_deviation < 1e-10);
    }
    CHECK_THROWS_AS(sector_check(ModeBasis::plane_waves(PeriodicGrid(1, 16, 6.0), 2), v, 2.0), ValidationError);
}

TEST_CASE("precondition failures") {
    CHECK_THROWS_AS(ccr_check(2, 2), ValidationError);
}
