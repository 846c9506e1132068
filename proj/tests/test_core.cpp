// test_core - units, parameters, preset
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vdimer/core.hpp"
#include "vdimer/errors.hpp"

using namespace vdimer;

TEST_CASE("wavenumber to angular frequency") {
    // 2 pi c, c in cm/fs
    CHECK(to_angular(Wavenumber{1.0}).rad_per_fs == doctest::Approx(2.0 * M_PI * 2.99792458e-5).epsilon(1e-15));
    CHECK(to_wavenumber(to_angular(Wavenumber{15300.0})).cm == doctest::Approx(15300.0).epsilon(1e-15));
    // a 1 fs period is 33356.4 cm^-1
    CHECK(to_wavenumber(AngularFrequency{2.0 * M_PI}).cm == doctest::Approx(33356.40952).epsilon(1e-9));
}

TEST_CASE("APC preset values") {
    const DimerParams p = apc_preset();
    CHECK(p.eps_a == 15300.0);
    CHECK(p.eps_b == 16200.0);
    CHECK(p.J == -162.0);
    CHECK(p.omega_a == 800.0);
    CHECK(p.omega_b == 1500.0);
    CHECK(p.g_a == 0.1);
    CHECK(p.g_b == 0.15);
    CHECK(p.mu_a.norm() == doctest::Approx(1.0));
    CHECK(p.mu_b.norm() == doctest::Approx(1.0));
    CHECK(angle_between(p.mu_a, p.mu_b) == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(p.statistics == ExcitonStatistics::fermion);
    CHECK(coupling_ratio(p) == doctest::Approx(324.0 / 2300.0).epsilon(1e-15));
}

TEST_CASE("Huang-Rhys factor") {
    CHECK(huang_rhys(0.1) == doctest::Approx(0.005));
    CHECK(apc_preset().huang_rhys_b() == doctest::Approx(0.01125));
}

TEST_CASE("parameter validation") {
    DimerParams p = apc_preset();
    CHECK_NOTHROW(p.validate());
    p.omega_a = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = apc_preset();
    p.mu_b = Vec3::Zero();
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = apc_preset();
    p.J = std::nan("");
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = apc_preset();
    p.omega_a = -1500.0;
    CHECK_THROWS_AS(coupling_ratio(p), DomainError);
}
