#include "thawsim/errors.hpp"
#include "thawsim/thermo.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace thawsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("omega on the linear branches", "[thermo]") {
    EnthalpyTemperatureMap map;
    auto j = map.junctions();
    CHECK_THAT(map.omega(4.20e5), WithinRel(200.0, 1e-14));
    CHECK_THAT(map.omega(j[3] + 4180.0 * 10.0), WithinRel(283.15, 1e-14));
    CHECK_THAT(map.omega_inv(200.0), WithinRel(4.20e5, 1e-14));
    CHECK_THAT(map.omega_inv(283.15), WithinRel(j[3] + 41800.0, 1e-12));
    CHECK_THAT(map.omega_prime(4.20e5), WithinRel(1.0 / 2100.0, 1e-14));
    CHECK_THAT(map.omega_prime(7.405e5), WithinRel(1.0 / 4.18e6, 1e-14));
}

TEST_CASE("plateau and corner values", "[thermo]") {
    EnthalpyTemperatureMap map;
    const PhaseMaterial& m = map.material();
    // Chord of the water corner is the geometric mean of the adjoining slopes.
    double w = m.smoothing_width;
    double T_w1 = m.T_c - 2.0 * w / std::sqrt(m.c_inf * m.c_w);
    auto j = map.junctions();
    CHECK_THAT(map.omega(j[2]), WithinAbs(T_w1, 1e-10));
    CHECK_THAT(T_w1 - m.T_c, WithinAbs(-0.10077, 1e-5));
    double plateau_mid = T_w1 - (j[2] - 0.5 * (m.H_i + m.H_w)) / m.c_inf;
    CHECK_THAT(map.plateau_midpoint_temperature(), WithinAbs(plateau_mid, 1e-10));
    CHECK(std::fabs(map.plateau_midpoint_temperature() - m.T_c) < 0.2);
    CHECK_THAT(map.omega(j[3]), WithinAbs(m.T_c, 1e-12));
}

TEST_CASE("omega round trip and monotonicity", "[thermo]") {
    EnthalpyTemperatureMap map;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.0, 2e6);
    for (int k = 0; k < 1000; ++k) {
        double H = U(rng);
        double back = map.omega_inv(map.omega(H));
        CHECK(std::fabs(back - H) <= 1e-10 * std::max(H, 1.0) + 1e-9);
    }
    double prev = map.omega(0.0);
    for (int k = 1; k <= 20000; ++k) {
        double T = map.omega(k * 100.0);
        REQUIRE(T > prev);
        prev = T;
    }
}

TEST_CASE("omega_prime matches central differences", "[thermo]") {
    EnthalpyTemperatureMap map;
    auto j = map.junctions();
    std::vector<double> Hs{1e5, 4.2e5, j[0] + 100.0, j[1] - 500.0, 7.0e5, j[2] + 10.0, j[3] - 3000.0, 1.2e6};
    for (double H : Hs) {
        double fd = (map.omega(H + 1.0) - map.omega(H - 1.0)) / 2.0;
        CHECK(std::fabs(map.omega_prime(H) - fd) <= 1e-6 * map.omega_prime(H));
    }
}

TEST_CASE("omega is C1 at the junctions", "[thermo]") {
    EnthalpyTemperatureMap map;
    for (double Hj : map.junctions()) {
        double left = map.omega_prime(Hj * (1.0 - 1e-15) - 1e-9);
        double right = map.omega_prime(Hj);
        CHECK(std::fabs(left - right) <= 1e-8 * std::max(left, right));
        CHECK(std::fabs(map.omega(Hj - 1e-7) - map.omega(Hj)) < 1e-8);
    }
}

TEST_CASE("slope bounds", "[thermo]") {
    EnthalpyTemperatureMap map;
    for (int k = 0; k <= 4000; ++k) {
        double s = map.omega_prime(k * 500.0);
        CHECK(s >= (1.0 / 4.18e6) * (1.0 - 1e-12));
        CHECK(s <= (1.0 / 2100.0) * (1.0 + 1e-12));
    }
}

TEST_CASE("diffusivity", "[thermo]") {
    EnthalpyTemperatureMap map;
    CHECK_THAT(map.diffusivity(0.0), WithinRel(2.22 / 917.0, 1e-14));
    CHECK_THAT(map.diffusivity(9.07e5), WithinRel(5.56e-4, 1e-14));
    CHECK_THAT(map.diffusivity(2e6), WithinRel(5.56e-4, 1e-14));
    CHECK_THAT(map.diffusivity(7.405e5), WithinRel(0.5 * (2.22 / 917.0 + 5.56e-4), 1e-12));
    double lo = 5.56e-4, hi = 2.22 / 917.0;
    for (int k = 0; k <= 2000; ++k) {
        double D = map.diffusivity(k * 1000.0);
        CHECK(D >= lo * (1 - 1e-14));
        CHECK(D <= hi * (1 + 1e-14));
    }
}

TEST_CASE("domain errors", "[thermo]") {
    EnthalpyTemperatureMap map;
    CHECK_THROWS_AS(map.omega(-1.0), DomainError);
    CHECK_THROWS_AS(map.omega_prime(-1.0), DomainError);
    CHECK_THROWS_AS(map.diffusivity(-1.0), DomainError);
    CHECK_THROWS_AS(map.omega_inv(-5.0), DomainError);
}

TEST_CASE("material validation", "[thermo]") {
    PhaseMaterial m;
    CHECK_NOTHROW(m.validate());
    PhaseMaterial bad = m;
    bad.H_w = bad.H_i - 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = m;
    bad.smoothing_width = 2e5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = m;
    bad.k_w = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
