#include <doctest.h>

#include <cmath>

#include "nsd/error.hpp"
#include "nsd/units.hpp"

using namespace nsd;

TEST_CASE("default fibre normalizes to the reference noise level") {
    auto u = normalize(FiberParams{});
    CHECK(std::abs(u.eps2 / 1.339e-9 - 1.0) < 1e-3);
    CHECK(u.P_n == doctest::Approx(2.0 / 1.27).epsilon(1e-12));
    CHECK(u.T_n == doctest::Approx(std::sqrt(1e-23)).epsilon(1e-12));
}

TEST_CASE("eps2 agrees with the closed form gamma kappa^2 L_n^1.5 / sqrt(2 |beta2|)") {
    for (double Ln : {0.5, 1.0, 3.0}) {
        FiberParams p;
        p.L_n = Ln;
        p.gamma_nl = 1.9;
        p.beta2 = -5e-24;
        double kappa2 = p.alpha_loss * p.planck_h * p.nu_s * p.K_T;
        double expect = p.gamma_nl * kappa2 * std::pow(Ln, 1.5) / std::sqrt(2 * std::abs(p.beta2));
        CHECK(normalize(p).eps2 == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("field scaling round trip") {
    auto u = normalize(FiberParams{});
    std::complex<double> A(0.003, -0.001);
    auto q = to_normalized_field(A, u);
    CHECK(std::abs(q - A / std::sqrt(u.P_n)) < 1e-15);
    CHECK(std::abs(to_physical_field(q, u) - A) < 1e-15);
}

TEST_CASE("power to beta at 0.8 mW and seven widths") {
    auto u = normalize(FiberParams{});
    double b = power_to_beta(0.8e-3, u, 7.0);
    CHECK(std::abs(b / 0.028 - 1.0) < 0.01);
    // energy 4b per slot of 7 FWHM = 7 * 1.763 / (2b) normalized time units
    double P = 4 * b / (7 * kSechFwhm / (2 * b)) * u.P_n;
    CHECK(P == doctest::Approx(0.8e-3).epsilon(1e-12));
    CHECK(beta_to_power(b, u, 7.0) == doctest::Approx(0.8e-3).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
    FiberParams p;
    p.beta2 = 1e-23;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = FiberParams{};
    p.gamma_nl = 0;
    CHECK_THROWS_AS(normalize(p), ValidationError);
    p = FiberParams{};
    p.alpha_loss = NAN;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    CHECK_THROWS_AS(FiberParams::from_config(KvConfig::parse("gama_nl = 1.2\n")), ValidationError);
    auto u = normalize(FiberParams{});
    CHECK_THROWS_AS(power_to_beta(-1.0, u, 7), ValidationError);
}

TEST_CASE("config file overrides defaults") {
    auto p = FiberParams::from_config(KvConfig::parse("# fibre\ngamma_nl = 2.0\nbeta2 = -1e-23\n"));
    CHECK(p.gamma_nl == 2.0);
    CHECK(p.beta2 == -1e-23);
    CHECK(p.alpha_loss == 0.046);
}
