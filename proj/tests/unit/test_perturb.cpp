#include <doctest.h>

#include <cmath>
#include <fstream>

#include "nsd/error.hpp"
#include "nsd/perturb.hpp"
#include "nsd/rng.hpp"
#include "oracles.hpp"

using namespace nsd;

namespace {
PropagationConfig sde_cfg(double eps2, double L, double dz) {
    PropagationConfig c;
    c.eps2 = eps2;
    c.total_z = L;
    c.dz = dz;
    c.noise_on = true;
    return c;
}

double sech(double x) { return 1.0 / std::cosh(x); }

// smooth synthetic path with closed-form integrals
PerturbationPath smooth_path(double L, std::size_t n, SolitonState s0) {
    std::vector<double> z(n + 1), r(n + 1), i(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        z[k] = L * static_cast<double>(k) / static_cast<double>(n);
        r[k] = 1e-3 * std::sin(z[k]);
        i[k] = 2e-3 * z[k] * z[k] / (L * L);
    }
    return PerturbationPath::from_samples(z, r, i, 0.0, s0);
}
}  // namespace

TEST_CASE("kernel variances match quadrature of the projection kernels") {
    // per unit eps^2 dz: Var = (1/2) int k(t)^2 dt for unit circular white noise
    for (double beta : {0.05, 0.5, 1.3}) {
        const double span = 40.0 / beta;
        auto q = [&](std::function<double(double)> k) {
            return 0.5 * oracle::simpson([&](double t) { return k(t) * k(t); }, -span, span, 200000);
        };
        auto kv = kernel_variances(beta);
        CHECK(kv.alpha == doctest::Approx(q([&](double t) { return beta * sech(2 * beta * t) * std::tanh(2 * beta * t); })).epsilon(1e-8));
        CHECK(kv.beta == doctest::Approx(q([&](double t) { return beta * sech(2 * beta * t); })).epsilon(1e-8));
        CHECK(kv.delta == doctest::Approx(q([&](double t) { return t * sech(2 * beta * t); })).epsilon(1e-8));
        CHECK(kv.theta == doctest::Approx(q([&](double t) {
                              double x = 2 * beta * t;
                              return sech(x) * (1 - x * std::tanh(x));
                          })).epsilon(1e-8));
    }
    CHECK_THROWS_AS(kernel_variances(0.0), ValidationError);
}

TEST_CASE("noiseless skeleton") {
    SolitonState s0{0.2, 0.5, -1.0, 0.3};
    auto c = sde_cfg(0.0, 3.0, 0.01);
    auto p = simulate_soliton_sde(s0, c);
    REQUIRE(p.size() == 301);
    for (std::size_t k = 0; k < p.size(); ++k) {
        CHECK(p.ups_R[k] == 0.0);
        CHECK(p.ups_I[k] == 0.0);
        CHECK(p.T0[k] == doctest::Approx(-1.0 + 4 * 0.2 * p.z[k]));
        CHECK(p.theta[k] == doctest::Approx(0.3 - 4 * (0.04 + 0.25) * p.z[k]));
    }
    auto pc = perturbation_model(p, SolitonSpec::from_center(cplx(0.2, 0.5), -1.0));
    CHECK(pc.N1 == 0.0);
    CHECK(pc.N2 == 0.0);
    CHECK(pc.N3 == 0.0);
    CHECK(pc.N4 == 0.0);
    CHECK(pc.N0 == 0.0);
}

TEST_CASE("state from a spectral amplitude") {
    auto spec = SolitonSpec::from_center(cplx(0.2, 0.5), 1.5, 0.7);
    auto s = SolitonState::from_spec(spec);
    CHECK(s.T0 == doctest::Approx(1.5));
    CHECK(s.theta == doctest::Approx(-2 * 0.2 * 1.5 - 0.7 - M_PI / 2));
    CHECK_THROWS_AS((SolitonState{0, -0.1, 0, 0}.validate()), ValidationError);
}

TEST_CASE("same seed, same path") {
    SolitonState s0{0.0, 0.5, 0.0, 0.0};
    auto c = sde_cfg(1e-3, 2.0, 0.01);
    c.seed = 42;
    auto a = simulate_soliton_sde(s0, c), b = simulate_soliton_sde(s0, c);
    CHECK(a.ups_R == b.ups_R);
    CHECK(a.theta == b.theta);
    c.seed = 43;
    CHECK(a.ups_R != simulate_soliton_sde(s0, c).ups_R);
}

TEST_CASE("collapse and coarse-step warning") {
    // the continuous dynamics keep beta > 0; only a step coarse against beta can cross zero
    std::string msg;
    set_warning_sink([&](const std::string& m) { msg = m; });
    SolitonState s0{0.0, 0.01, 0.0, 0.0};
    Engine rng(1);
    int collapsed = 0;
    for (int i = 0; i < 50; ++i) {
        try {
            simulate_soliton_sde(s0, sde_cfg(1.0, 2.0, 0.5), rng);
        } catch (const SolitonCollapse&) {
            ++collapsed;
        }
    }
    set_warning_sink(nullptr);
    CHECK(collapsed > 0);
    CHECK(msg.find("coarse") != std::string::npos);
}

TEST_CASE("ensemble drift and moments of the eigenvalue noise") {
    // mean beta grows at eps^2 / 2 whatever beta0; second moments per the closed forms
    const double eps2 = 1e-3, L = 10.0;
    for (double beta0 : {0.3, 0.8}) {
        const int M = 100000;
        const std::size_t K = 50;
        std::vector<double> mean_beta(K + 1, 0.0);
        double s_I = 0, s_II = 0, s_RR = 0, s_RR2 = 0;
        for (int m = 0; m < M; ++m) {
            Engine rng = trial_engine(77, static_cast<std::uint64_t>(m));
            auto p = simulate_soliton_sde({0.0, beta0, 0.0, 0.0}, sde_cfg(eps2, L, L / K), rng);
            for (std::size_t k = 0; k <= K; ++k) mean_beta[k] += p.ups_I[k] / M;
            double r = p.ups_R.back(), i = p.ups_I.back();
            s_I += i;
            s_II += i * i;
            s_RR += r * r;
            s_RR2 += r * r * r * r;
        }
        // least-squares line through the mean path
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (std::size_t k = 0; k <= K; ++k) {
            double x = L * static_cast<double>(k) / K, y = mean_beta[k];
            sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
        }
        const double n = K + 1.0;
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        double r2 = std::pow(n * sxy - sx * sy, 2) / ((n * sxx - sx * sx) * (n * syy - sy * sy));
        CHECK(r2 > 0.99);
        const double mean_I = s_I / M, var_I = s_II / M - mean_I * mean_I;
        CHECK(std::abs(mean_I - 0.5 * eps2 * L) < 3 * std::sqrt(var_I / M));
        CHECK(slope == doctest::Approx(0.5 * eps2).epsilon(0.25));
        const double m2I = 0.5 * eps2 * L * beta0 + 0.375 * eps2 * eps2 * L * L;
        CHECK(std::abs(s_II / M - m2I) < 3 * std::sqrt(2.0 / M) * m2I);
        const double m2R = eps2 * L * beta0 / 6 + eps2 * eps2 * L * L / 24;
        const double se = std::sqrt((s_RR2 / M - std::pow(s_RR / M, 2)) / M);
        CHECK(std::abs(s_RR / M - m2R) < 3 * se);
    }
}

TEST_CASE("channel sample of a zero path is the noiseless evolution") {
    auto spec = SolitonSpec::from_center(cplx(0.1, 0.4), 0.5, 0.2);
    auto s0 = SolitonState::from_spec(spec);
    std::vector<double> z = {0.0, 1.0, 2.0}, zero = {0.0, 0.0, 0.0};
    auto p = PerturbationPath::from_samples(z, zero, zero, 0.0, s0);
    for (const auto& c : {magnitude_channel(p, spec), concatenate_model(p, spec, 1)}) {
        CHECK(c.ln_mag_out == c.ln_mag_in);
        CHECK(c.phase_out == doctest::Approx(c.phase_in));
        CHECK(c.ln_mag_in == doctest::Approx(log_mag_at(spec, 2.0)));
        CHECK(c.phase_in >= -M_PI);
        CHECK(c.phase_in < M_PI);
    }
}

TEST_CASE("integral channel on a smooth path against closed-form integrals") {
    const double L = 10.0;
    auto spec = SolitonSpec::from_center(cplx(0.05, 0.3), 0.0);
    auto s0 = SolitonState::from_spec(spec);
    auto p = smooth_path(L, 20000, s0);
    auto c = magnitude_channel(p, spec);
    const double IR = 1e-3 * (1 - std::cos(L));
    const double II = 2e-3 * L / 3;
    const double IRI = oracle::simpson([&](double z) { return 1e-3 * std::sin(z) * 2e-3 * z * z / (L * L); }, 0, L);
    CHECK(c.I_R == doctest::Approx(IR).epsilon(1e-7));
    CHECK(c.I_I == doctest::Approx(II).epsilon(1e-7));
    CHECK(c.I_RI == doctest::Approx(IRI).epsilon(1e-6));
    CHECK(c.N() == doctest::Approx(8 * 0.05 * c.I_I + 8 * 0.3 * c.I_R + 8 * c.I_RI).epsilon(1e-14));
}

TEST_CASE("segment product converges to the integral form") {
    const double L = 10.0;
    auto spec = SolitonSpec::from_center(cplx(0.05, 0.3), 0.0);
    auto p = smooth_path(L, 20000, SolitonState::from_spec(spec));
    auto ref = magnitude_channel(p, spec);
    double d1 = std::abs(concatenate_model(p, spec, 100).ln_mag_out - ref.ln_mag_out);
    double d2 = std::abs(concatenate_model(p, spec, 200).ln_mag_out - ref.ln_mag_out);
    CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::abs(concatenate_model(p, spec, 2000000).ln_mag_out - ref.ln_mag_out) < 1e-8);
    CHECK_THROWS_AS(concatenate_model(p, spec, 0), ValidationError);
}

TEST_CASE("perturbation components add up to the closed expression") {
    auto spec = SolitonSpec::from_center(cplx(0.1, 0.4), 0.7);
    auto s0 = SolitonState::from_spec(spec);
    auto c = sde_cfg(1e-3, 5.0, 0.01);
    c.seed = 5;
    auto p = simulate_soliton_sde(s0, c);
    auto pc = perturbation_model(p, spec);
    const double L = 5.0, uI = p.ups_I.back(), D = p.delta_int.back();
    const double IR = trapezoid(p.z, p.ups_R);
    const double expect = 8 * L * 0.1 * uI + 8 * 0.4 * IR + 8 * uI * IR + 2 * uI * D + 2 * 0.4 * D + 2 * uI * 0.7 +
                          std::log((0.4 + uI) / 0.4);
    CHECK(pc.total() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(pc.N1 == doctest::Approx(pc.N11 + pc.N12 + pc.N13));
    CHECK(pc.N3 == doctest::Approx(pc.N31 + pc.N32));
    std::vector<double> z = {0.0, 1.0}, zero = {0.0, 0.0};
    auto bare = PerturbationPath::from_samples(z, zero, zero, 0.0, s0);
    CHECK_THROWS_AS(perturbation_model(bare, spec), ValidationError);
}

TEST_CASE("path validation and export") {
    SolitonState s0{0.0, 0.5, 0.0, 0.0};
    CHECK_THROWS_AS(PerturbationPath::from_samples({0.0, 1.0}, {0.1, 0.0}, {0.0, 0.0}, 0.0, s0), ValidationError);
    CHECK_THROWS_AS(PerturbationPath::from_samples({0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, 0.0, s0), ValidationError);
    auto p = PerturbationPath::from_samples({0.0, 1.0, 2.0}, {0.0, 0.1, 0.2}, {0.0, 0.3, 0.4}, 0.02, s0);
    CHECK(p.nu_I[2] == doctest::Approx(0.4 - 0.5 * 0.02 * 2.0));
    write_path_csv(p, "path_export.csv");
    std::ifstream f("path_export.csv");
    std::string header, row;
    std::getline(f, header);
    CHECK(header == "z,ups_R,ups_I");
    int rows = 0;
    while (std::getline(f, row)) ++rows;
    CHECK(rows == 3);
    std::remove("path_export.csv");
    auto spec = SolitonSpec::from_center(cplx(0.0, 0.5), 0.0);
    auto js = magnitude_channel(p, spec).to_json();
    CHECK(js.find("\"ln_mag_out\"") != std::string::npos);
    CHECK(js.find("\"I_R2mI2\"") != std::string::npos);
    auto other = SolitonSpec::from_center(cplx(0.0, 0.6), 0.0);
    CHECK_THROWS_AS(magnitude_channel(p, other), ValidationError);
}
