#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "nsd/analytics.hpp"
#include "nsd/error.hpp"
#include "nsd/waveform.hpp"
#include "oracles.hpp"

using namespace nsd;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

// field value of an N-soliton at a single point (t, z)
cplx field_at(const std::vector<SolitonSpec>& specs, double t, double z) {
    TimeGrid g{t, 1.0, 8};
    return make_nsoliton(specs, z, g, kInf)[0];
}
}  // namespace

TEST_CASE("time grid validation") {
    CHECK_THROWS_AS(TimeGrid::centered(12, 0.1).validate(), ValidationError);
    CHECK_THROWS_AS(TimeGrid::centered(4, 0.1).validate(), ValidationError);
    CHECK_THROWS_AS(TimeGrid::centered(16, 0.0).validate(), ValidationError);
    auto g = TimeGrid::centered(16, 0.5);
    CHECK(g.t(0) == -4.0);
    CHECK(g.t(8) == 0.0);
}

TEST_CASE("soliton profile is 2 beta sech(2 beta (t - T0)) with T0 from |Q|") {
    const double beta = 0.4, alpha = 0.15, T0 = 1.3;
    const double Qmag = 2 * beta * std::exp(2 * beta * T0);
    SolitonSpec s{cplx(alpha, beta), std::polar(Qmag, 0.7)};
    auto g = TimeGrid::centered(2048, 0.05);
    auto sig = make_soliton(s, 0.0, g);
    double err = 0;
    for (std::size_t k = 0; k < g.n; ++k) {
        double ref = 2 * beta / std::cosh(2 * beta * (g.t(k) - T0));
        err = std::max(err, std::abs(std::abs(sig[k]) - ref));
    }
    CHECK(err < 1e-14);
    // carrier e^{-2 j alpha t}: phase difference between neighbouring samples
    cplx ratio = sig[1025] / sig[1024] * std::abs(sig[1024]) / std::abs(sig[1025]);
    CHECK(std::arg(ratio) == doctest::Approx(-2 * alpha * 0.05).epsilon(1e-9));
}

TEST_CASE("soliton energy equals 4 beta") {
    for (double beta : {0.05, 0.3, 1.5}) {
        SolitonSpec s = SolitonSpec::from_center(cplx(0.2, beta), 0.5, 0.1);
        auto sig = make_soliton(s, 0.0, default_grid({s}));
        CHECK(energy(sig) == doctest::Approx(4 * beta).epsilon(1e-9));
    }
}

TEST_CASE("peak sits at the centre given by the spectral amplitude") {
    const double beta = 0.5;
    auto s = SolitonSpec{cplx(0, beta), 2 * beta * std::exp(2.0)};
    auto g = TimeGrid::centered(2048, 0.03);
    auto sig = make_soliton(s, 0.0, g);
    std::size_t kmax = 0;
    for (std::size_t k = 0; k < g.n; ++k)
        if (std::abs(sig[k]) > std::abs(sig[kmax])) kmax = k;
    double T0 = soliton_center(std::abs(s.q_d), beta);
    CHECK(T0 == doctest::Approx(2.0));
    CHECK(std::abs(g.t(kmax) - T0) <= g.dt);
}

TEST_CASE("synthesized solitons satisfy the noiseless equation") {
    std::vector<std::vector<SolitonSpec>> cases = {
        {SolitonSpec::from_center(cplx(0.1, 0.5), 0.3, 0.4)},
        {SolitonSpec::from_center(cplx(0.0, 0.25), 0.0), SolitonSpec::from_center(cplx(0.0, 0.75), 1.0, 0.2)},
        {SolitonSpec::from_center(cplx(-0.2, 0.4), -2.0), SolitonSpec::from_center(cplx(0.3, 0.6), 2.0, 1.0),
         SolitonSpec::from_center(cplx(0.0, 0.3), 0.0, -0.5)},
    };
    for (const auto& specs : cases) {
        double worst = 0, scale = 0;
        for (double z : {0.0, 0.37}) {
            for (double t = -4; t <= 4; t += 0.25) {
                auto q = [&](double tt, double zz) { return field_at(specs, tt, zz); };
                worst = std::max(worst, std::abs(oracle::nlse_residual(q, t, z)));
                scale = std::max(scale, std::abs(q(t, z)));
            }
        }
        CHECK(worst < 1e-5 * std::max(1.0, scale * scale * scale));
    }
}

TEST_CASE("single entry N-soliton equals the fundamental soliton") {
    auto s = SolitonSpec::from_center(cplx(0.3, 0.45), -0.7, 2.0);
    auto g = TimeGrid::centered(1024, 0.05);
    auto a = make_soliton(s, 0.8, g);
    auto b = make_nsoliton({s}, 0.8, g);
    double err = 0;
    for (std::size_t k = 0; k < g.n; ++k) err = std::max(err, std::abs(a[k] - b[k]));
    CHECK(err < 1e-12);
}

TEST_CASE("two-soliton energy is the sum of 4 beta_k") {
    std::vector<SolitonSpec> specs = {SolitonSpec::from_center(cplx(0, 0.25), 0.0),
                                      SolitonSpec::from_center(cplx(0.1, 0.75), 1.0, 0.2)};
    auto sig = make_nsoliton(specs, 0.0, default_grid(specs));
    CHECK(energy(sig) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("narrow window is rejected") {
    auto s = SolitonSpec::from_center(cplx(0, 0.1), 0.0);
    CHECK_THROWS_AS(make_soliton(s, 0.0, TimeGrid::centered(64, 0.1)), GridTooNarrow);
    CHECK_THROWS_AS(make_nsoliton({s}, 0.0, TimeGrid::centered(64, 0.1)), GridTooNarrow);
}

TEST_CASE("default grid resolves and contains every pulse") {
    std::vector<SolitonSpec> specs = {SolitonSpec::from_center(cplx(0.5, 0.2), -3.0),
                                      SolitonSpec::from_center(cplx(-0.4, 1.2), 4.0)};
    auto g = default_grid(specs, 0.0);
    CHECK(g.dt <= 0.05 / 1.2 + 1e-15);
    CHECK(g.t_start < -3.0 - 10.0 / 0.2 + 1e-9);
    CHECK(g.t_end() > 4.0);
    CHECK_NOTHROW(make_nsoliton(specs, 0.0, g));
}

TEST_CASE("invalid specs and close eigenvalues") {
    CHECK_THROWS_AS((SolitonSpec{cplx(0, -0.1), 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((SolitonSpec{cplx(0, 0.5), 0.0}.validate()), ValidationError);
    std::string last;
    set_warning_sink([&](const std::string& m) { last = m; });
    std::vector<SolitonSpec> specs = {SolitonSpec::from_center(cplx(0, 0.5), -2.0),
                                      SolitonSpec::from_center(cplx(0, 0.5001), 2.0)};
    make_nsoliton(specs, 0.0, TimeGrid::centered(2048, 0.05));
    set_warning_sink(nullptr);
    CHECK(last.find("eigenvalues") != std::string::npos);
}

TEST_CASE("binary and CSV round trip") {
    auto s = SolitonSpec::from_center(cplx(0.1, 0.5), 0.0, 0.3);
    auto sig = make_soliton(s, 0.0, TimeGrid::centered(512, 0.1));
    write_binary(sig, "wf_roundtrip.bin");
    auto back = read_binary("wf_roundtrip.bin");
    REQUIRE(back.size() == sig.size());
    CHECK(back.grid().dt == sig.grid().dt);
    CHECK(back.grid().t_start == sig.grid().t_start);
    for (std::size_t k = 0; k < sig.size(); ++k) CHECK(back[k] == sig[k]);
    write_csv(sig, "wf_roundtrip.csv");
    std::ifstream f("wf_roundtrip.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header == "t,re_q,im_q");
    std::remove("wf_roundtrip.bin");
    std::remove("wf_roundtrip.csv");
    CHECK_THROWS_AS(read_binary("does_not_exist.bin"), Error);
}

TEST_CASE("phase wrapping to [-pi, pi)") {
    CHECK(wrap_phase(M_PI) == doctest::Approx(-M_PI));
    CHECK(wrap_phase(-M_PI) == doctest::Approx(-M_PI));
    CHECK(wrap_phase(7.0) == doctest::Approx(7.0 - 2 * M_PI));
    for (double p = -20; p < 20; p += 0.37) {
        double w = wrap_phase(p);
        CHECK(w >= -M_PI);
        CHECK(w < M_PI);
        CHECK(std::abs(std::remainder(w - p, 2 * M_PI)) < 1e-12);
    }
}

TEST_CASE("noiseless spectral amplitude evolution") {
    auto s = SolitonSpec::from_center(cplx(0.2, 0.5), 1.0, 0.3);
    double z = 0.7;
    cplx Qz = s.q_d * std::exp(cplx(0, -4) * s.zeta * s.zeta * z);
    CHECK(log_mag_at(s, z) == doctest::Approx(std::log(std::abs(Qz))));
    CHECK(std::abs(std::remainder(phase_at(s, z) - std::arg(Qz), 2 * M_PI)) < 1e-12);
    // centre moves at 4 alpha
    CHECK(center_at(s, z) == doctest::Approx(1.0 + 4 * 0.2 * z));
}

TEST_CASE("default grid contains strongly interacting pulses") {
    // close eigenvalues push the pulses far from their nominal centres
    std::vector<SolitonSpec> specs = {SolitonSpec::from_center(cplx(0.438655, 0.950111), -1.63821),
                                      SolitonSpec::from_center(cplx(0.28655, 0.933942), 1.11427)};
    auto g = default_grid(specs);
    auto sig = make_nsoliton(specs, 0.0, g);
    const double pk = sig.peak_magnitude();
    CHECK(std::abs(sig[0]) < 1e-7 * pk);
    CHECK(std::abs(sig[g.n - 1]) < 1e-7 * pk);
    // a lone soliton keeps the |T0| + 10 / beta half width
    auto s = SolitonSpec::from_center(cplx(0.1, 0.5), 3.0);
    auto g1 = default_grid({s});
    CHECK(g1.dt * static_cast<double>(g1.n) == doctest::Approx(2 * (3.0 + 20.0)));
}
