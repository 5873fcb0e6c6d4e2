#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nsd/kvconfig.hpp"
#include "nsd/rng.hpp"
#include "nsd/units.hpp"
#include "nsd/waveform.hpp"

namespace nsd {

// Point mass or uniform law on [a, b].
struct Distribution {
    enum class Kind { point, uniform };
    Kind kind = Kind::point;
    double a = 0;
    double b = 0;

    static Distribution point(double v);
    static Distribution uniform(double lo, double hi);
    // "point:v" | "uniform:a,b" | plain number
    static Distribution parse(const std::string& text);

    // E[X^k] in closed form; negative k requires support excluding zero.
    double moment(int k) const;
    double mean() const { return moment(1); }
    double sample(Engine& rng) const;
    bool symmetric() const { return a == -b; }
    std::string str() const;
};

struct InputEnsemble {
    Distribution alpha0 = Distribution::point(0.0);
    Distribution beta0 = Distribution::point(0.5);
    Distribution T00 = Distribution::point(0.0);
    bool independent = true;

    void validate() const;
    // keys: alpha0, beta0, T00, independent
    static InputEnsemble from_config(const KvConfig& cfg);
    static InputEnsemble load(const std::string& path);
    static InputEnsemble point(double alpha, double beta, double T0 = 0.0);

    // Draws alpha, beta, T0 in that order; spectral amplitude phase is zero.
    SolitonSpec sample(Engine& rng) const;
};

struct EigenMoments {
    double mean_R = 0, mean_I = 0;
    double m2_R = 0, m2_I = 0;
    double var_R = 0, var_I = 0;
};
EigenMoments eigen_moments(double beta0, double eps2, double L);

struct Theorem4Stats {
    double mean = 0;
    double var = 0;
    // eps^2 L^3 E[a^2 b], eps^2 L^3 E[b^3], eps^4 L^4 E[a^2], eps^4 L^4 E[b^2],
    // eps^6 L^5 E[b], eps^8 L^6, -eps^4 L^4 (E a)^2
    std::array<double, 7> terms{};
};
Theorem4Stats theorem4_stats(const InputEnsemble& ens, double eps2, double L);

// Log-log least-squares slope of the variance (alpha = 0 point input) vs L.
double gordon_haus_order(double eps2, const std::vector<double>& L_list, double beta0, bool leading_only = false);

struct Section6Stats {
    double var_N1 = 0, var_N2 = 0, var_N3 = 0, var_N4 = 0, var_N0 = 0;
    double cov_N1_N3 = 0;
    // pairs (1,2), (1,4), (2,3), (2,4), (3,4) are zero to the stated order
    double cov_other = 0;
};
Section6Stats section6_stats(const InputEnsemble& ens, double eps2, double L);

struct Example1Result {
    double power_W = 0;
    double b = 0;
    double eps2 = 0;
    double L = 0;
    InputEnsemble ensemble;
    Section6Stats stats;
    double r = 0;
};
Example1Result example1_ratio(double power_W, double separation_fwhm = 7.0, double L = 7000.0,
                              const FiberParams& params = {}, double fwhm = kSechFwhm);

double soliton_center(double q_d_mag, double beta);

// E[(ups_R nu_I)(s) (ups_R nu_I)(t)], s <= t, averaged over beta0.
double cross_fourth_moment(double eps2, double s, const Distribution& beta0);
// E[Gamma_R Gamma_RI] averaged over beta0.
double gamma_R_RI_moment(double eps2, double L, const Distribution& beta0);

struct StatReport {
    std::string name;
    double analytic = 0;
    std::optional<double> estimate;
    std::optional<double> stderr_;
    double z = 0;        // (estimate - analytic) / stderr
    double rel_err = 0;  // |estimate - analytic| / |analytic|
    std::string criterion;  // "zscore", "relative" or "value"
    double tolerance = 0;
    bool pass = true;

    // |z| <= k
    static StatReport zscore(std::string name, double analytic, double estimate, double se, double k = 3.0);
    // |estimate - analytic| <= tol |analytic|
    static StatReport relative(std::string name, double analytic, double estimate, double se, double tol);
    // closed form only
    static StatReport value(std::string name, double analytic);
    std::string to_json() const;
};

}  // namespace nsd
