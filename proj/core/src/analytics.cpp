#include "nsd/analytics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "nsd/error.hpp"

namespace nsd {

Distribution Distribution::point(double v) {
    if (!std::isfinite(v)) throw ValidationError("distribution", "point value must be finite");
    return {Kind::point, v, v};
}

Distribution Distribution::uniform(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw ValidationError("distribution", "bounds must be finite");
    if (!(hi > lo)) throw ValidationError("distribution", "uniform needs lo < hi");
    return {Kind::uniform, lo, hi};
}

Distribution Distribution::parse(const std::string& text) {
    auto fail = [&] { return ValidationError("distribution", "cannot parse '" + text + "'"); };
    auto num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw fail();
        }
        while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
        if (used != s.size()) throw fail();
        return v;
    };
    auto colon = text.find(':');
    if (colon == std::string::npos) return point(num(text));
    std::string kind = text.substr(0, colon);
    std::string rest = text.substr(colon + 1);
    if (kind == "point") return point(num(rest));
    if (kind == "uniform") {
        auto comma = rest.find(',');
        if (comma == std::string::npos) throw fail();
        return uniform(num(rest.substr(0, comma)), num(rest.substr(comma + 1)));
    }
    throw fail();
}

double Distribution::moment(int k) const {
    if (k == 0) return 1.0;
    if (kind == Kind::point) {
        if (k < 0 && a == 0) throw ValidationError("distribution", "negative moment of a point mass at zero");
        return std::pow(a, k);
    }
    if (k < 0 && a <= 0 && b >= 0) throw ValidationError("distribution", "negative moment with zero in support");
    if (k == -1) return std::log(b / a) / (b - a);
    return (std::pow(b, k + 1) - std::pow(a, k + 1)) / ((k + 1) * (b - a));
}

double Distribution::sample(Engine& rng) const {
    if (kind == Kind::point) return a;
    return std::uniform_real_distribution<double>(a, b)(rng);
}

std::string Distribution::str() const {
    std::ostringstream os;
    os.precision(17);
    if (kind == Kind::point)
        os << "point:" << a;
    else
        os << "uniform:" << a << "," << b;
    return os.str();
}

void InputEnsemble::validate() const {
    if (!independent) throw ValidationError("independent", "only independent inputs are supported");
    if (!(beta0.a > 0)) throw ValidationError("beta0", "support must be > 0");
}

InputEnsemble InputEnsemble::from_config(const KvConfig& cfg) {
    cfg.require_known({"alpha0", "beta0", "T00", "independent"});
    InputEnsemble e;
    if (auto v = cfg.get("alpha0")) e.alpha0 = Distribution::parse(*v);
    if (auto v = cfg.get("beta0")) e.beta0 = Distribution::parse(*v);
    if (auto v = cfg.get("T00")) e.T00 = Distribution::parse(*v);
    e.independent = cfg.get_bool("independent", true);
    e.validate();
    return e;
}

InputEnsemble InputEnsemble::load(const std::string& path) { return from_config(KvConfig::load(path)); }

InputEnsemble InputEnsemble::point(double alpha, double beta, double T0) {
    InputEnsemble e;
    e.alpha0 = Distribution::point(alpha);
    e.beta0 = Distribution::point(beta);
    e.T00 = Distribution::point(T0);
    e.validate();
    return e;
}

SolitonSpec InputEnsemble::sample(Engine& rng) const {
    double a = alpha0.sample(rng);
    double b = beta0.sample(rng);
    double t = T00.sample(rng);
    return SolitonSpec::from_center(cplx(a, b), t, 0.0);
}

EigenMoments eigen_moments(double beta0, double eps2, double L) {
    if (!(beta0 > 0)) throw ValidationError("beta0", "must be > 0");
    if (eps2 < 0) throw ValidationError("eps2", "must be >= 0");
    if (L < 0) throw ValidationError("L", "must be >= 0");
    EigenMoments m;
    const double e2L = eps2 * L;
    m.mean_R = 0;
    m.mean_I = 0.5 * e2L;
    m.m2_R = e2L * beta0 / 6.0 + e2L * e2L / 24.0;
    m.m2_I = 0.5 * e2L * beta0 + 0.375 * e2L * e2L;
    m.var_R = m.m2_R - m.mean_R * m.mean_R;
    m.var_I = m.m2_I - m.mean_I * m.mean_I;
    return m;
}

Theorem4Stats theorem4_stats(const InputEnsemble& ens, double eps2, double L) {
    ens.validate();
    if (eps2 < 0) throw ValidationError("eps2", "must be >= 0");
    if (L < 0) throw ValidationError("L", "must be >= 0");
    const double e2 = eps2, e4 = e2 * e2, e6 = e4 * e2, e8 = e4 * e4;
    const double L2 = L * L, L3 = L2 * L, L4 = L3 * L, L5 = L4 * L, L6 = L5 * L;
    const double Ea = ens.alpha0.moment(1), Ea2 = ens.alpha0.moment(2);
    const double Eb = ens.beta0.moment(1), Eb2 = ens.beta0.moment(2), Eb3 = ens.beta0.moment(3);
    Theorem4Stats s;
    s.mean = 2 * e2 * L2 * Ea;
    s.terms = {32.0 / 3.0 * e2 * L3 * Ea2 * Eb,
               32.0 / 9.0 * e2 * L3 * Eb3,
               16.0 / 3.0 * e4 * L4 * Ea2,
               32.0 / 9.0 * e4 * L4 * Eb2,
               46.0 / 45.0 * e6 * L5 * Eb,
               23.0 / 270.0 * e8 * L6,
               -4.0 * e4 * L4 * Ea * Ea};
    s.var = 0;
    for (double t : s.terms) s.var += t;
    return s;
}

double gordon_haus_order(double eps2, const std::vector<double>& L_list, double beta0, bool leading_only) {
    if (L_list.size() < 2) throw ValidationError("L_list", "needs at least two lengths");
    if (!(eps2 > 0)) throw ValidationError("eps2", "must be > 0");
    double lo = L_list.front(), hi = L_list.front();
    for (double L : L_list) {
        if (!(L > 0)) throw ValidationError("L_list", "lengths must be > 0");
        lo = std::min(lo, L);
        hi = std::max(hi, L);
    }
    if (hi < 10 * lo * (1 - 1e-12)) throw ValidationError("L_list", "must span at least one decade");
    auto ens = InputEnsemble::point(0.0, beta0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(L_list.size());
    for (double L : L_list) {
        auto st = theorem4_stats(ens, eps2, L);
        double v = leading_only ? st.terms[1] : st.var;
        double x = std::log(L), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Section6Stats section6_stats(const InputEnsemble& ens, double eps2, double L) {
    ens.validate();
    if (eps2 < 0) throw ValidationError("eps2", "must be >= 0");
    if (L < 0) throw ValidationError("L", "must be >= 0");
    const double e2 = eps2, e4 = e2 * e2, e6 = e4 * e2, e8 = e4 * e4;
    const double L2 = L * L, L3 = L2 * L, L4 = L3 * L, L5 = L4 * L, L6 = L5 * L;
    const double Ea = ens.alpha0.moment(1), Ea2 = ens.alpha0.moment(2);
    const double Eb = ens.beta0.moment(1), Eb2 = ens.beta0.moment(2), Eb3 = ens.beta0.moment(3);
    const double Ebinv = ens.beta0.moment(-1), Ebinv2 = ens.beta0.moment(-2);
    const double ET = ens.T00.moment(1), ET2 = ens.T00.moment(2);
    // independence factorizes the mixed moments
    const double Ea2b = Ea2 * Eb, EbT2 = Eb * ET2, EabT = Ea * Eb * ET;
    Section6Stats s;
    s.var_N1 = 0.912 * e2 * L * Ebinv + 2 * e2 * L * EbT2 + 2 * e2 * L * ET;
    s.var_N2 = 0.206 * e4 * L2 * Ebinv2;
    s.var_N3 = 32 * e2 * L3 * Ea2b + 32.0 / 9.0 * e2 * L3 * Eb3;
    s.var_N4 = 16.0 / 9.0 * e4 * L4 * Eb2 + 68.0 / 45.0 * e6 * L5 * Eb + 16.0 / 135.0 * e8 * L6;
    s.var_N0 = 32.0 / 3.0 * e2 * L3 * Ea2b + 16.0 / 3.0 * e4 * L4 * Ea2 + 32.0 / 9.0 * e2 * L3 * Eb3 +
               4.0 / 9.0 * e4 * L4 * Eb2 - 4 * e4 * L4 * Ea * Ea;
    s.cov_N1_N3 = 8 * e2 * L2 * EabT + 4 * e2 * L2 * Ea;
    s.cov_other = 0;
    return s;
}

Example1Result example1_ratio(double power_W, double separation_fwhm, double L, const FiberParams& params,
                              double fwhm) {
    if (!(power_W > 0)) throw ValidationError("power", "must be > 0");
    auto u = normalize(params);
    Example1Result r;
    r.power_W = power_W;
    r.eps2 = u.eps2;
    r.L = L;
    r.b = power_to_beta(power_W, u, separation_fwhm, fwhm);
    const double half = fwhm / (4 * r.b);
    r.ensemble.alpha0 = Distribution::point(0.0);
    r.ensemble.beta0 = Distribution::uniform(0.9 * r.b, 1.1 * r.b);
    r.ensemble.T00 = Distribution::uniform(-half, half);
    r.stats = section6_stats(r.ensemble, r.eps2, L);
    r.r = r.stats.var_N3 / r.stats.var_N1;
    return r;
}

double soliton_center(double q_d_mag, double beta) {
    if (!(q_d_mag > 0)) throw ValidationError("q_d_mag", "must be > 0");
    if (!(beta > 0)) throw ValidationError("beta", "must be > 0");
    return std::log(q_d_mag / (2 * beta)) / (2 * beta);
}

double cross_fourth_moment(double eps2, double s, const Distribution& beta0) {
    const double e4 = eps2 * eps2;
    return e4 * s * s * beta0.moment(2) / 12.0 + e4 * eps2 * s * s * s * beta0.moment(1) / 18.0 +
           e4 * e4 * s * s * s * s / 144.0;
}

double gamma_R_RI_moment(double eps2, double L, const Distribution& beta0) {
    const double e4 = eps2 * eps2;
    return 5.0 / 288.0 * e4 * std::pow(L, 4) * beta0.moment(1) + 7.0 / 2880.0 * e4 * eps2 * std::pow(L, 5);
}

StatReport StatReport::zscore(std::string name, double analytic, double estimate, double se, double k) {
    StatReport r;
    r.name = std::move(name);
    r.analytic = analytic;
    r.estimate = estimate;
    r.stderr_ = se;
    r.criterion = "zscore";
    r.tolerance = k;
    r.z = se > 0 ? (estimate - analytic) / se : (estimate == analytic ? 0.0 : INFINITY);
    r.rel_err = analytic != 0 ? std::abs(estimate - analytic) / std::abs(analytic) : std::abs(estimate);
    r.pass = std::abs(r.z) <= k;
    return r;
}

StatReport StatReport::relative(std::string name, double analytic, double estimate, double se, double tol) {
    StatReport r = zscore(std::move(name), analytic, estimate, se);
    r.criterion = "relative";
    r.tolerance = tol;
    r.pass = std::abs(estimate - analytic) <= tol * std::abs(analytic);
    return r;
}

StatReport StatReport::value(std::string name, double analytic) {
    StatReport r;
    r.name = std::move(name);
    r.analytic = analytic;
    r.criterion = "value";
    return r;
}

std::string StatReport::to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["analytic"] = analytic;
    j["estimate"] = estimate ? nlohmann::ordered_json(*estimate) : nlohmann::ordered_json(nullptr);
    j["stderr"] = stderr_ ? nlohmann::ordered_json(*stderr_) : nlohmann::ordered_json(nullptr);
    j["z"] = std::isfinite(z) ? nlohmann::ordered_json(z) : nlohmann::ordered_json(nullptr);
    j["rel_err"] = rel_err;
    j["criterion"] = criterion;
    j["tolerance"] = tolerance;
    j["pass"] = pass;
    return j.dump();
}

}  // namespace nsd
