#include "nsd/nft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "nsd/error.hpp"

namespace nsd {

namespace {

constexpr cplx J{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

// cosh(kh), sinh(kh)/k and d(sinh(kh)/k)/d(k^2) as functions of k^2, no branch choice needed.
inline void cosh_sinhc(cplx k2, double h, cplx& C, cplx& S, cplx* dS_dk2) {
    const cplx y = k2 * (h * h);
    if (std::abs(y) < 0.04) {
        C = 1.0 + y * (1.0 / 2 + y * (1.0 / 24 + y * (1.0 / 720 + y * (1.0 / 40320 + y * (1.0 / 3628800)))));
        S = h * (1.0 + y * (1.0 / 6 + y * (1.0 / 120 + y * (1.0 / 5040 + y * (1.0 / 362880 + y * (1.0 / 39916800))))));
        if (dS_dk2)
            *dS_dk2 = (h * h * h) *
                      (1.0 / 6 + y * (2.0 / 120 + y * (3.0 / 5040 + y * (4.0 / 362880 +
                                                                         y * (5.0 / 39916800 + y * (6.0 / 6227020800.0))))));
    } else {
        const cplx k = std::sqrt(k2);
        const cplx E = std::exp(k * h);
        const cplx Ei = 1.0 / E;
        C = 0.5 * (E + Ei);
        S = (E - Ei) / (2.0 * k);
        if (dS_dk2) *dS_dk2 = (h * C - S) / (2.0 * k2);
    }
}

inline double l1(cplx z) { return std::abs(z.real()) + std::abs(z.imag()); }

struct ScanResult {
    cplx a, b, ap;
};

// Piecewise-constant transfer matrix over the samples k = 0, stride, 2 stride, ...
// Each sample owns the cell [t_k - h/2, t_k + h/2].
ScanResult scan(const Signal& sig, std::size_t stride, cplx lam, bool deriv) {
    const auto& q = sig.samples();
    const auto& g = sig.grid();
    const double h = g.dt * static_cast<double>(stride);
    const std::size_t last = ((g.n - 1) / stride) * stride;
    const double TL = g.t_start - 0.5 * h;
    const double TR = g.t(last) + 0.5 * h;

    cplx L = -J * lam * TL;  // running log scale
    cplx v1 = 1.0, v2 = 0.0, w1 = -J * TL, w2 = 0.0;
    const cplx lam2 = lam * lam;
    const cplx jl = J * lam;

    for (std::size_t k = 0; k <= last; k += stride) {
        const cplx qk = q[k];
        const cplx k2 = -lam2 - std::norm(qk);
        cplx C, S, dS2;
        cosh_sinhc(k2, h, C, S, deriv ? &dS2 : nullptr);
        const cplx t11 = C - jl * S, t22 = C + jl * S;
        const cplx t12 = S * qk, t21 = -S * std::conj(qk);
        if (deriv) {
            const cplx dC = -lam * h * S;
            const cplx dS = -2.0 * lam * dS2;
            const cplx d11 = dC - J * S - jl * dS, d22 = dC + J * S + jl * dS;
            const cplx d12 = dS * qk, d21 = -dS * std::conj(qk);
            const cplx nw1 = t11 * w1 + t12 * w2 + d11 * v1 + d12 * v2;
            const cplx nw2 = t21 * w1 + t22 * w2 + d21 * v1 + d22 * v2;
            w1 = nw1;
            w2 = nw2;
        }
        const cplx nv1 = t11 * v1 + t12 * v2;
        const cplx nv2 = t21 * v1 + t22 * v2;
        v1 = nv1;
        v2 = nv2;
        double m = std::max(l1(v1), l1(v2));
        if (deriv) m = std::max(m, std::max(l1(w1), l1(w2)));
        if (m > 1e64 || m < 1e-64) {
            if (!(m > 0) || !std::isfinite(m))
                throw ScatteringOverflow("scattering overflow: integrate on a rescaled window or reduce Im(lambda)");
            v1 /= m;
            v2 /= m;
            w1 /= m;
            w2 /= m;
            L += std::log(m);
        }
    }
    ScanResult r;
    const cplx ea = std::exp(L + J * lam * TR);
    const cplx eb = std::exp(L - J * lam * TR);
    r.a = v1 * ea;
    r.b = v2 * eb;
    r.ap = deriv ? (w1 + J * TR * v1) * ea : cplx(0.0);
    return r;
}

// Proportionality constant b in phi = b psi at a (near) zero of a, phi the left
// Jost solution integrated forward and psi the right one integrated backward.
// Matching inside the bound state avoids the blow-up of forward-only b for
// multi-solitons, where a tiny residual a couples through slow pulse tails.
cplx bound_state_b(const Signal& sig, std::size_t stride, cplx lam) {
    const auto& q = sig.samples();
    const auto& g = sig.grid();
    const double h = g.dt * static_cast<double>(stride);
    const std::size_t last = ((g.n - 1) / stride) * stride;
    const std::size_t cells = last / stride + 1;
    const double TL = g.t_start - 0.5 * h;
    const double TR = g.t(last) + 0.5 * h;
    const cplx lam2 = lam * lam;
    const cplx jl = J * lam;

    struct St {
        cplx u1, u2, L;
    };
    auto logmag = [](const St& s) { return s.L.real() + std::log(std::max(l1(s.u1), l1(s.u2))); };
    auto renorm = [](St& s) {
        double m = std::max(l1(s.u1), l1(s.u2));
        s.u1 /= m;
        s.u2 /= m;
        s.L += std::log(m);
    };
    std::vector<St> fwd(cells), bwd(cells);
    St s{1.0, 0.0, -J * lam * TL};
    for (std::size_t i = 0; i < cells; ++i) {
        const cplx qk = q[i * stride];
        cplx C, S;
        cosh_sinhc(-lam2 - std::norm(qk), h, C, S, nullptr);
        const cplx n1 = (C - jl * S) * s.u1 + S * qk * s.u2;
        const cplx n2 = -S * std::conj(qk) * s.u1 + (C + jl * S) * s.u2;
        s.u1 = n1;
        s.u2 = n2;
        renorm(s);
        fwd[i] = s;  // right edge of cell i
    }
    s = {0.0, 1.0, J * lam * TR};
    for (std::size_t i = cells; i-- > 0;) {
        bwd[i] = s;
        const cplx qk = q[i * stride];
        cplx C, S;
        cosh_sinhc(-lam2 - std::norm(qk), h, C, S, nullptr);
        const cplx n1 = (C + jl * S) * s.u1 - S * qk * s.u2;
        const cplx n2 = S * std::conj(qk) * s.u1 + (C - jl * S) * s.u2;
        s.u1 = n1;
        s.u2 = n2;
        renorm(s);
    }
    // |phi psi| is O(1) where the bound state lives and tiny wherever either
    // pass is dominated by its growing contamination
    double best = -1e300;
    std::size_t m = 0;
    for (std::size_t i = 0; i < cells; ++i) {
        double v = logmag(fwd[i]) + logmag(bwd[i]);
        if (v > best) {
            best = v;
            m = i;
        }
    }
    const St& f = fwd[m];
    const St& b = bwd[m];
    cplx num = f.u1 * std::conj(b.u1) + f.u2 * std::conj(b.u2);
    double den = std::norm(b.u1) + std::norm(b.u2);
    return std::exp(f.L - b.L) * num / den;
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void check_edges(const Signal& sig, const NftOptions& opts) {
    if (!std::isfinite(opts.edge_threshold)) return;
    double edge = sig.edge_magnitude();
    if (edge > opts.edge_threshold * sig.peak_magnitude()) throw GridTooNarrow(edge);
}

ScanResult combined(const Signal& sig, cplx lam, const NftOptions& opts, bool deriv) {
    if (!finite(lam)) throw ValidationError("lambda", "must be finite");
    int levels = std::clamp(opts.richardson, 0, 2);
    // at least 8 samples on the coarsest subgrid
    while (levels > 0 && (sig.size() >> levels) < 8) --levels;
    static const double w[3][3] = {{1.0, 0, 0}, {4.0 / 3, -1.0 / 3, 0}, {64.0 / 45, -20.0 / 45, 1.0 / 45}};
    ScanResult out{0.0, 0.0, 0.0};
    for (int l = 0; l <= levels; ++l) {
        ScanResult r = scan(sig, std::size_t{1} << l, lam, deriv);
        out.a += w[levels][l] * r.a;
        out.b += w[levels][l] * r.b;
        out.ap += w[levels][l] * r.ap;
    }
    if (!finite(out.a) || !finite(out.b) || !finite(out.ap))
        throw ScatteringOverflow("scattering overflow: integrate on a rescaled window or reduce Im(lambda)");
    return out;
}

// Q = b / a' extrapolated over the subgrid levels. Each level is evaluated at
// its own discrete zero so that Q_h is smooth in h.
cplx amplitude_at(const Signal& sig, cplx zeta, const NftOptions& opts) {
    int levels = std::clamp(opts.richardson, 0, 2);
    while (levels > 0 && (sig.size() >> levels) < 8) --levels;
    static const double w[3][3] = {{1.0, 0, 0}, {4.0 / 3, -1.0 / 3, 0}, {64.0 / 45, -20.0 / 45, 1.0 / 45}};
    cplx q = 0;
    for (int l = 0; l <= levels; ++l) {
        const std::size_t stride = std::size_t{1} << l;
        cplx z = zeta;
        ScanResult r = scan(sig, stride, z, true);
        for (int it = 0; it < 12; ++it) {
            cplx step = r.a / r.ap;
            if (!finite(step)) break;
            z -= step;
            r = scan(sig, stride, z, true);
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        q += w[levels][l] * (bound_state_b(sig, stride, z) / r.ap);
    }
    if (!finite(q)) throw ScatteringOverflow("scattering overflow while extracting spectral amplitude");
    return q;
}

}  // namespace

void DiscreteSpectrum::sort() {
    std::sort(entries.begin(), entries.end(), [](const SpectrumEntry& x, const SpectrumEntry& y) {
        if (x.zeta.imag() != y.zeta.imag()) return x.zeta.imag() < y.zeta.imag();
        return x.zeta.real() < y.zeta.real();
    });
}

std::vector<SolitonSpec> DiscreteSpectrum::to_specs() const {
    std::vector<SolitonSpec> s;
    for (const auto& e : entries) s.push_back({e.zeta, e.q_d});
    return s;
}

DiscreteSpectrum DiscreteSpectrum::from_specs(const std::vector<SolitonSpec>& specs) {
    DiscreteSpectrum d;
    for (const auto& s : specs) d.entries.push_back({s.zeta, s.q_d});
    d.sort();
    return d;
}

SearchRegion SearchRegion::parse(const std::string& text) {
    static const std::regex num(R"(\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*)");
    static const std::regex re(
        R"(^\s*re\s*:\s*[\[\(]([^,\]\)]+),([^\]\)]+)[\]\)]\s+im\s*:\s*[\[\(]([^,\]\)]+),([^\]\)]+)[\]\)]\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) throw ValidationError("search", "expected \"re:[lo,hi] im:(lo,hi]\", got '" + text + "'");
    auto to_d = [&](const std::string& s) {
        std::smatch mm;
        if (!std::regex_match(s, mm, num)) throw ValidationError("search", "bad number '" + s + "'");
        return std::stod(mm[1]);
    };
    SearchRegion r{to_d(m[1]), to_d(m[2]), to_d(m[3]), to_d(m[4])};
    r.validate();
    return r;
}

SearchRegion SearchRegion::around(const std::vector<cplx>& zetas, double pad, double im_floor) {
    if (zetas.empty()) throw ValidationError("zetas", "empty");
    SearchRegion r{1e300, -1e300, im_floor, 0};
    for (auto z : zetas) {
        r.re_lo = std::min(r.re_lo, z.real() - pad);
        r.re_hi = std::max(r.re_hi, z.real() + pad);
        r.im_hi = std::max(r.im_hi, z.imag() + pad);
    }
    r.validate();
    return r;
}

bool SearchRegion::contains(cplx z, double margin) const {
    return z.real() >= re_lo - margin && z.real() <= re_hi + margin && z.imag() > std::max(im_lo - margin, 0.0) &&
           z.imag() <= im_hi + margin;
}

void SearchRegion::validate() const {
    if (!(re_hi > re_lo)) throw ValidationError("search", "re range empty");
    if (!(im_hi > im_lo)) throw ValidationError("search", "im range empty");
    if (im_lo < 0) throw ValidationError("search", "must lie in the closed upper half plane");
    if (!std::isfinite(re_lo + re_hi + im_lo + im_hi)) throw ValidationError("search", "must be finite");
}

std::string SearchRegion::str() const {
    std::ostringstream os;
    os << "re:[" << re_lo << "," << re_hi << "] im:(" << im_lo << "," << im_hi << "]";
    return os.str();
}

ScatteringCoefficients scatter(const Signal& sig, cplx lambda, const NftOptions& opts) {
    check_edges(sig, opts);
    auto r = combined(sig, lambda, opts, true);
    return {lambda, r.a, r.b, r.ap};
}

cplx scatter_a(const Signal& sig, cplx lambda, const NftOptions& opts) {
    check_edges(sig, opts);
    return combined(sig, lambda, opts, false).a;
}

cplx spectral_amplitude(const Signal& sig, cplx zeta, const NftOptions& opts) {
    check_edges(sig, opts);
    return amplitude_at(sig, zeta, opts);
}

ContinuousSpectrum continuous_spectrum(const Signal& sig, const std::vector<double>& lambdas, const NftOptions& opts) {
    check_edges(sig, opts);
    ContinuousSpectrum cs;
    cs.lambdas = lambdas;
    cs.q_c.reserve(lambdas.size());
    for (double l : lambdas) {
        auto r = combined(sig, cplx(l, 0.0), opts, false);
        cs.q_c.push_back(std::abs(r.a) > 1e-12 ? r.b / r.a : cplx(std::numeric_limits<double>::quiet_NaN()));
    }
    return cs;
}

int count_eigenvalues(const Signal& sig, const SearchRegion& region, const NftOptions& opts_in) {
    region.validate();
    check_edges(sig, opts_in);
    NftOptions opts = opts_in;
    opts.richardson = 0;  // the count only needs the plain discretization
    auto eval = [&](cplx z) {
        cplx a = combined(sig, z, opts, false).a;
        if (std::abs(a) < 1e-12)
            throw Error("eigenvalue on the search contour near " + std::to_string(z.real()) + "+" +
                        std::to_string(z.imag()) + "j; move the region boundary");
        return a;
    };
    // adaptive phase tracking between two contour points
    auto walk = [&](auto&& self, cplx p0, cplx a0, cplx p1, cplx a1, int depth) -> double {
        double d = std::arg(a1 / a0);
        if (std::abs(d) < kPi / 4 || depth >= 30) return d;
        cplx pm = 0.5 * (p0 + p1);
        cplx am = eval(pm);
        return self(self, p0, a0, pm, am, depth + 1) + self(self, pm, am, p1, a1, depth + 1);
    };
    const cplx c[5] = {{region.re_lo, region.im_lo},
                       {region.re_hi, region.im_lo},
                       {region.re_hi, region.im_hi},
                       {region.re_lo, region.im_hi},
                       {region.re_lo, region.im_lo}};
    constexpr int kPts = 48;
    double total = 0;
    cplx a_first = eval(c[0]);
    cplx p_prev = c[0], a_prev = a_first;
    for (int e = 0; e < 4; ++e) {
        for (int i = 1; i <= kPts; ++i) {
            cplx p = c[e] + (c[e + 1] - c[e]) * (static_cast<double>(i) / kPts);
            cplx a = (e == 3 && i == kPts) ? a_first : eval(p);
            total += walk(walk, p_prev, a_prev, p, a, 0);
            p_prev = p;
            a_prev = a;
        }
    }
    double wind = total / (2 * kPi);
    double k = std::round(wind);
    if (std::abs(wind - k) > 0.2) throw Error("argument principle did not resolve: winding " + std::to_string(wind));
    return static_cast<int>(k);
}

DiscreteSpectrum find_discrete_spectrum(const Signal& sig, const SearchRegion& region,
                                        std::optional<std::size_t> expected_count, const std::vector<cplx>& guesses,
                                        const NftOptions& opts) {
    region.validate();
    check_edges(sig, opts);
    int counted = -1;
    if (opts.verify_count) counted = count_eigenvalues(sig, region, opts);
    const bool know_target = counted >= 0 || expected_count.has_value();
    const std::size_t target = counted >= 0 ? static_cast<std::size_t>(counted) : expected_count.value_or(0);

    DiscreteSpectrum out;
    std::vector<cplx> roots;
    cplx last_iterate = 0;
    const double size = std::max(region.re_hi - region.re_lo, region.im_hi - region.im_lo);

    auto newton = [&](cplx z) {
        for (int it = 0; it < opts.max_newton_iter; ++it) {
            auto r = combined(sig, z, opts, true);
            last_iterate = z;
            if (std::abs(r.a) < opts.newton_tol) {
                if (!region.contains(z)) return;
                for (auto x : roots)
                    if (std::abs(x - z) < opts.dedup_radius) return;
                roots.push_back(z);
                out.entries.push_back({z, amplitude_at(sig, z, opts)});
                return;
            }
            cplx g = r.ap / r.a;
            for (auto x : roots) g -= 1.0 / (z - x);
            if (!finite(g) || std::abs(g) == 0) return;
            cplx step = 1.0 / g;
            double cap = 0.25 * size;
            if (std::abs(step) > cap) step *= cap / std::abs(step);
            z -= step;
            if (!region.contains(z, 0.25 * size)) return;
        }
    };

    auto done = [&] { return know_target && roots.size() >= target; };
    for (auto g : guesses) {
        if (done()) break;
        if (region.contains(g, 0.1 * size)) newton(g);
    }
    for (int m : {4, 8, 16}) {
        if (done()) break;
        if (know_target && target == 0) break;
        for (int i = 0; i < m && !done(); ++i)
            for (int k = 0; k < m && !done(); ++k) {
                cplx z0(region.re_lo + (region.re_hi - region.re_lo) * (i + 0.5) / m,
                        region.im_lo + (region.im_hi - region.im_lo) * (k + 0.5) / m);
                newton(z0);
            }
        if (!know_target) break;
    }

    out.sort();
    if (counted >= 0 && roots.size() < target) {
        if (expected_count && *expected_count != target) {
            std::vector<cplx> found;
            for (const auto& e : out.entries) found.push_back(e.zeta);
            throw SpectrumCountMismatch(*expected_count, found);
        }
        throw RootRefinementFailed(last_iterate);
    }
    if (expected_count && out.size() != *expected_count) {
        std::vector<cplx> found;
        for (const auto& e : out.entries) found.push_back(e.zeta);
        throw SpectrumCountMismatch(*expected_count, found);
    }
    return out;
}

DiscreteSpectrum evolve_spectrum(const DiscreteSpectrum& spec, double z) {
    if (!(z >= 0)) throw ValidationError("z", "must be >= 0");
    DiscreteSpectrum out = spec;
    for (auto& e : out.entries) {
        SolitonSpec s{e.zeta, e.q_d};
        e.q_d = std::polar(std::exp(log_mag_at(s, z)), phase_at(s, z));
    }
    return out;
}

std::string spectrum_to_json(const DiscreteSpectrum& spec) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : spec.entries)
        arr.push_back({{"zeta_re", e.zeta.real()},
                       {"zeta_im", e.zeta.imag()},
                       {"qd_re", e.q_d.real()},
                       {"qd_im", e.q_d.imag()}});
    return arr.dump();
}

DiscreteSpectrum spectrum_from_json(const std::string& text) {
    DiscreteSpectrum d;
    try {
        auto arr = nlohmann::json::parse(text);
        for (const auto& r : arr)
            d.entries.push_back({cplx(r.at("zeta_re").get<double>(), r.at("zeta_im").get<double>()),
                                 cplx(r.at("qd_re").get<double>(), r.at("qd_im").get<double>())});
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("spectrum json", e.what());
    }
    d.sort();
    return d;
}

}  // namespace nsd
