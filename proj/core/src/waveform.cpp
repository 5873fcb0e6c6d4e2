#include "nsd/waveform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "nsd/error.hpp"

namespace nsd {

static_assert(std::endian::native == std::endian::little, "binary signal format assumes little-endian host");

namespace {
constexpr double kPi = std::numbers::pi;
constexpr cplx J{0.0, 1.0};

double sech(double x) {
    double ax = std::abs(x);
    if (ax > 700) return 0.0;
    return 1.0 / std::cosh(ax);
}

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }
}  // namespace

void TimeGrid::validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw ValidationError("dt", "must be > 0");
    if (n < 8) throw ValidationError("n", "must be >= 8");
    if (!is_pow2(n)) throw ValidationError("n", "must be a power of two");
    if (!std::isfinite(t_start)) throw ValidationError("t_start", "must be finite");
}

TimeGrid TimeGrid::centered(std::size_t n, double dt) {
    TimeGrid g{-static_cast<double>(n / 2) * dt, dt, n};
    g.validate();
    return g;
}

Signal::Signal(TimeGrid grid, std::vector<cplx> samples, double z)
    : grid_(grid), samples_(std::move(samples)), z_(z) {
    grid_.validate();
    if (samples_.size() != grid_.n) throw ValidationError("samples", "length differs from grid size");
    for (const auto& s : samples_)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw ValidationError("samples", "non-finite value");
    if (!std::isfinite(z_)) throw ValidationError("z", "must be finite");
}

double Signal::edge_magnitude() const { return std::max(std::abs(samples_.front()), std::abs(samples_.back())); }

double Signal::peak_magnitude() const {
    double m = 0;
    for (const auto& s : samples_) m = std::max(m, std::abs(s));
    return m;
}

void SolitonSpec::validate() const {
    if (!std::isfinite(zeta.real()) || !std::isfinite(zeta.imag())) throw ValidationError("zeta", "must be finite");
    if (!(zeta.imag() > 0)) throw ValidationError("zeta", "imaginary part must be > 0");
    if (!(std::abs(q_d) > 0) || !std::isfinite(std::abs(q_d))) throw ValidationError("q_d", "must be nonzero and finite");
}

SolitonSpec SolitonSpec::from_center(cplx zeta, double T0, double arg_qd) {
    double beta = zeta.imag();
    if (!(beta > 0)) throw ValidationError("zeta", "imaginary part must be > 0");
    return {zeta, std::polar(2.0 * beta * std::exp(2.0 * beta * T0), arg_qd)};
}

double log_mag_at(const SolitonSpec& s, double z) { return std::log(std::abs(s.q_d)) + 8.0 * s.alpha() * s.beta() * z; }

double phase_at(const SolitonSpec& s, double z) {
    double a = s.alpha(), b = s.beta();
    return std::arg(s.q_d) - 4.0 * (a * a - b * b) * z;
}

double center_at(const SolitonSpec& s, double z) {
    double b = s.beta();
    return (log_mag_at(s, z) - std::log(2.0 * b)) / (2.0 * b);
}

Signal make_soliton(const SolitonSpec& spec, double z, const TimeGrid& grid, double decay) {
    spec.validate();
    grid.validate();
    const double a = spec.alpha(), b = spec.beta();
    const double T0 = center_at(spec, z);
    const double ph0 = phase_at(spec, z) + kPi / 2;
    double edge = std::max(sech(2 * b * (grid.t_start - T0)), sech(2 * b * (grid.t_end() - T0)));
    if (edge >= decay) throw GridTooNarrow(2 * b * edge);
    std::vector<cplx> q(grid.n);
    for (std::size_t k = 0; k < grid.n; ++k) {
        double t = grid.t(k);
        q[k] = std::polar(2 * b * sech(2 * b * (t - T0)), -2 * a * t - ph0);
    }
    return Signal(grid, std::move(q), z);
}

namespace {
// log of a'(zeta_k) for the reflectionless a(l) = prod (l - z_i)/(l - conj z_i)
cplx log_aprime(const std::vector<SolitonSpec>& specs, std::size_t k) {
    cplx zk = specs[k].zeta;
    cplx acc = -std::log(zk - std::conj(zk));
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (i == k) continue;
        acc += std::log(zk - specs[i].zeta) - std::log(zk - std::conj(specs[i].zeta));
    }
    return acc;
}
}  // namespace

Signal make_nsoliton(const std::vector<SolitonSpec>& specs_in, double z, const TimeGrid& grid, double decay) {
    grid.validate();
    if (specs_in.empty()) return Signal(grid, std::vector<cplx>(grid.n, 0.0), z);
    for (const auto& s : specs_in) s.validate();
    const std::size_t N = specs_in.size();
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = i + 1; k < N; ++k) {
            double d = std::abs(specs_in[i].zeta - specs_in[k].zeta);
            if (d < 1e-9) throw ValidationError("specs", "duplicate eigenvalues");
            double scale = std::min(specs_in[i].beta(), specs_in[k].beta());
            if (d < 1e-2 * scale) warn("eigenvalues closer than 1% of the smaller imaginary part");
        }

    // add solitons in order of increasing beta
    std::vector<SolitonSpec> specs = specs_in;
    std::stable_sort(specs.begin(), specs.end(),
                     [](const SolitonSpec& x, const SolitonSpec& y) { return x.beta() < y.beta(); });

    // seed coefficient b_k = Q_k(z) a'(zeta_k); the seed is (e^{-j zeta t}, -b_k e^{j zeta t})
    std::vector<cplx> log_mb(N);
    for (std::size_t k = 0; k < N; ++k) {
        const auto& s = specs[k];
        cplx log_q{log_mag_at(s, z), phase_at(s, z)};
        log_mb[k] = log_q + log_aprime(specs, k) + cplx(0.0, kPi);
    }

    std::vector<cplx> q(grid.n);
    std::vector<cplx> p1(N), p2(N);
    for (std::size_t n = 0; n < grid.n; ++n) {
        const double t = grid.t(n);
        for (std::size_t k = 0; k < N; ++k) {
            cplx l1 = -J * specs[k].zeta * t;
            cplx l2 = log_mb[k] + J * specs[k].zeta * t;
            double m = std::max(l1.real(), l2.real());
            p1[k] = std::exp(l1 - m);
            p2[k] = std::exp(l2 - m);
        }
        cplx acc = 0;
        for (std::size_t m = 0; m < N; ++m) {
            const cplx zm = specs[m].zeta;
            const cplx f1 = p1[m], f2 = p2[m];
            const double n1 = std::norm(f1), n2 = std::norm(f2);
            const double del = n1 + n2;
            acc += 4.0 * zm.imag() * f1 * std::conj(f2) / del;
            if (m + 1 == N) break;
            const cplx d = zm - std::conj(zm);
            const cplx s11 = (zm * n1 + std::conj(zm) * n2) / del;
            const cplx s22 = (zm * n2 + std::conj(zm) * n1) / del;
            const cplx s12 = d * f1 * std::conj(f2) / del;
            const cplx s21 = d * f2 * std::conj(f1) / del;
            for (std::size_t k = m + 1; k < N; ++k) {
                const cplx zk = specs[k].zeta;
                cplx g1 = (zk - s11) * p1[k] - s12 * p2[k];
                cplx g2 = -s21 * p1[k] + (zk - s22) * p2[k];
                double nrm = std::max(std::abs(g1), std::abs(g2));
                p1[k] = g1 / nrm;
                p2[k] = g2 / nrm;
            }
        }
        q[n] = acc;
    }
    Signal sig(grid, std::move(q), z);
    double peak = sig.peak_magnitude();
    double edge = sig.edge_magnitude();
    if (edge >= decay * peak) throw GridTooNarrow(edge);
    return sig;
}

TimeGrid default_grid(const std::vector<SolitonSpec>& specs, double z) {
    if (specs.empty()) throw ValidationError("specs", "empty");
    double half = 0, bmax = 0, amax = 0, bmin = 1e300, cmin = 1e300, cmax = -1e300;
    for (const auto& s : specs) {
        s.validate();
        bmin = std::min(bmin, s.beta());
    }
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto& s = specs[k];
        double c = center_at(s, z);
        // interaction shift of the pulse relative to its nominal centre
        double shift = std::abs(log_aprime(specs, k).real() + std::log(2.0 * s.beta())) / (2 * s.beta());
        half = std::max(half, std::abs(c) + shift + 10.0 / s.beta());
        // exact tails: 2|Q_k| e^{-2 beta_k t} on the right, 2 / (|Q_k| |a'_k|^2) e^{2 beta_k t} on the left,
        // each brought down to e^{-20} of a 4 beta_min sech peak
        double lq = log_mag_at(s, z), la = log_aprime(specs, k).real();
        double floor = std::log(2.0 * bmin) - 20.0;
        double right = (lq - floor) / (2 * s.beta());
        double left = (-lq - 2 * la - floor) / (2 * s.beta());
        half = std::max({half, std::abs(right), std::abs(left)});
        bmax = std::max(bmax, s.beta());
        amax = std::max(amax, std::abs(s.alpha()));
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
    }
    double width = std::max(2 * half, 8 * (cmax - cmin));
    double dt_max = 0.05 / std::max(bmax, amax);
    std::size_t n = 8;
    while (width / static_cast<double>(n) > dt_max) n *= 2;
    return TimeGrid::centered(n, width / static_cast<double>(n));
}

double energy(const Signal& sig) {
    const auto& q = sig.samples();
    double s = 0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        double w = (k == 0 || k + 1 == q.size()) ? 0.5 : 1.0;
        s += w * std::norm(q[k]);
    }
    return s * sig.grid().dt;
}

void write_csv(const Signal& sig, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ValidationError("path", "cannot write " + path);
    f.precision(17);
    f << "t,re_q,im_q\n";
    for (std::size_t k = 0; k < sig.size(); ++k)
        f << sig.grid().t(k) << "," << sig[k].real() << "," << sig[k].imag() << "\n";
}

void write_binary(const Signal& sig, const std::string& path) {
    const auto& g = sig.grid();
    if (std::abs(g.t_start + static_cast<double>(g.n / 2) * g.dt) > 1e-9 * g.dt * static_cast<double>(g.n))
        warn("binary signal dump drops t_start; grid is not centred and will be re-centred on load");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("path", "cannot write " + path);
    std::uint64_t n = g.n;
    f.write(reinterpret_cast<const char*>(&n), 8);
    f.write(reinterpret_cast<const char*>(&g.dt), 8);
    f.write(reinterpret_cast<const char*>(sig.samples().data()), static_cast<std::streamsize>(16 * g.n));
    if (!f) throw ValidationError("path", "write failed for " + path);
}

Signal read_binary(const std::string& path, double z) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("path", "cannot open " + path);
    std::uint64_t n = 0;
    double dt = 0;
    f.read(reinterpret_cast<char*>(&n), 8);
    f.read(reinterpret_cast<char*>(&dt), 8);
    if (!f || n == 0 || n > (1ull << 32)) throw ValidationError("path", "bad header in " + path);
    std::vector<cplx> q(n);
    f.read(reinterpret_cast<char*>(q.data()), static_cast<std::streamsize>(16 * n));
    if (!f) throw ValidationError("path", "truncated signal file " + path);
    return Signal(TimeGrid::centered(n, dt), std::move(q), z);
}

double wrap_phase(double phi) {
    double w = phi - 2 * kPi * std::floor((phi + kPi) / (2 * kPi));
    if (w >= kPi) w -= 2 * kPi;
    if (w < -kPi) w += 2 * kPi;
    return w;
}

}  // namespace nsd
