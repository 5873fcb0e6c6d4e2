#include "nsd/ssfm.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "nsd/error.hpp"

namespace nsd {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW's planner is not thread safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place forward/backward pair. ESTIMATE keeps plans, hence results, reproducible.
class FftPair {
public:
    explicit FftPair(std::size_t n) : n_(n) {
        buf_ = fftw_alloc_complex(n);
        if (!buf_) throw std::bad_alloc();
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftPair() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    FftPair(const FftPair&) = delete;
    FftPair& operator=(const FftPair&) = delete;

    cplx* data() { return reinterpret_cast<cplx*>(buf_); }
    void forward() { fftw_execute(fwd_); }
    void backward() { fftw_execute(bwd_); }  // unnormalized
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

}  // namespace

double PropagationConfig::eps() const { return std::sqrt(eps2); }

long PropagationConfig::steps() const {
    if (total_z == 0) return 0;
    return std::max(1L, static_cast<long>(std::ceil(total_z / dz - 1e-9)));
}

double PropagationConfig::step() const {
    long k = steps();
    return k ? total_z / static_cast<double>(k) : dz;
}

void PropagationConfig::validate() const {
    if (!(dz > 0) || !std::isfinite(dz)) throw ValidationError("dz", "must be > 0");
    if (!(total_z >= 0) || !std::isfinite(total_z)) throw ValidationError("total_z", "must be >= 0");
    if (!(eps2 >= 0) || !std::isfinite(eps2)) throw ValidationError("eps2", "must be >= 0");
}

PropagationConfig PropagationConfig::from_config(const KvConfig& cfg) {
    PropagationConfig p;
    p.dz = cfg.get_double("dz", p.dz);
    p.total_z = cfg.get_double("total_z", p.total_z);
    p.eps2 = cfg.get_double("eps2", p.eps2);
    p.seed = cfg.get_u64("seed", p.seed);
    p.noise_on = cfg.get_bool("noise_on", p.eps2 > 0);
    p.validate();
    return p;
}

Signal propagate(const Signal& sig, const PropagationConfig& cfg) {
    Engine rng(cfg.seed);
    return propagate(sig, cfg, rng);
}

Signal propagate(const Signal& sig, const PropagationConfig& cfg, Engine& rng) {
    cfg.validate();
    const long K = cfg.steps();
    if (K == 0) return sig;
    const auto& g = sig.grid();
    const std::size_t n = g.n;
    const double h = cfg.step();
    const double peak = sig.peak_magnitude();
    if (peak * peak * h > 0.1) warn("split step does not resolve the nonlinear length: max|q|^2 dz = " +
                                    std::to_string(peak * peak * h));

    // j q_z = q_tt: each Fourier mode e^{j w t} evolves as e^{j w^2 z} (forward FFT uses e^{-j w t})
    std::vector<cplx> half(n);
    const double dw = 2 * kPi / (static_cast<double>(n) * g.dt);
    for (std::size_t k = 0; k < n; ++k) {
        double w = dw * (k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n));
        half[k] = std::polar(1.0, w * w * h / 2);
    }
    const bool noisy = cfg.noise_on && cfg.eps2 > 0;
    // time-domain per-component variance eps^2 h / (2 dt); the unnormalized DFT multiplies it by n
    const double sd = std::sqrt(static_cast<double>(n) * cfg.eps2 * h / (2 * g.dt));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double inv_n = 1.0 / static_cast<double>(n);

    FftPair fft(n);
    cplx* x = fft.data();
    std::copy(sig.samples().begin(), sig.samples().end(), x);
    fft.forward();
    for (std::size_t k = 0; k < n; ++k) x[k] *= half[k];
    for (long s = 0; s < K; ++s) {
        fft.backward();
        bool ok = true;
        for (std::size_t k = 0; k < n; ++k) {
            cplx v = x[k] * inv_n;
            double p = std::norm(v);
            ok &= std::isfinite(p);
            double ph = -2.0 * p * h;
            x[k] = v * cplx(std::cos(ph), std::sin(ph));
        }
        if (!ok) throw BlowUp(s);
        fft.forward();
        for (std::size_t k = 0; k < n; ++k) x[k] *= half[k];
        if (noisy) {
            for (std::size_t k = 0; k < n; ++k) {
                double re = gauss(rng);
                double im = gauss(rng);
                x[k] += sd * cplx(re, im);
            }
        }
        if (s + 1 < K)
            for (std::size_t k = 0; k < n; ++k) x[k] *= half[k];
    }
    fft.backward();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = x[k] * inv_n;
        if (!std::isfinite(out[k].real()) || !std::isfinite(out[k].imag())) throw BlowUp(K);
    }
    return Signal(g, std::move(out), sig.z() + cfg.total_z);
}

namespace {

// assignment of found to reference eigenvalues minimizing total distance
std::vector<std::size_t> match(const std::vector<cplx>& ref, const std::vector<cplx>& found) {
    const std::size_t N = ref.size();
    std::vector<std::size_t> perm(N), best;
    for (std::size_t i = 0; i < N; ++i) perm[i] = i;
    if (N <= 7) {
        double best_cost = 1e300;
        do {
            double c = 0;
            for (std::size_t i = 0; i < N; ++i) c += std::abs(ref[i] - found[perm[i]]);
            if (c < best_cost) {
                best_cost = c;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    std::vector<bool> used(N, false);
    best.assign(N, 0);
    for (std::size_t i = 0; i < N; ++i) {
        double bd = 1e300;
        for (std::size_t k = 0; k < N; ++k)
            if (!used[k] && std::abs(ref[i] - found[k]) < bd) {
                bd = std::abs(ref[i] - found[k]);
                best[i] = k;
            }
        used[best[i]] = true;
    }
    return best;
}

}  // namespace

std::vector<EigenNoise> measure_against_reference(const DiscreteSpectrum& reference, const Signal& out_sig,
                                                  const MeasureOptions& opts) {
    if (reference.entries.empty()) return {};
    std::vector<cplx> zr;
    double bmin = 1e300;
    for (const auto& e : reference.entries) {
        zr.push_back(e.zeta);
        bmin = std::min(bmin, e.zeta.imag());
    }
    const double pad = opts.pad_fraction * bmin;
    auto region = SearchRegion::around(zr, pad, bmin - pad);
    DiscreteSpectrum found;
    try {
        // canonical guess order keeps results independent of the reference ordering
        std::vector<cplx> guesses = zr;
        std::sort(guesses.begin(), guesses.end(), [](cplx a, cplx b) {
            return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
        });
        found = find_discrete_spectrum(out_sig, region, zr.size(), guesses, opts.nft);
    } catch (const SpectrumCountMismatch& e) {
        throw EigenvalueCountChanged(zr.size(), e.found().size());
    }
    std::vector<cplx> zf;
    for (const auto& e : found.entries) zf.push_back(e.zeta);
    auto perm = match(zr, zf);
    std::vector<EigenNoise> out;
    for (std::size_t i = 0; i < zr.size(); ++i) {
        const auto& r = reference.entries[i];
        const auto& f = found.entries[perm[i]];
        EigenNoise en;
        en.zeta_ref = r.zeta;
        en.zeta_out = f.zeta;
        en.qd_ref = r.q_d;
        en.qd_out = f.q_d;
        en.ups_R = f.zeta.real() - r.zeta.real();
        en.ups_I = f.zeta.imag() - r.zeta.imag();
        en.d_ln_mag = std::log(std::abs(f.q_d)) - std::log(std::abs(r.q_d));
        en.d_phase = wrap_phase(std::arg(f.q_d) - std::arg(r.q_d));
        out.push_back(en);
    }
    return out;
}

std::vector<EigenNoise> measure_eigen_noise(const DiscreteSpectrum& input_spec, const Signal& out_sig,
                                            const MeasureOptions& opts) {
    return measure_against_reference(evolve_spectrum(input_spec, out_sig.z()), out_sig, opts);
}

}  // namespace nsd
