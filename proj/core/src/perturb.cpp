#include "nsd/perturb.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "nsd/error.hpp"

namespace nsd {

namespace {
constexpr double kPi = std::numbers::pi;

// linear interpolation on a uniform or non-uniform ascending grid
double interp(const std::vector<double>& z, const std::vector<double>& f, double x) {
    if (x <= z.front()) return f.front();
    if (x >= z.back()) return f.back();
    auto it = std::upper_bound(z.begin(), z.end(), x);
    std::size_t k = static_cast<std::size_t>(it - z.begin());
    double w = (x - z[k - 1]) / (z[k] - z[k - 1]);
    return f[k - 1] + w * (f[k] - f[k - 1]);
}

void check_spec_matches(const PerturbationPath& path, const SolitonSpec& spec0) {
    spec0.validate();
    double tol = 1e-12 * std::max(1.0, std::abs(spec0.zeta));
    if (std::abs(path.state0.alpha - spec0.alpha()) > tol || std::abs(path.state0.beta - spec0.beta()) > tol)
        throw ValidationError("spec0", "eigenvalue differs from the path's initial state");
}
}  // namespace

void SolitonState::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(T0) || !std::isfinite(theta))
        throw ValidationError("state", "non-finite component");
    if (!(beta > 0)) throw ValidationError("beta", "must be > 0");
}

SolitonState SolitonState::from_spec(const SolitonSpec& spec, double z) {
    spec.validate();
    SolitonState s;
    s.alpha = spec.alpha();
    s.beta = spec.beta();
    s.T0 = center_at(spec, z);
    s.theta = -2 * s.alpha * s.T0 - phase_at(spec, z) - kPi / 2;
    return s;
}

KernelVariances kernel_variances(double beta) {
    if (!(beta > 0)) throw ValidationError("beta", "must be > 0");
    return {beta / 6.0, beta / 2.0, kPi * kPi / (96.0 * beta * beta * beta), (kPi * kPi + 12.0) / (72.0 * beta)};
}

void PerturbationPath::validate() const {
    const std::size_t n = z.size();
    if (n < 2) throw ValidationError("path", "needs at least two samples");
    if (ups_R.size() != n || ups_I.size() != n || nu_I.size() != n) throw ValidationError("path", "track length mismatch");
    if (z.front() != 0.0) throw ValidationError("path", "must start at z = 0");
    for (std::size_t k = 1; k < n; ++k)
        if (!(z[k] > z[k - 1])) throw ValidationError("path", "z grid must increase");
    if (ups_R[0] != 0.0 || ups_I[0] != 0.0) throw ValidationError("path", "must start at zero perturbation");
}

PerturbationPath PerturbationPath::from_samples(std::vector<double> z, std::vector<double> ups_R,
                                                std::vector<double> ups_I, double eps2, SolitonState state0) {
    PerturbationPath p;
    p.eps2 = eps2;
    p.state0 = state0;
    p.z = std::move(z);
    p.ups_R = std::move(ups_R);
    p.ups_I = std::move(ups_I);
    p.nu_I.resize(p.z.size());
    for (std::size_t k = 0; k < p.z.size() && k < p.ups_I.size(); ++k) p.nu_I[k] = p.ups_I[k] - 0.5 * eps2 * p.z[k];
    p.validate();
    return p;
}

PerturbationPath simulate_soliton_sde(const SolitonState& state0, const PropagationConfig& cfg) {
    Engine rng(cfg.seed);
    return simulate_soliton_sde(state0, cfg, rng);
}

PerturbationPath simulate_soliton_sde(const SolitonState& s0, const PropagationConfig& cfg, Engine& rng) {
    s0.validate();
    cfg.validate();
    const long K = std::max(1L, cfg.steps());
    const double h = cfg.total_z > 0 ? cfg.total_z / static_cast<double>(K) : 0.0;
    const bool noisy = cfg.noise_on && cfg.eps2 > 0;
    const double eps = noisy ? cfg.eps() : 0.0;
    const double e2 = noisy ? cfg.eps2 : 0.0;
    if (noisy && eps * std::sqrt(h) > 0.1 * s0.beta)
        warn("SDE step too coarse: eps sqrt(dz) = " + std::to_string(eps * std::sqrt(h)) + " vs beta0 = " +
             std::to_string(s0.beta));

    PerturbationPath p;
    p.eps2 = e2;
    p.state0 = s0;
    const std::size_t n = static_cast<std::size_t>(K) + 1;
    for (auto* v : {&p.z, &p.ups_R, &p.ups_I, &p.nu_I, &p.T0, &p.theta, &p.delta_int}) v->resize(n);

    double a = s0.alpha, b = s0.beta, T = s0.T0, th = s0.theta, D = 0;
    p.T0[0] = T;
    p.theta[0] = th;
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sh = std::sqrt(h);
    for (long k = 0; k < K; ++k) {
        double da = 0, db = 0, dD = 0, dth = 0;
        if (noisy) {
            auto kv = kernel_variances(b);
            da = eps * std::sqrt(kv.alpha) * sh * gauss(rng);
            db = eps * std::sqrt(kv.beta) * sh * gauss(rng);
            dD = eps * std::sqrt(kv.delta) * sh * gauss(rng);
            dth = eps * std::sqrt(kv.theta) * sh * gauss(rng);
        }
        // Ito: coefficients at the start of the step
        double Tn = T + 4 * a * h + dD;
        double thn = th - 4 * (a * a + b * b) * h + dth + 2 * a * dD;
        double an = a + da;
        double bn = b + 0.5 * e2 * h + db;
        a = an;
        b = bn;
        T = Tn;
        th = thn;
        D += dD;
        const std::size_t i = static_cast<std::size_t>(k) + 1;
        const double z = h * static_cast<double>(i);
        if (!(b > 0)) throw SolitonCollapse(z);
        p.z[i] = z;
        p.ups_R[i] = a - s0.alpha;
        p.ups_I[i] = b - s0.beta;
        p.nu_I[i] = p.ups_I[i] - 0.5 * e2 * z;
        p.T0[i] = T;
        p.theta[i] = th;
        p.delta_int[i] = D;
    }
    return p;
}

double trapezoid(const std::vector<double>& z, const std::vector<double>& f) {
    double s = 0;
    for (std::size_t k = 1; k < z.size(); ++k) s += 0.5 * (z[k] - z[k - 1]) * (f[k] + f[k - 1]);
    return s;
}

AmplitudeChannelSample magnitude_channel(const PerturbationPath& path, const SolitonSpec& spec0) {
    path.validate();
    check_spec_matches(path, spec0);
    const double L = path.length();
    const double a0 = spec0.alpha(), b0 = spec0.beta();
    std::vector<double> ri(path.size()), r2mi2(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
        ri[k] = path.ups_R[k] * path.ups_I[k];
        r2mi2[k] = path.ups_R[k] * path.ups_R[k] - path.ups_I[k] * path.ups_I[k];
    }
    AmplitudeChannelSample s;
    s.I_R = trapezoid(path.z, path.ups_R);
    s.I_I = trapezoid(path.z, path.ups_I);
    s.I_RI = trapezoid(path.z, ri);
    s.I_R2mI2 = trapezoid(path.z, r2mi2);
    s.ln_mag_in = log_mag_at(spec0, L);
    s.ln_mag_out = s.ln_mag_in + 8 * a0 * s.I_I + 8 * b0 * s.I_R + 8 * s.I_RI;
    const double ph = phase_at(spec0, L);
    s.phase_in = wrap_phase(ph);
    s.phase_out = wrap_phase(ph - 8 * a0 * s.I_R + 8 * b0 * s.I_I - 4 * s.I_R2mI2);
    return s;
}

AmplitudeChannelSample concatenate_model(const PerturbationPath& path, const SolitonSpec& spec0, int m) {
    if (m < 1) throw ValidationError("m", "must be >= 1");
    path.validate();
    check_spec_matches(path, spec0);
    const double L = path.length();
    const double w = L / m;
    const double a0 = spec0.alpha(), b0 = spec0.beta();
    AmplitudeChannelSample s;
    // accumulate the exponent of prod exp(-4j (zeta0 + ups_k)^2 w) beyond the noiseless part
    for (int k = 0; k < m; ++k) {
        double zk = w * k;
        double r = interp(path.z, path.ups_R, zk);
        double i = interp(path.z, path.ups_I, zk);
        s.I_R += r * w;
        s.I_I += i * w;
        s.I_RI += r * i * w;
        s.I_R2mI2 += (r * r - i * i) * w;
    }
    s.ln_mag_in = log_mag_at(spec0, L);
    s.ln_mag_out = s.ln_mag_in + 8 * a0 * s.I_I + 8 * b0 * s.I_R + 8 * s.I_RI;
    const double ph = phase_at(spec0, L);
    s.phase_in = wrap_phase(ph);
    s.phase_out = wrap_phase(ph - 8 * a0 * s.I_R + 8 * b0 * s.I_I - 4 * s.I_R2mI2);
    return s;
}

PerturbationComponents perturbation_model(const PerturbationPath& path, const SolitonSpec& spec0) {
    path.validate();
    if (!path.has_tracks()) throw ValidationError("path", "missing T0 / Delta tracks");
    check_spec_matches(path, spec0);
    const double L = path.length();
    const double a0 = spec0.alpha(), b0 = spec0.beta();
    const double uI = path.ups_I.back();
    const double D = path.delta_int.back();
    const double IR = trapezoid(path.z, path.ups_R);
    const double II = trapezoid(path.z, path.ups_I);
    const double T00 = center_at(spec0, 0.0);
    PerturbationComponents c;
    c.N11 = 2 * b0 * D;
    c.N12 = 2 * uI * T00;
    c.N13 = std::log((b0 + uI) / b0);
    c.N1 = c.N11 + c.N12 + c.N13;
    c.N2 = 2 * uI * D;
    c.N31 = 8 * L * a0 * uI;
    c.N32 = 8 * b0 * IR;
    c.N3 = c.N31 + c.N32;
    c.N4 = 8 * uI * IR;
    c.N0 = 8 * a0 * II + 8 * b0 * IR;
    return c;
}

std::string AmplitudeChannelSample::to_json() const {
    nlohmann::json j = {{"ln_mag_in", ln_mag_in}, {"ln_mag_out", ln_mag_out}, {"phase_in", phase_in},
                        {"phase_out", phase_out}, {"I_R", I_R},           {"I_I", I_I},
                        {"I_RI", I_RI},           {"I_R2mI2", I_R2mI2},   {"N", N()}};
    return j.dump();
}

void write_path_csv(const PerturbationPath& path, const std::string& file) {
    std::ofstream f(file);
    if (!f) throw ValidationError("path", "cannot write " + file);
    f.precision(17);
    f << "z,ups_R,ups_I\n";
    for (std::size_t k = 0; k < path.size(); ++k) f << path.z[k] << "," << path.ups_R[k] << "," << path.ups_I[k] << "\n";
}

}  // namespace nsd
