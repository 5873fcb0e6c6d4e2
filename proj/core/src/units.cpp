#include "nsd/units.hpp"

#include <cmath>

#include "nsd/error.hpp"

namespace nsd {

namespace {
void need_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw ValidationError(name, "must be finite");
}
}  // namespace

void FiberParams::validate() const {
    need_finite(alpha_loss, "alpha_loss");
    need_finite(planck_h, "planck_h");
    need_finite(nu_s, "nu_s");
    need_finite(K_T, "K_T");
    need_finite(gamma_nl, "gamma_nl");
    need_finite(beta2, "beta2");
    need_finite(L_n, "L_n");
    if (alpha_loss <= 0) throw ValidationError("alpha_loss", "must be > 0");
    if (planck_h <= 0) throw ValidationError("planck_h", "must be > 0");
    if (nu_s <= 0) throw ValidationError("nu_s", "must be > 0");
    if (K_T <= 0) throw ValidationError("K_T", "must be > 0");
    if (gamma_nl <= 0) throw ValidationError("gamma_nl", "must be > 0");
    if (beta2 >= 0) throw ValidationError("beta2", "must be < 0 (anomalous dispersion)");
    if (L_n <= 0) throw ValidationError("L_n", "must be > 0");
}

FiberParams FiberParams::from_config(const KvConfig& cfg) {
    cfg.require_known({"alpha_loss", "planck_h", "nu_s", "K_T", "gamma_nl", "beta2", "L_n"});
    FiberParams p;
    p.alpha_loss = cfg.get_double("alpha_loss", p.alpha_loss);
    p.planck_h = cfg.get_double("planck_h", p.planck_h);
    p.nu_s = cfg.get_double("nu_s", p.nu_s);
    p.K_T = cfg.get_double("K_T", p.K_T);
    p.gamma_nl = cfg.get_double("gamma_nl", p.gamma_nl);
    p.beta2 = cfg.get_double("beta2", p.beta2);
    p.L_n = cfg.get_double("L_n", p.L_n);
    p.validate();
    return p;
}

FiberParams FiberParams::load(const std::string& path) { return from_config(KvConfig::load(path)); }

NormalizedUnits normalize(const FiberParams& p) {
    p.validate();
    NormalizedUnits u;
    u.L_n = p.L_n;
    u.P_n = 2.0 / (p.gamma_nl * p.L_n);
    u.T_n = std::sqrt(std::abs(p.beta2) * p.L_n / 2.0);
    u.kappa2 = p.alpha_loss * p.planck_h * p.nu_s * p.K_T;
    // noise term scales as kappa * sqrt(L_n / (P_n T_n)) after normalization
    u.eps2 = u.kappa2 * p.L_n / (u.P_n * u.T_n);
    return u;
}

std::complex<double> to_normalized_field(std::complex<double> A, const NormalizedUnits& u) {
    return A / std::sqrt(u.P_n);
}

std::complex<double> to_physical_field(std::complex<double> q, const NormalizedUnits& u) {
    return q * std::sqrt(u.P_n);
}

double power_to_beta(double power_W, const NormalizedUnits& u, double separation_fwhm, double fwhm) {
    if (!(power_W > 0) || !std::isfinite(power_W)) throw ValidationError("power_W", "must be > 0");
    if (!(separation_fwhm > 0)) throw ValidationError("separation_fwhm", "must be > 0");
    // P = P_n * 4 beta / (sep * fwhm / (2 beta)); soliton energy 4 beta
    return std::sqrt(power_W * separation_fwhm * fwhm / (8.0 * u.P_n));
}

double beta_to_power(double beta, const NormalizedUnits& u, double separation_fwhm, double fwhm) {
    if (!(beta > 0)) throw ValidationError("beta", "must be > 0");
    if (!(separation_fwhm > 0)) throw ValidationError("separation_fwhm", "must be > 0");
    return u.P_n * 4.0 * beta / (separation_fwhm * fwhm / (2.0 * beta));
}

}  // namespace nsd
