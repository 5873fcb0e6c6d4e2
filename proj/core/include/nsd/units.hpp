#pragma once

#include <complex>
#include <string>

#include "nsd/kvconfig.hpp"

namespace nsd {

// Physical fibre constants. Defaults are the standard SSMF + distributed Raman set.
struct FiberParams {
    double alpha_loss = 0.046;       // km^-1
    double planck_h = 6.626e-34;     // J s
    double nu_s = 193.55e12;         // Hz
    double K_T = 1.13;               // photon occupancy factor
    double gamma_nl = 1.27;          // W^-1 km^-1
    double beta2 = -2e-23;           // s^2 / km
    double L_n = 1.0;                // km

    void validate() const;
    static FiberParams from_config(const KvConfig& cfg);
    static FiberParams load(const std::string& path);
};

struct NormalizedUnits {
    double P_n = 0;     // W
    double T_n = 0;     // s
    double L_n = 0;     // km
    double eps2 = 0;    // normalized noise PSD
    double kappa2 = 0;  // physical ASE PSD alpha h nu K_T, W / (km Hz)
};

NormalizedUnits normalize(const FiberParams& params);

// Field scaling q = A / sqrt(P_n).
std::complex<double> to_normalized_field(std::complex<double> A, const NormalizedUnits& u);
std::complex<double> to_physical_field(std::complex<double> q, const NormalizedUnits& u);

// FWHM of |sech(t)|^2 in units of its argument.
inline constexpr double kSechFwhm = 1.763;

// Average power of a soliton train with one soliton (energy 4 beta) every
// separation_fwhm FWHM widths; fwhm lets sensitivity tests perturb the constant.
double power_to_beta(double power_W, const NormalizedUnits& u, double separation_fwhm,
                     double fwhm = kSechFwhm);
double beta_to_power(double beta, const NormalizedUnits& u, double separation_fwhm,
                     double fwhm = kSechFwhm);

}  // namespace nsd
