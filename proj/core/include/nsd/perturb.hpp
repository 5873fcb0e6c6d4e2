#pragma once

#include <string>
#include <vector>

#include "nsd/rng.hpp"
#include "nsd/ssfm.hpp"
#include "nsd/waveform.hpp"

namespace nsd {

struct SolitonState {
    double alpha = 0;
    double beta = 0.5;
    double T0 = 0;
    double theta = 0;  // -2 alpha T0 - arg Q - pi/2

    void validate() const;
    static SolitonState from_spec(const SolitonSpec& spec, double z = 0.0);
};

// Per unit eps^2 dz variances of the Gaussian increments driven by the
// projections of circular white noise onto the soliton kernels.
struct KernelVariances {
    double alpha;  // sech * tanh kernel: beta / 6
    double beta;   // sech kernel: beta / 2
    double delta;  // (t - T0) sech kernel: pi^2 / (96 beta^3)
    double theta;  // sech (1 - u tanh u) kernel: (pi^2 + 12) / (72 beta)
};
KernelVariances kernel_variances(double beta);

struct PerturbationPath {
    double eps2 = 0;
    SolitonState state0;
    std::vector<double> z;
    std::vector<double> ups_R;
    std::vector<double> ups_I;
    std::vector<double> nu_I;
    std::vector<double> T0;
    std::vector<double> theta;
    std::vector<double> delta_int;  // running integral of Delta over z

    std::size_t size() const { return z.size(); }
    double length() const { return z.empty() ? 0.0 : z.back(); }
    bool has_tracks() const { return T0.size() == z.size() && delta_int.size() == z.size() && !z.empty(); }
    void validate() const;
    // Path from explicit samples (no T0 / Delta tracks), e.g. SSFM-measured.
    static PerturbationPath from_samples(std::vector<double> z, std::vector<double> ups_R,
                                         std::vector<double> ups_I, double eps2, SolitonState state0);
};

// Euler-Maruyama on the Ito SDEs for alpha, beta, T0, theta.
PerturbationPath simulate_soliton_sde(const SolitonState& state0, const PropagationConfig& cfg);
PerturbationPath simulate_soliton_sde(const SolitonState& state0, const PropagationConfig& cfg, Engine& rng);

struct AmplitudeChannelSample {
    double ln_mag_in = 0;
    double ln_mag_out = 0;
    double phase_in = 0;
    double phase_out = 0;
    double I_R = 0;
    double I_I = 0;
    double I_RI = 0;
    double I_R2mI2 = 0;

    double N() const { return ln_mag_out - ln_mag_in; }
    std::string to_json() const;
};

// Product of per-segment noiseless evolutions with left-endpoint eigenvalues.
AmplitudeChannelSample concatenate_model(const PerturbationPath& path, const SolitonSpec& spec0, int m);
// Integral form (trapezoid quadrature on the path grid).
AmplitudeChannelSample magnitude_channel(const PerturbationPath& path, const SolitonSpec& spec0);

struct PerturbationComponents {
    double N11 = 0, N12 = 0, N13 = 0, N1 = 0;
    double N2 = 0;
    double N31 = 0, N32 = 0, N3 = 0;
    double N4 = 0;
    double N0 = 0;
    double total() const { return N1 + N2 + N3 + N4; }
};

PerturbationComponents perturbation_model(const PerturbationPath& path, const SolitonSpec& spec0);

void write_path_csv(const PerturbationPath& path, const std::string& file);
double trapezoid(const std::vector<double>& z, const std::vector<double>& f);

}  // namespace nsd
