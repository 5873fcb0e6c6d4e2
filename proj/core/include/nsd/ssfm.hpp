#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "nsd/kvconfig.hpp"
#include "nsd/nft.hpp"
#include "nsd/rng.hpp"
#include "nsd/waveform.hpp"

namespace nsd {

struct PropagationConfig {
    double dz = 1e-3;
    double total_z = 1.0;
    double eps2 = 0.0;  // normalized noise PSD
    std::uint64_t seed = 1;
    bool noise_on = false;

    double eps() const;
    // number of steps; the step is shrunk so that steps * dz_eff == total_z
    long steps() const;
    double step() const;
    void validate() const;
    // keys: dz, total_z, eps2, seed, noise_on (other keys are left to the caller)
    static PropagationConfig from_config(const KvConfig& cfg);
};

// Symmetric split-step Fourier solution of j q_z = q_tt + 2|q|^2 q + j eps G.
Signal propagate(const Signal& sig, const PropagationConfig& cfg);
Signal propagate(const Signal& sig, const PropagationConfig& cfg, Engine& rng);

struct EigenNoise {
    double ups_R = 0;      // Re zeta_out - Re zeta_ref
    double ups_I = 0;      // Im zeta_out - Im zeta_ref
    double d_ln_mag = 0;   // ln|Q_out| - ln|Q_ref|
    double d_phase = 0;    // arg Q_out - arg Q_ref, wrapped to [-pi, pi)
    cplx zeta_ref, zeta_out, qd_ref, qd_out;
};

struct MeasureOptions {
    NftOptions nft = [] {
        NftOptions o;
        o.richardson = 0;  // noisy fields: subgrids see different noise
        o.edge_threshold = std::numeric_limits<double>::infinity();
        return o;
    }();
    // search box half-size as a fraction of the smallest Im(zeta)
    double pad_fraction = 0.5;
};

// Noise coordinates of out_sig relative to the noiseless evolution of input_spec
// (given at z = 0) to out_sig.z().
std::vector<EigenNoise> measure_eigen_noise(const DiscreteSpectrum& input_spec, const Signal& out_sig,
                                            const MeasureOptions& opts = {});
// Same, against an explicit reference spectrum already at out_sig.z().
std::vector<EigenNoise> measure_against_reference(const DiscreteSpectrum& reference, const Signal& out_sig,
                                                  const MeasureOptions& opts = {});

}  // namespace nsd
