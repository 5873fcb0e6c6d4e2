#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "nsd/waveform.hpp"

namespace nsd {

struct ScatteringCoefficients {
    cplx lambda;
    cplx a;
    cplx b;
    cplx a_prime;
};

struct SpectrumEntry {
    cplx zeta;
    cplx q_d;
};

struct DiscreteSpectrum {
    std::vector<SpectrumEntry> entries;

    std::size_t size() const { return entries.size(); }
    void sort();  // by Im then Re
    std::vector<SolitonSpec> to_specs() const;
    static DiscreteSpectrum from_specs(const std::vector<SolitonSpec>& specs);
};

struct ContinuousSpectrum {
    std::vector<double> lambdas;
    std::vector<cplx> q_c;
};

// Rectangle in the upper half plane, e.g. "re:[-1,1] im:(0,2]".
struct SearchRegion {
    double re_lo = -1, re_hi = 1, im_lo = 0, im_hi = 2;

    static SearchRegion parse(const std::string& text);
    // Box around the given eigenvalues: +-pad around real parts, (im_floor, max beta + pad].
    static SearchRegion around(const std::vector<cplx>& zetas, double pad, double im_floor = 0.0);
    bool contains(cplx z, double margin = 0.0) const;
    void validate() const;
    std::string str() const;
};

struct NftOptions {
    // Richardson levels on the 2h / 4h subgrids: 0 = plain second-order
    // transfer matrix, 1 = fourth order, 2 = sixth order. Use 0 for noisy fields.
    int richardson = 2;
    // Edge magnitude allowed relative to the peak; infinity disables the check.
    double edge_threshold = 1e-6;
    double newton_tol = 1e-10;
    double dedup_radius = 1e-6;
    int max_newton_iter = 60;
    bool verify_count = true;
};

ScatteringCoefficients scatter(const Signal& sig, cplx lambda, const NftOptions& opts = {});
// Q = b / a' at an eigenvalue, with b taken from matching the forward (left)
// and backward (right) Jost solutions; stable where forward-only b is not.
cplx spectral_amplitude(const Signal& sig, cplx zeta, const NftOptions& opts = {});
// a(lambda) only, no derivative; cheaper.
cplx scatter_a(const Signal& sig, cplx lambda, const NftOptions& opts = {});

ContinuousSpectrum continuous_spectrum(const Signal& sig, const std::vector<double>& lambdas,
                                       const NftOptions& opts = {});

// Number of zeros of a inside the region by the argument principle.
int count_eigenvalues(const Signal& sig, const SearchRegion& region, const NftOptions& opts = {});

DiscreteSpectrum find_discrete_spectrum(const Signal& sig, const SearchRegion& region,
                                        std::optional<std::size_t> expected_count = std::nullopt,
                                        const std::vector<cplx>& guesses = {},
                                        const NftOptions& opts = {});

DiscreteSpectrum evolve_spectrum(const DiscreteSpectrum& spec, double z);

std::string spectrum_to_json(const DiscreteSpectrum& spec);
DiscreteSpectrum spectrum_from_json(const std::string& text);

}  // namespace nsd
