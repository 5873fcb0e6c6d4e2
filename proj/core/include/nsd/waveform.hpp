#pragma once

#include <complex>
#include <string>
#include <vector>

namespace nsd {

using cplx = std::complex<double>;

struct TimeGrid {
    double t_start = 0;
    double dt = 0;
    std::size_t n = 0;

    double t(std::size_t k) const { return t_start + dt * static_cast<double>(k); }
    double t_end() const { return t(n - 1); }
    void validate() const;
    // Grid of n points with spacing dt symmetric about zero: t_start = -(n/2) dt.
    static TimeGrid centered(std::size_t n, double dt);
};

class Signal {
public:
    Signal(TimeGrid grid, std::vector<cplx> samples, double z = 0.0);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<cplx>& samples() const { return samples_; }
    double z() const { return z_; }
    std::size_t size() const { return samples_.size(); }
    const cplx& operator[](std::size_t k) const { return samples_[k]; }

    // max(|q(t_start)|, |q(t_end)|)
    double edge_magnitude() const;
    double peak_magnitude() const;

private:
    TimeGrid grid_;
    std::vector<cplx> samples_;
    double z_;
};

struct SolitonSpec {
    cplx zeta;  // alpha + j beta
    cplx q_d;   // discrete spectral amplitude at z = 0

    double alpha() const { return zeta.real(); }
    double beta() const { return zeta.imag(); }
    void validate() const;
    // Soliton with given eigenvalue, centre and phase parameter at z = 0.
    static SolitonSpec from_center(cplx zeta, double T0, double arg_qd = 0.0);
};

// ln|Q(z)| and arg Q(z) under noiseless evolution Q(z) = Q(0) exp(-4j zeta^2 z).
double log_mag_at(const SolitonSpec& s, double z);
double phase_at(const SolitonSpec& s, double z);  // not wrapped
double center_at(const SolitonSpec& s, double z);

inline constexpr double kDefaultDecay = 1e-8;

Signal make_soliton(const SolitonSpec& spec, double z, const TimeGrid& grid, double decay = kDefaultDecay);
Signal make_nsoliton(const std::vector<SolitonSpec>& specs, double z, const TimeGrid& grid,
                     double decay = kDefaultDecay);

// Symmetric power-of-two grid covering every pulse at position z.
TimeGrid default_grid(const std::vector<SolitonSpec>& specs, double z = 0.0);

double energy(const Signal& sig);

void write_csv(const Signal& sig, const std::string& path);
// 16-byte header: u64 n, f64 dt; then n interleaved (re, im) f64, little-endian.
void write_binary(const Signal& sig, const std::string& path);
Signal read_binary(const std::string& path, double z = 0.0);

// Wrap to [-pi, pi).
double wrap_phase(double phi);

}  // namespace nsd
