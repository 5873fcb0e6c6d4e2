#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Field = std::function<cplx(double)>;

// Composite Simpson on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
}

struct Scatter {
    cplx a, b;
};

// Classical RK4 on v_t = [[-j l, q], [-q*, j l]] v from v = (1, 0) e^{-j l t0},
// continuous field q(t); a = v1 e^{j l t1}, b = v2 e^{-j l t1}.
inline Scatter zs_rk4(const Field& q, cplx lam, double t0, double t1, int steps) {
    const cplx J(0, 1);
    auto rhs = [&](double t, const cplx v[2], cplx out[2]) {
        cplx qt = q(t);
        out[0] = -J * lam * v[0] + qt * v[1];
        out[1] = -std::conj(qt) * v[0] + J * lam * v[1];
    };
    // work with the envelope u = v * e^{+-j l t} to keep magnitudes tame
    cplx v[2] = {std::exp(-J * lam * t0), 0.0};
    const double h = (t1 - t0) / steps;
    for (int s = 0; s < steps; ++s) {
        double t = t0 + s * h;
        cplx k1[2], k2[2], k3[2], k4[2], tmp[2];
        rhs(t, v, k1);
        for (int i = 0; i < 2; ++i) tmp[i] = v[i] + 0.5 * h * k1[i];
        rhs(t + 0.5 * h, tmp, k2);
        for (int i = 0; i < 2; ++i) tmp[i] = v[i] + 0.5 * h * k2[i];
        rhs(t + 0.5 * h, tmp, k3);
        for (int i = 0; i < 2; ++i) tmp[i] = v[i] + h * k3[i];
        rhs(t + h, tmp, k4);
        for (int i = 0; i < 2; ++i) v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return {v[0] * std::exp(J * lam * t1), v[1] * std::exp(-J * lam * t1)};
}

// Pointwise residual j q_z - q_tt - 2|q|^2 q by central differences of a field q(t, z).
inline cplx nlse_residual(const std::function<cplx(double, double)>& q, double t, double z, double ht = 1e-3,
                          double hz = 1e-4) {
    const cplx J(0, 1);
    cplx qz = (q(t, z + hz) - q(t, z - hz)) / (2 * hz);
    cplx q0 = q(t, z);
    cplx qtt = (q(t + ht, z) - 2.0 * q0 + q(t - ht, z)) / (ht * ht);
    return J * qz - qtt - 2.0 * std::norm(q0) * q0;
}

}  // namespace oracle
