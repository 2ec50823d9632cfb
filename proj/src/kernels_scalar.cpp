// SPDX-License-Identifier: MIT
// Scalar reference kernels.

#include <algorithm>
#include <cmath>

#include "lvcal/kernels.hpp"

namespace lvcal::simd {

namespace {

Sums2 weighted(const double* x, const double* d, std::size_t n) {
    Sums2 r;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = d[i] * x[i];
        r.sum += v;
        r.sum_sq += v * v;
    }
    return r;
}

Sums2 drift_indicator(const double* s, const double* rd, const double* rf, const double* d, std::size_t n, double k,
                      double rd_shift, double rf_shift) {
    Sums2 r;
    for (std::size_t i = 0; i < n; ++i) {
        if (s[i] > k) {
            const double v = d[i] * (k * (rd[i] - rd_shift) - s[i] * (rf[i] - rf_shift));
            r.sum += v;
            r.sum_sq += v * v;
        }
    }
    return r;
}

Sums2 call_payoff(const double* s, const double* d, std::size_t n, double k) {
    Sums2 r;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = d[i] * std::max(s[i] - k, 0.0);
        r.sum += v;
        r.sum_sq += v * v;
    }
    return r;
}

Sums2 put_payoff(const double* s, const double* d, std::size_t n, double k) {
    Sums2 r;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = d[i] * std::max(k - s[i], 0.0);
        r.sum += v;
        r.sum_sq += v * v;
    }
    return r;
}

Sums2 indicator(const double* s, const double* d, std::size_t n, double k) {
    Sums2 r;
    for (std::size_t i = 0; i < n; ++i) {
        if (s[i] > k) {
            r.sum += d[i];
            r.sum_sq += d[i] * d[i];
        }
    }
    return r;
}

KernelSums epanechnikov(const double* s, const double* d, const double* q, std::size_t n, double k, double inv_h) {
    KernelSums r;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (s[i] - k) * inv_h;
        const double kern = 0.75 * (1.0 - u * u);
        if (kern > 0.0) {
            const double a = d[i] * kern;
            const double a2 = a * a;
            r.a += a;
            r.aq += a * q[i];
            r.a2 += a2;
            r.a2q += a2 * q[i];
            r.a2q2 += a2 * q[i] * q[i];
        }
    }
    return r;
}

void ou_step(double* x, const double* z, const double* extra, std::size_t n, double decay, double step_std,
             double dt) {
    for (std::size_t i = 0; i < n; ++i) {
        const double e = extra ? extra[i] * dt : 0.0;
        x[i] = x[i] * decay + e + step_std * z[i];
    }
}

void cir_step(double* u, const double* z, std::size_t n, double kappa, double theta, double xi, double dt) {
    const double sdt = std::sqrt(dt);
    for (std::size_t i = 0; i < n; ++i) {
        const double up = std::max(u[i], 0.0);
        u[i] = u[i] + kappa * (theta - up) * dt + xi * std::sqrt(up) * sdt * z[i];
    }
}

void log_spot_step(double* log_s, const double* vol, const double* drift_int, const double* z, std::size_t n,
                   double dt) {
    const double sdt = std::sqrt(dt);
    for (std::size_t i = 0; i < n; ++i) {
        log_s[i] = log_s[i] + drift_int[i] - 0.5 * vol[i] * vol[i] * dt + vol[i] * sdt * z[i];
    }
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
    static const KernelTable table{"scalar",  weighted,     drift_indicator, call_payoff, put_payoff,
                                   indicator, epanechnikov, ou_step,         cir_step,    log_spot_step};
    return table;
}

}  // namespace lvcal::simd
