// SPDX-License-Identifier: MIT
// AVX2/FMA kernels. Compiled with -mavx2 -mfma; only reached after a CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "lvcal/kernels.hpp"

namespace lvcal::simd {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

Sums2 weighted(const double* x, const double* d, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(d + i), _mm256_loadu_pd(x + i));
        acc = _mm256_add_pd(acc, v);
        acc2 = _mm256_fmadd_pd(v, v, acc2);
    }
    Sums2 r{hsum(acc), hsum(acc2)};
    for (; i < n; ++i) {
        const double v = d[i] * x[i];
        r.sum += v;
        r.sum_sq += v * v;
    }
    return r;
}

Sums2 drift_indicator(const double* s, const double* rd, const double* rf, const double* d, std::size_t n, double k,
                      double rd_shift, double rf_shift) {
    const __m256d vk = _mm256_set1_pd(k);
    const __m256d vrd = _mm256_set1_pd(rd_shift);
    const __m256d vrf = _mm256_set1_pd(rf_shift);
    __m256d acc = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d a = _mm256_mul_pd(vk, _mm256_sub_pd(_mm256_loadu_pd(rd + i), vrd));
        const __m256d b = _mm256_mul_pd(vs, _mm256_sub_pd(_mm256_loadu_pd(rf + i), vrf));
        __m256d v = _mm256_mul_pd(_mm256_loadu_pd(d + i), _mm256_sub_pd(a, b));
        v = _mm256_and_pd(v, _mm256_cmp_pd(vs, vk, _CMP_GT_OQ));
        acc = _mm256_add_pd(acc, v);
        acc2 = _mm256_fmadd_pd(v, v, acc2);
    }
    Sums2 r{hsum(acc), hsum(acc2)};
    for (; i < n; ++i) {
        if (s[i] > k) {
            const double v = d[i] * (k * (rd[i] - rd_shift) - s[i] * (rf[i] - rf_shift));
            r.sum += v;
            r.sum_sq += v * v;
        }
    }
    return r;
}

template <bool Call>
Sums2 payoff(const double* s, const double* d, std::size_t n, double k) {
    const __m256d vk = _mm256_set1_pd(k);
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc = zero;
    __m256d acc2 = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d intrinsic = Call ? _mm256_sub_pd(vs, vk) : _mm256_sub_pd(vk, vs);
        const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(d + i), _mm256_max_pd(intrinsic, zero));
        acc = _mm256_add_pd(acc, v);
        acc2 = _mm256_fmadd_pd(v, v, acc2);
    }
    Sums2 r{hsum(acc), hsum(acc2)};
    for (; i < n; ++i) {
        const double v = d[i] * std::max(Call ? s[i] - k : k - s[i], 0.0);
        r.sum += v;
        r.sum_sq += v * v;
    }
    return r;
}

Sums2 call_payoff(const double* s, const double* d, std::size_t n, double k) { return payoff<true>(s, d, n, k); }
Sums2 put_payoff(const double* s, const double* d, std::size_t n, double k) { return payoff<false>(s, d, n, k); }

Sums2 indicator(const double* s, const double* d, std::size_t n, double k) {
    const __m256d vk = _mm256_set1_pd(k);
    __m256d acc = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(s + i), vk, _CMP_GT_OQ);
        const __m256d v = _mm256_and_pd(_mm256_loadu_pd(d + i), mask);
        acc = _mm256_add_pd(acc, v);
        acc2 = _mm256_fmadd_pd(v, v, acc2);
    }
    Sums2 r{hsum(acc), hsum(acc2)};
    for (; i < n; ++i) {
        if (s[i] > k) {
            r.sum += d[i];
            r.sum_sq += d[i] * d[i];
        }
    }
    return r;
}

KernelSums epanechnikov(const double* s, const double* d, const double* q, std::size_t n, double k, double inv_h) {
    const __m256d vk = _mm256_set1_pd(k);
    const __m256d vh = _mm256_set1_pd(inv_h);
    const __m256d c = _mm256_set1_pd(0.75);
    const __m256d zero = _mm256_setzero_pd();
    __m256d sa = zero, saq = zero, sa2 = zero, sa2q = zero, sa2q2 = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d u = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(s + i), vk), vh);
        const __m256d kern = _mm256_max_pd(_mm256_fnmadd_pd(_mm256_mul_pd(c, u), u, c), zero);
        const __m256d a = _mm256_mul_pd(_mm256_loadu_pd(d + i), kern);
        const __m256d vq = _mm256_loadu_pd(q + i);
        const __m256d a2 = _mm256_mul_pd(a, a);
        const __m256d a2q = _mm256_mul_pd(a2, vq);
        sa = _mm256_add_pd(sa, a);
        saq = _mm256_fmadd_pd(a, vq, saq);
        sa2 = _mm256_add_pd(sa2, a2);
        sa2q = _mm256_add_pd(sa2q, a2q);
        sa2q2 = _mm256_fmadd_pd(a2q, vq, sa2q2);
    }
    KernelSums r{hsum(sa), hsum(saq), hsum(sa2), hsum(sa2q), hsum(sa2q2)};
    for (; i < n; ++i) {
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
    const __m256d vdec = _mm256_set1_pd(decay);
    const __m256d vstd = _mm256_set1_pd(step_std);
    const __m256d vdt = _mm256_set1_pd(dt);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_mul_pd(_mm256_loadu_pd(x + i), vdec);
        if (extra) v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_loadu_pd(extra + i), vdt));
        v = _mm256_fmadd_pd(vstd, _mm256_loadu_pd(z + i), v);
        _mm256_storeu_pd(x + i, v);
    }
    for (; i < n; ++i) {
        const double e = extra ? extra[i] * dt : 0.0;
        x[i] = std::fma(step_std, z[i], x[i] * decay + e);
    }
}

void cir_step(double* u, const double* z, std::size_t n, double kappa, double theta, double xi, double dt) {
    const double sdt = std::sqrt(dt);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d vk = _mm256_set1_pd(kappa * dt);
    const __m256d vth = _mm256_set1_pd(theta);
    const __m256d vx = _mm256_set1_pd(xi * sdt);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vu = _mm256_loadu_pd(u + i);
        const __m256d up = _mm256_max_pd(vu, zero);
        __m256d v = _mm256_fmadd_pd(vk, _mm256_sub_pd(vth, up), vu);
        v = _mm256_fmadd_pd(_mm256_mul_pd(vx, _mm256_sqrt_pd(up)), _mm256_loadu_pd(z + i), v);
        _mm256_storeu_pd(u + i, v);
    }
    for (; i < n; ++i) {
        const double up = std::max(u[i], 0.0);
        u[i] = std::fma(xi * sdt * std::sqrt(up), z[i], std::fma(kappa * dt, theta - up, u[i]));
    }
}

void log_spot_step(double* log_s, const double* vol, const double* drift_int, const double* z, std::size_t n,
                   double dt) {
    const __m256d vhalf = _mm256_set1_pd(-0.5 * dt);
    const __m256d vsdt = _mm256_set1_pd(std::sqrt(dt));
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vv = _mm256_loadu_pd(vol + i);
        __m256d v = _mm256_add_pd(_mm256_loadu_pd(log_s + i), _mm256_loadu_pd(drift_int + i));
        v = _mm256_fmadd_pd(_mm256_mul_pd(vhalf, vv), vv, v);
        v = _mm256_fmadd_pd(_mm256_mul_pd(vv, vsdt), _mm256_loadu_pd(z + i), v);
        _mm256_storeu_pd(log_s + i, v);
    }
    const double sdt = std::sqrt(dt);
    for (; i < n; ++i) {
        double v = log_s[i] + drift_int[i];
        v = std::fma(-0.5 * dt * vol[i], vol[i], v);
        log_s[i] = std::fma(vol[i] * sdt, z[i], v);
    }
}

}  // namespace

const KernelTable& avx2_table() noexcept {
    static const KernelTable table{"avx2",    weighted,     drift_indicator, call_payoff, put_payoff,
                                   indicator, epanechnikov, ou_step,         cir_step,    log_spot_step};
    return table;
}

}  // namespace lvcal::simd
