// SPDX-License-Identifier: MIT
/// @file kernels.hpp
/// @brief Data-parallel inner loops of the Monte-Carlo engine
///
/// Each kernel has a scalar reference implementation and an AVX2/FMA variant.
/// The variant is chosen once at runtime from CPU features; setting the
/// environment variable LVCAL_SIMD=scalar forces the reference kernels.
/// Reductions in the AVX2 variant use four lanes and therefore differ from the
/// scalar sums in the last bits only; results are bit-reproducible for a
/// given dispatch level.

#pragma once

#include <cstddef>
#include <string_view>

namespace lvcal::simd {

struct Sums2 {
    double sum = 0.0;
    double sum_sq = 0.0;

    Sums2& operator+=(const Sums2& o) noexcept {
        sum += o.sum;
        sum_sq += o.sum_sq;
        return *this;
    }
};

/// Sums for a weighted Nadaraya-Watson estimate with a = weight * kernel:
/// sum a, sum a q, sum a^2, sum a^2 q, sum a^2 q^2.
struct KernelSums {
    double a = 0.0;
    double aq = 0.0;
    double a2 = 0.0;
    double a2q = 0.0;
    double a2q2 = 0.0;

    KernelSums& operator+=(const KernelSums& o) noexcept {
        a += o.a;
        aq += o.aq;
        a2 += o.a2;
        a2q += o.a2q;
        a2q2 += o.a2q2;
        return *this;
    }
};

struct KernelTable {
    std::string_view name;

    /// X_i = d_i x_i: returns (sum X, sum X^2).
    Sums2 (*weighted)(const double* x, const double* d, std::size_t n);

    /// X_i = d_i (k (rd_i - rd_shift) - s_i (rf_i - rf_shift)) 1{s_i > k}.
    Sums2 (*drift_indicator)(const double* s, const double* rd, const double* rf, const double* d, std::size_t n,
                             double k, double rd_shift, double rf_shift);

    /// X_i = d_i max(s_i - k, 0) for calls, d_i max(k - s_i, 0) for puts.
    Sums2 (*call_payoff)(const double* s, const double* d, std::size_t n, double k);
    Sums2 (*put_payoff)(const double* s, const double* d, std::size_t n, double k);

    /// X_i = d_i 1{s_i > k}.
    Sums2 (*indicator)(const double* s, const double* d, std::size_t n, double k);

    /// Epanechnikov kernel 0.75 (1 - u^2)_+ with u = (s_i - k) * inv_h, weights d_i, responses q_i.
    KernelSums (*epanechnikov)(const double* s, const double* d, const double* q, std::size_t n, double k,
                               double inv_h);

    /// x_i <- x_i * decay + extra_i * dt + step_std * z_i (extra may be null).
    void (*ou_step)(double* x, const double* z, const double* extra, std::size_t n, double decay, double step_std,
                    double dt);

    /// Full-truncation Euler: u <- u + kappa (theta - u+) dt + xi sqrt(u+ dt) z.
    void (*cir_step)(double* u, const double* z, std::size_t n, double kappa, double theta, double xi, double dt);

    /// log_s <- log_s + drift_int_i - 0.5 vol_i^2 dt + vol_i sqrt(dt) z_i.
    void (*log_spot_step)(double* log_s, const double* vol, const double* drift_int, const double* z, std::size_t n,
                          double dt);
};

const KernelTable& scalar_kernels() noexcept;

/// AVX2/FMA table, or nullptr when the build or the CPU lacks support.
const KernelTable* avx2_kernels() noexcept;

/// Table selected at first use (honours LVCAL_SIMD=scalar).
const KernelTable& active_kernels() noexcept;

}  // namespace lvcal::simd
