// SPDX-License-Identifier: MIT
/// @file black_scholes.hpp
/// @brief Black-Scholes call in (T, y, w) coordinates and its closed-form partials

#pragma once

#include <cmath>
#include <numbers>

namespace lvcal {

inline double norm_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

/// Standard normal CDF through the complementary error function.
inline double norm_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2));
}

/// Arguments of C_BS(T, y, w).
///
/// disc_fwd is P^d(0,T) * F_T; f_dom and f_for are the instantaneous forward
/// rates f^d(0,T), f^f(0,T) and only enter the time derivative.
struct BsPoint {
    double t = 0.0;
    double y = 0.0;
    double w = 0.0;
    double disc_fwd = 1.0;
    double f_dom = 0.0;
    double f_for = 0.0;
};

struct BsPartials {
    double price = 0.0;
    double dC_dw = 0.0;
    double d2C_dw2 = 0.0;
    double d2C_dwdy = 0.0;
    double dC_dy = 0.0;
    double d2C_dy2 = 0.0;
};

double bs_call_tiv(const BsPoint& p);

/// All partials from one d1/d2 evaluation.
BsPartials bs_partials(const BsPoint& p);

/// 1 - (y/w) w_y + w_yy/2 + (w_y^2/4)(-1/4 - 1/w + y^2/w^2).
double tiv_bracket(double y, double w, double dw_dy, double d2w_dy2);

/// (1/2) K^2 d2C/dK^2 expressed through dC/dw and the surface partials.
/// A negative result is returned unchanged; callers decide how to floor.
double dupire_denominator(const BsPoint& p, double dw_dy, double d2w_dy2);

/// Total maturity derivative dC/dT including the moving forward and discounting.
double bs_theta_tiv(const BsPoint& p, double dw_dy, double dw_dT);

/// K dC/dK = dC/dy + dC/dw * dw/dy.
double strike_delta_times_k(const BsPoint& p, double dw_dy);

/// Result of inverting C_BS for the total variance.
struct ImpliedVariance {
    double w = 0.0;
    bool at_intrinsic = false;
};

/// Inverts bs_call_tiv in w at fixed (disc_fwd, y); the price must lie in
/// [intrinsic, disc_fwd].
ImpliedVariance implied_total_variance(double call_price, double disc_fwd, double y);

}  // namespace lvcal
