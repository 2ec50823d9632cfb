// SPDX-License-Identifier: MIT
/// @file curves.hpp
/// @brief Discount curves, forwards and log-moneyness

#pragma once

#include <span>
#include <vector>

namespace lvcal {

class TotalVarianceSurface;

/// Zero-coupon discount curve P(0,T) with log-linear interpolation.
///
/// Log-linear interpolation of P means piecewise-constant instantaneous
/// forwards between tenors. Tenor 0 must carry P = 1.
class DiscountCurve {
public:
    DiscountCurve(std::vector<double> tenors, std::vector<double> discounts);

    /// P(0,t) = exp(-rate * t) sampled at {0, horizon}.
    static DiscountCurve flat(double rate, double horizon = 100.0);

    double discount(double t) const;

    /// f(0,t) = -d log P / dt; at a tenor node the right-segment slope is returned
    /// (the last segment at the final tenor).
    double forward(double t) const;

    /// -log P(0,t), i.e. the integral of f(0,u) over [0,t].
    double integrated_forward(double t) const;

    double max_tenor() const noexcept { return tenors_.back(); }
    std::span<const double> tenors() const noexcept { return tenors_; }
    std::span<const double> discounts() const noexcept { return discounts_; }

private:
    std::size_t segment(double t) const;
    void check_range(double t) const;

    std::vector<double> tenors_;
    std::vector<double> discounts_;
    std::vector<double> log_discounts_;
};

inline double discount_factor(const DiscountCurve& curve, double t) { return curve.discount(t); }
inline double instantaneous_forward(const DiscountCurve& curve, double t) { return curve.forward(t); }

/// log(K / F); both arguments must be positive.
double log_moneyness(double strike, double forward);

}  // namespace lvcal
