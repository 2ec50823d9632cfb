// SPDX-License-Identifier: MIT
/// @file market.hpp
/// @brief Market snapshot: spot, two discount curves and the variance surface

#pragma once

#include <span>

#include "lvcal/black_scholes.hpp"
#include "lvcal/curves.hpp"
#include "lvcal/surface.hpp"

namespace lvcal {

struct MarketSnapshot {
    double spot = 1.0;
    DiscountCurve domestic;
    DiscountCurve foreign;
    TotalVarianceSurface surface;

    MarketSnapshot(double spot, DiscountCurve domestic, DiscountCurve foreign, TotalVarianceSurface surface);

    /// Latest time covered by both curves and the surface.
    double horizon() const;
};

/// F_T = S_0 P^f(0,T) / P^d(0,T).
double forward_price(const MarketSnapshot& snapshot, double t);

/// Everything the Dupire formulas need at one (K, T) node.
struct MarketPoint {
    double strike = 0.0;
    double forward = 0.0;
    double discount = 1.0;
    BsPoint bs;
    TotalVarianceSample tv;
};

MarketPoint market_point(const MarketSnapshot& snapshot, double strike, double t);

/// Surface from implied-vol quotes: each maturity slice becomes (y, w) nodes
/// with y = log(K/F_T) and w = Sigma^2 T. Calendar-violating input is rejected.
TotalVarianceSurface surface_from_quotes(std::span<const VolQuote> quotes, double spot,
                                         const DiscountCurve& domestic, const DiscountCurve& foreign);

/// Flat implied volatility sigma on a log-moneyness grid [-y_max, y_max].
TotalVarianceSurface flat_surface(double sigma, std::span<const double> maturities, double y_max = 3.0,
                                  std::size_t n_y = 7);

}  // namespace lvcal
