// SPDX-License-Identifier: MIT
/// @file surface.hpp
/// @brief Total implied variance surface w(y, T) with analytic partials

#pragma once

#include <span>
#include <vector>

namespace lvcal {

/// w and its partials at one (y, T) point.
struct TotalVarianceSample {
    double w = 0.0;
    double dw_dy = 0.0;
    double d2w_dy2 = 0.0;
    double dw_dt = 0.0;
};

/// Black-Scholes implied vol quote.
struct VolQuote {
    double maturity = 0.0;
    double strike = 0.0;
    double implied_vol = 0.0;
};

/// Total implied variance w(y,T) = Sigma^2 T on log-moneyness slices.
///
/// Each maturity slice is a natural cubic spline in y (flat outside its
/// nodes). Along T the slices are joined by a monotone cubic Hermite
/// interpolant on w whose node slopes are harmonic means of adjacent secants,
/// so partials in y stay analytic. Before the first slice w is linear through
/// the origin, after the last slice it is extended linearly with the last secant.
///
/// Construction rejects non-positive nodes and calendar-decreasing data.
class TotalVarianceSurface {
public:
    struct Slice {
        double t = 0.0;
        std::vector<double> y;
        std::vector<double> w;
    };

    /// Common log-moneyness grid; w_values is row-major [t][y].
    TotalVarianceSurface(std::vector<double> y_grid, std::vector<double> t_grid,
                         std::span<const double> w_values);

    /// Per-maturity log-moneyness grids.
    explicit TotalVarianceSurface(std::vector<Slice> slices);

    TotalVarianceSample eval(double y, double t) const;

    double implied_vol(double y, double t) const;

    std::size_t slice_count() const noexcept { return slices_.size(); }
    const Slice& slice(std::size_t i) const { return slices_.at(i); }
    std::vector<double> maturities() const;
    double min_maturity() const noexcept { return slices_.front().t; }
    double max_maturity() const noexcept { return slices_.back().t; }

    /// Log-moneyness range covered by node data at maturity t (union over the
    /// bracketing slices).
    std::pair<double, double> y_range(double t) const;

private:
    struct SplineValue {
        double v, d1, d2;
    };

    void build();
    SplineValue eval_slice(std::size_t j, double y) const;

    std::vector<Slice> slices_;
    std::vector<std::vector<double>> second_derivs_;
};

inline TotalVarianceSample eval_total_variance(const TotalVarianceSurface& surface, double y, double t) {
    return surface.eval(y, t);
}

}  // namespace lvcal
