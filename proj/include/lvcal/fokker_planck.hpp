// SPDX-License-Identifier: MIT
/// @file fokker_planck.hpp
/// @brief 1D forward Kolmogorov solver for the deterministic-rate local-vol model
///
/// Works with the log-spot density p(x) = S q(S). Cells are uniform in
/// x = log S and centred on log s0; fluxes across cell faces use
/// Scharfetter-Gummel weighting, the outer faces carry zero flux, so
/// sum_j p_j dx is conserved to rounding. Time stepping is Crank-Nicolson
/// after a few fully implicit start-up half steps.

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lvcal/curves.hpp"
#include "lvcal/leverage_surface.hpp"

namespace lvcal {

/// sigma_LV(S, t).
using LocalVolFunction = std::function<double(double, double)>;

struct FokkerPlanckConfig {
    double log_half_width = 0.0;     ///< grid covers log s0 +- this; 0 selects 8 sigma_ref sqrt(T) + |drift| T + 0.5
    double sigma_ref = 0.25;         ///< only used for the default width
    std::size_t n_space = 1601;      ///< cells (odd keeps s0 on a centre)
    double dt = 1.0 / 400.0;         ///< maximum time step
    std::size_t implicit_steps = 4;  ///< fully implicit half steps at start-up
    std::vector<double> keep_times;  ///< times at which q is stored (0 always kept)
};

struct DensityGrid {
    std::vector<double> s_grid;  ///< cell centres exp(x_j)
    double dx = 0.0;             ///< cell width in log-spot
    std::vector<double> times;
    std::vector<std::vector<double>> q_values;  ///< [time][node], 1/price units

    std::size_t time_index(double t) const;
    /// Log-spot density p = S q at a stored time.
    std::vector<double> log_density(std::size_t t_index) const;
    /// Trapezoidal integral of q over S, computed as the integral of p over x.
    double mass(std::size_t t_index) const;
    /// Mean of S under the stored density.
    double mean(std::size_t t_index) const;
    double second_moment(std::size_t t_index) const;
};

DensityGrid solve_forward_kolmogorov(const LocalVolFunction& sigma_lv, const DiscountCurve& domestic,
                                     const DiscountCurve& foreign, double s0, const FokkerPlanckConfig& cfg);

DensityGrid solve_forward_kolmogorov(const LeverageSurface& sigma_lv, const DiscountCurve& domestic,
                                     const DiscountCurve& foreign, double s0, const FokkerPlanckConfig& cfg);

struct DensityPrices {
    std::vector<double> prices;     ///< P^d E^T[(S_T - K)^+]
    std::vector<double> convexity;  ///< P^d q^T(K)
};

/// Call prices from the density (exact integration of (S-K)^+ over each cell);
/// throws OutOfRangeError for strikes outside the grid.
DensityPrices density_call_prices(const DensityGrid& grid, double discount, std::span<const double> strikes,
                                  double t);

/// CSV `time,spot,density`.
void write_density_csv(const DensityGrid& grid, const std::string& path);

}  // namespace lvcal
