// SPDX-License-Identifier: MIT
/// @file dupire.hpp
/// @brief Local-volatility and leverage formulas: deterministic, single and two
///        stochastic rates, generalized drift/diffusion, and the SLV link.
///
/// Every function returns the squared quantity (sigma_LV^2 or L^2) together
/// with node flags. Results are floored at min_variance and capped at
/// max_variance; floors and caps are always flagged, never silent.

#pragma once

#include <cstdint>
#include <span>

#include "lvcal/leverage_surface.hpp"
#include "lvcal/market.hpp"

namespace lvcal {

struct DupireLimits {
    double bracket_floor = 1e-6;          ///< floor on the TIV denominator bracket
    double convexity_floor_scale = 1e-10; ///< d2C/dK2 floor = scale * P^d / K
    double min_variance = 1e-8;           ///< (1e-4)^2
    double max_variance = 25.0;           ///< 5^2
};

struct LocalVarianceResult {
    double variance = 0.0;   ///< floored / capped value used downstream
    double raw = 0.0;        ///< ratio before flooring
    double std_error = 0.0;  ///< first-order band from expectation standard errors
    std::uint32_t flags = kFlagNone;
};

/// Monte-Carlo expectation inputs to the stochastic-rate formulas.
struct ExpectationInputs {
    double drift_term = 0.0;      ///< E^T[(K r^d - S r^f) 1{S>K}] or the generalized drift expectation
    double drift_std_error = 0.0;
    double cond_var = 1.0;        ///< E^T[U | S=K] or E^T[sigma_bar^2 | S=K]
    double cond_var_std_error = 0.0;
};

/// Call-surface derivatives at one node.
struct CallDerivatives {
    double price = 0.0;
    double dC_dT = 0.0;
    double dC_dK = 0.0;
    double d2C_dK2 = 0.0;
};

/// Strike and maturity derivatives of the market call surface via the
/// black_scholes_core identities.
CallDerivatives call_derivatives(const MarketPoint& mp);

// --- deterministic rates ---------------------------------------------------

/// sigma_LV^2 = w_T / bracket. Throws ArbitrageError when dw/dT < 0.
LocalVarianceResult lv_deterministic_tiv(const TotalVarianceSample& tv, double y, const DupireLimits& limits = {});

/// [C_T + (r_d - r_f) K C_K + r_f C] / (K^2 C_KK / 2). Throws ArbitrageError when C_KK <= 0.
LocalVarianceResult lv_deterministic_call(double dC_dT, double dC_dK, double d2C_dK2, double call, double strike,
                                          double r_d, double r_f, double discount = 1.0,
                                          const DupireLimits& limits = {});

// --- one stochastic (domestic) rate ----------------------------------------

/// rate_exp = E^T[r^d_T 1{S_T>K}], foreign rate deterministic.
LocalVarianceResult lv_single_rate_call(double dC_dT, double dC_dK, double d2C_dK2, double call, double strike,
                                        double r_f, double rate_exp, double discount,
                                        const DupireLimits& limits = {});

LocalVarianceResult lv_single_rate_tiv(const MarketPoint& mp, double rate_exp, const DupireLimits& limits = {});

// --- two stochastic rates ---------------------------------------------------

/// sigma^2 = (numerator_base - P^d drift_exp) / denominator, with a caller-supplied floor
/// on the denominator.
LocalVarianceResult lv_two_rates(double numerator_base, double drift_exp, double discount, double denominator,
                                 double denominator_floor, const DupireLimits& limits = {},
                                 double drift_std_error = 0.0);

LocalVarianceResult lv_two_rates_call(double dC_dT, double drift_exp, double discount, double d2C_dK2,
                                      double strike, const DupireLimits& limits = {},
                                      double drift_std_error = 0.0);

LocalVarianceResult lv_two_rates_tiv(const MarketPoint& mp, double drift_exp, const DupireLimits& limits = {},
                                     double drift_std_error = 0.0);

// --- generalized drift / diffusion ------------------------------------------

/// L^2 = [C_T - P^d E{(mu - (S-K) r^d) 1}] / [C_KK/2 * E(sigma_bar^2 | S=K)].
LocalVarianceResult generalized_leverage(double dC_dT, const ExpectationInputs& expectations, double discount,
                                         double d2C_dK2, double strike, const DupireLimits& limits = {});

/// L_s = sigma_LV / sqrt(E[U|S=K]); throws EstimatorError when cond_u <= 1e-8.
double slv_leverage_from_lv(double sigma_lv, double cond_u);

/// Squared SLV leverage in the TIV parametrization: the two-rate numerator over
/// dC/dw * bracket * E[U|S=K].
LocalVarianceResult slv_leverage_tiv(const MarketPoint& mp, const ExpectationInputs& expectations,
                                     const DupireLimits& limits = {});

// --- grids ------------------------------------------------------------------

/// Deterministic-rate Dupire local vol on a (strike, maturity) grid.
LeverageSurface local_vol_deterministic(const MarketSnapshot& snapshot, std::span<const double> strikes,
                                        std::span<const double> maturities, const DupireLimits& limits = {});

}  // namespace lvcal
