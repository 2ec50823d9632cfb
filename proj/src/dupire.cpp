// SPDX-License-Identifier: MIT
#include "lvcal/dupire.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lvcal/errors.hpp"

namespace lvcal {

namespace {

// Round-off allowance on dw/dT for calendar-flat data.
constexpr double kCalendarSlack = 1e-14;
constexpr double kMinConditional = 1e-8;

LocalVarianceResult finish(double numerator, double denominator, std::uint32_t flags, const DupireLimits& limits,
                           double numerator_std_error = 0.0) {
    LocalVarianceResult r;
    r.raw = numerator / denominator;
    r.std_error = std::abs(numerator_std_error / denominator);
    r.flags = flags;
    if (numerator == 0.0) r.flags |= kFlagDegenerate;
    if (!(r.raw >= limits.min_variance)) {
        r.variance = limits.min_variance;
        r.flags |= kFlagFlooredVariance;
    } else if (r.raw > limits.max_variance) {
        r.variance = limits.max_variance;
        r.flags |= kFlagCappedVariance;
    } else {
        r.variance = r.raw;
    }
    return r;
}

double floored(double value, double floor, std::uint32_t& flags) {
    if (value < floor) {
        flags |= kFlagFlooredDenominator;
        return floor;
    }
    return value;
}

double convexity_floor(double discount, double strike, const DupireLimits& limits) {
    return limits.convexity_floor_scale * discount / strike;
}

void require_convexity(double d2C_dK2, double strike) {
    if (!(d2C_dK2 > 0.0)) {
        throw ArbitrageError("butterfly arbitrage: d2C/dK2 = " + std::to_string(d2C_dK2) + " at K = " +
                             std::to_string(strike));
    }
}

}  // namespace

CallDerivatives call_derivatives(const MarketPoint& mp) {
    const BsPartials g = bs_partials(mp.bs);
    CallDerivatives d;
    d.price = g.price;
    d.dC_dT = bs_theta_tiv(mp.bs, mp.tv.dw_dy, mp.tv.dw_dt);
    d.dC_dK = (g.dC_dy + g.dC_dw * mp.tv.dw_dy) / mp.strike;
    d.d2C_dK2 = 2.0 * g.dC_dw * tiv_bracket(mp.bs.y, mp.bs.w, mp.tv.dw_dy, mp.tv.d2w_dy2) / (mp.strike * mp.strike);
    return d;
}

LocalVarianceResult lv_deterministic_tiv(const TotalVarianceSample& tv, double y, const DupireLimits& limits) {
    if (tv.dw_dt < -kCalendarSlack) {
        throw ArbitrageError("calendar arbitrage: dw/dT = " + std::to_string(tv.dw_dt) + " at y = " +
                             std::to_string(y));
    }
    std::uint32_t flags = kFlagNone;
    const double bracket = floored(tiv_bracket(y, tv.w, tv.dw_dy, tv.d2w_dy2), limits.bracket_floor, flags);
    return finish(std::max(tv.dw_dt, 0.0), bracket, flags, limits);
}

LocalVarianceResult lv_deterministic_call(double dC_dT, double dC_dK, double d2C_dK2, double call, double strike,
                                          double r_d, double r_f, double discount, const DupireLimits& limits) {
    require_convexity(d2C_dK2, strike);
    std::uint32_t flags = kFlagNone;
    const double convexity = floored(d2C_dK2, convexity_floor(discount, strike, limits), flags);
    const double numerator = dC_dT + (r_d - r_f) * strike * dC_dK + r_f * call;
    return finish(numerator, 0.5 * strike * strike * convexity, flags, limits);
}

LocalVarianceResult lv_single_rate_call(double dC_dT, double dC_dK, double d2C_dK2, double call, double strike,
                                        double r_f, double rate_exp, double discount, const DupireLimits& limits) {
    require_convexity(d2C_dK2, strike);
    std::uint32_t flags = kFlagNone;
    const double convexity = floored(d2C_dK2, convexity_floor(discount, strike, limits), flags);
    const double numerator = dC_dT - discount * strike * rate_exp + r_f * (call - strike * dC_dK);
    return finish(numerator, 0.5 * strike * strike * convexity, flags, limits);
}

LocalVarianceResult lv_single_rate_tiv(const MarketPoint& mp, double rate_exp, const DupireLimits& limits) {
    const BsPartials g = bs_partials(mp.bs);
    std::uint32_t flags = kFlagNone;
    const double bracket =
        floored(tiv_bracket(mp.bs.y, mp.bs.w, mp.tv.dw_dy, mp.tv.d2w_dy2), limits.bracket_floor, flags);
    const double numerator = g.dC_dw * mp.tv.dw_dt - mp.bs.f_dom * (g.dC_dy + g.dC_dw * mp.tv.dw_dy) -
                             mp.discount * mp.strike * rate_exp;
    return finish(numerator, g.dC_dw * bracket, flags, limits);
}

LocalVarianceResult lv_two_rates(double numerator_base, double drift_exp, double discount, double denominator,
                                 double denominator_floor, const DupireLimits& limits, double drift_std_error) {
    std::uint32_t flags = kFlagNone;
    const double denom = floored(denominator, denominator_floor, flags);
    return finish(numerator_base - discount * drift_exp, denom, flags, limits, discount * drift_std_error);
}

LocalVarianceResult lv_two_rates_call(double dC_dT, double drift_exp, double discount, double d2C_dK2,
                                      double strike, const DupireLimits& limits, double drift_std_error) {
    const double floor = 0.5 * strike * strike * convexity_floor(discount, strike, limits);
    return lv_two_rates(dC_dT, drift_exp, discount, 0.5 * strike * strike * d2C_dK2, floor, limits,
                        drift_std_error);
}

LocalVarianceResult lv_two_rates_tiv(const MarketPoint& mp, double drift_exp, const DupireLimits& limits,
                                     double drift_std_error) {
    const BsPartials g = bs_partials(mp.bs);
    std::uint32_t flags = kFlagNone;
    const double bracket =
        floored(tiv_bracket(mp.bs.y, mp.bs.w, mp.tv.dw_dy, mp.tv.d2w_dy2), limits.bracket_floor, flags);
    const double theta = bs_theta_tiv(mp.bs, mp.tv.dw_dy, mp.tv.dw_dt);
    LocalVarianceResult r = finish(theta - mp.discount * drift_exp, g.dC_dw * bracket, flags, limits,
                                   mp.discount * drift_std_error);
    return r;
}

LocalVarianceResult generalized_leverage(double dC_dT, const ExpectationInputs& e, double discount, double d2C_dK2,
                                         double strike, const DupireLimits& limits) {
    if (!(e.cond_var > 0.0)) {
        throw EstimatorError("conditional expectation of sigma_bar^2 must be positive, got " +
                             std::to_string(e.cond_var));
    }
    require_convexity(d2C_dK2, strike);
    std::uint32_t flags = kFlagNone;
    const double convexity = floored(d2C_dK2, convexity_floor(discount, strike, limits), flags);
    const double denom = 0.5 * convexity * e.cond_var;
    LocalVarianceResult r = finish(dC_dT - discount * e.drift_term, denom, flags, limits);
    const double from_drift = discount * e.drift_std_error / denom;
    const double from_cond = std::abs(r.raw) * e.cond_var_std_error / e.cond_var;
    r.std_error = std::hypot(from_drift, from_cond);
    return r;
}

double slv_leverage_from_lv(double sigma_lv, double cond_u) {
    if (!(sigma_lv >= 0.0)) throw DomainError("local volatility must be non-negative");
    if (!(cond_u > kMinConditional)) {
        throw EstimatorError("E[U|S=K] = " + std::to_string(cond_u) + " too small to define a leverage");
    }
    return sigma_lv / std::sqrt(cond_u);
}

LocalVarianceResult slv_leverage_tiv(const MarketPoint& mp, const ExpectationInputs& e, const DupireLimits& limits) {
    if (!(e.cond_var > kMinConditional)) {
        throw EstimatorError("E[U|S=K] = " + std::to_string(e.cond_var) + " too small to define a leverage");
    }
    const BsPartials g = bs_partials(mp.bs);
    std::uint32_t flags = kFlagNone;
    const double bracket =
        floored(tiv_bracket(mp.bs.y, mp.bs.w, mp.tv.dw_dy, mp.tv.d2w_dy2), limits.bracket_floor, flags);
    const double theta = bs_theta_tiv(mp.bs, mp.tv.dw_dy, mp.tv.dw_dt);
    const double denom = g.dC_dw * bracket * e.cond_var;
    LocalVarianceResult r = finish(theta - mp.discount * e.drift_term, denom, flags, limits);
    r.std_error = std::hypot(mp.discount * e.drift_std_error / denom, std::abs(r.raw) * e.cond_var_std_error / e.cond_var);
    return r;
}

LeverageSurface local_vol_deterministic(const MarketSnapshot& snapshot, std::span<const double> strikes,
                                        std::span<const double> maturities, const DupireLimits& limits) {
    std::vector<double> values;
    std::vector<std::uint32_t> flags;
    values.reserve(strikes.size() * maturities.size());
    flags.reserve(values.capacity());
    for (double t : maturities) {
        for (double k : strikes) {
            const MarketPoint mp = market_point(snapshot, k, t);
            const LocalVarianceResult r = lv_deterministic_tiv(mp.tv, mp.bs.y, limits);
            values.push_back(std::sqrt(r.variance));
            flags.push_back(r.flags);
        }
    }
    return LeverageSurface(SurfaceKind::local_vol, std::vector<double>(strikes.begin(), strikes.end()),
                           std::vector<double>(maturities.begin(), maturities.end()), std::move(values),
                           std::move(flags));
}

}  // namespace lvcal
