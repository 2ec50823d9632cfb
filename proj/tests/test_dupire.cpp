// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>

#include "lvcal/dupire.hpp"
#include "lvcal/errors.hpp"
#include "test_support.hpp"

using namespace lvcal;
using lvcal::testing::linspace;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST(Dupire, FlatSurfaceIdentity) {
    const MarketSnapshot m = lvcal::testing::flat_snapshot(0.2);
    for (double t : {0.1, 0.5, 1.0, 4.0}) {
        for (double k : {0.5, 0.9, 1.0, 1.4, 2.5}) {
            const MarketPoint mp = market_point(m, k, t);
            const LocalVarianceResult r = lv_deterministic_tiv(mp.tv, mp.bs.y);
            EXPECT_NEAR(r.variance, 0.04, 1e-15);
            EXPECT_EQ(r.flags, kFlagNone);
        }
    }
}

TEST(Dupire, SmileExampleFrozen) {
    const TotalVarianceSample tv{0.0404, 0.004, 0.02, 0.0404};
    EXPECT_NEAR(tiv_bracket(0.2, tv.w, tv.dw_dy, tv.d2w_dy2), 0.9901960395059308, 1e-15);
    EXPECT_NEAR(lv_deterministic_tiv(tv, 0.2).variance, 0.04080000160388242, 1e-15);
}

TEST(Dupire, DegenerateAndArbitrage) {
    const LocalVarianceResult r = lv_deterministic_tiv({0.04, 0.0, 0.0, 0.0}, 0.0);
    EXPECT_EQ(r.raw, 0.0);
    EXPECT_TRUE(r.flags & kFlagDegenerate);
    EXPECT_TRUE(r.flags & kFlagFlooredVariance);
    EXPECT_EQ(r.variance, 1e-8);
    EXPECT_THROW(lv_deterministic_tiv({0.04, 0.0, 0.0, -0.01}, 0.0), ArbitrageError);
    // Negative bracket is floored and flagged.
    const LocalVarianceResult f = lv_deterministic_tiv({0.04, 0.0, -4.0, 0.04}, 0.0);
    EXPECT_TRUE(f.flags & kFlagFlooredDenominator);
    EXPECT_TRUE(f.flags & kFlagCappedVariance);
    EXPECT_EQ(f.variance, 25.0);
}

TEST(Dupire, CallFormDirectRatio) {
    EXPECT_NEAR(lv_deterministic_call(0.02, -0.5, 1.0, 0.1, 1.0, 0.0, 0.0).variance, 0.04, 1e-16);
    EXPECT_THROW(lv_deterministic_call(0.02, -0.5, 0.0, 0.1, 1.0, 0.0, 0.0), ArbitrageError);
    const LocalVarianceResult r = lv_deterministic_call(-0.01, -0.5, 1.0, 0.1, 1.0, 0.0, 0.0);
    EXPECT_TRUE(r.flags & kFlagFlooredVariance);
}

TEST(Dupire, CallAndTivFormsAgree) {
    const MarketSnapshot m = lvcal::testing::smile_snapshot(0.03, 0.01);
    for (double t : linspace(0.3, 2.8, 10)) {
        for (double k : linspace(0.6, 1.6, 21)) {
            const MarketPoint mp = market_point(m, k, t);
            const CallDerivatives cd = call_derivatives(mp);
            const double a = lv_deterministic_call(cd.dC_dT, cd.dC_dK, cd.d2C_dK2, cd.price, k, 0.03, 0.01,
                                                   mp.discount)
                                 .variance;
            const double b = lv_deterministic_tiv(mp.tv, mp.bs.y).variance;
            EXPECT_LT(rel(std::sqrt(a), std::sqrt(b)), 1e-5) << "K=" << k << " T=" << t;
        }
    }
}

TEST(Dupire, ReductionChainDeterministicRates) {
    const double rd = 0.03, rf = 0.01;
    const MarketSnapshot m = lvcal::testing::smile_snapshot(rd, rf);
    for (double t : {0.5, 1.0, 2.0}) {
        for (double k : {0.7, 0.95, 1.0, 1.2, 1.5}) {
            const MarketPoint mp = market_point(m, k, t);
            const CallDerivatives cd = call_derivatives(mp);
            const double P = mp.discount;
            const double base = lv_deterministic_call(cd.dC_dT, cd.dC_dK, cd.d2C_dK2, cd.price, k, rd, rf, P).variance;
            const double prob = -cd.dC_dK / P;                    // E^T[1{S>K}]
            const double spot = (cd.price - k * cd.dC_dK) / P;    // E^T[S 1{S>K}]
            const double drift = k * rd * prob - rf * spot;

            const double single = lv_single_rate_call(cd.dC_dT, cd.dC_dK, cd.d2C_dK2, cd.price, k, rf, rd * prob, P)
                                      .variance;
            const double single_tiv = lv_single_rate_tiv(mp, rd * prob).variance;
            const double two = lv_two_rates_call(cd.dC_dT, drift, P, cd.d2C_dK2, k).variance;
            const double two_tiv = lv_two_rates_tiv(mp, drift).variance;
            const double gen = generalized_leverage(cd.dC_dT, {drift, 0.0, k * k, 0.0}, P, cd.d2C_dK2, k).variance;
            const double det_tiv = lv_deterministic_tiv(mp.tv, mp.bs.y).variance;
            EXPECT_NEAR(single, base, 1e-10);
            EXPECT_NEAR(two, base, 1e-10);
            EXPECT_NEAR(gen, base, 1e-10);
            EXPECT_NEAR(single_tiv, det_tiv, 1e-10);
            EXPECT_NEAR(two_tiv, det_tiv, 1e-10);
            EXPECT_NEAR(base, det_tiv, 1e-5 * det_tiv);
        }
    }
}

TEST(Dupire, GeneralizedReducesToTwoRates) {
    // mu = (r^d - r^f) S, sigma_bar = S: identical expectation inputs give identical output.
    const double drift = 0.0123, dC_dT = 0.031, d2 = 1.7, k = 1.1, P = 0.97;
    const double two = lv_two_rates_call(dC_dT, drift, P, d2, k).variance;
    const double gen = generalized_leverage(dC_dT, {drift, 0.0, k * k, 0.0}, P, d2, k).variance;
    EXPECT_NEAR(gen, two, 1e-12);
    // SLV: sigma_bar^2 = S^2 U gives the SLV leverage.
    const double cond_u = 0.05;
    const double slv = generalized_leverage(dC_dT, {drift, 0.0, k * k * cond_u, 0.0}, P, d2, k).variance;
    EXPECT_NEAR(slv * cond_u, two, 1e-12);
    EXPECT_THROW(generalized_leverage(dC_dT, {drift, 0.0, 0.0, 0.0}, P, d2, k), EstimatorError);
}

TEST(Dupire, SlvLink) {
    EXPECT_NEAR(slv_leverage_from_lv(0.2, 0.04), 1.0, 1e-15);
    EXPECT_NEAR(slv_leverage_from_lv(0.2, 0.0625), 0.8, 1e-15);
    EXPECT_THROW(slv_leverage_from_lv(0.2, 1e-9), EstimatorError);
    const MarketSnapshot m = lvcal::testing::smile_snapshot(0.02, 0.0);
    const MarketPoint mp = market_point(m, 1.1, 1.0);
    const CallDerivatives cd = call_derivatives(mp);
    const double drift = 0.02 * 1.1 * (-cd.dC_dK / mp.discount);
    const double lv = lv_two_rates_tiv(mp, drift).variance;
    const double l2 = slv_leverage_tiv(mp, {drift, 0.0, 0.0625, 0.0}).variance;
    EXPECT_NEAR(l2 * 0.0625, lv, 1e-14);
    EXPECT_NEAR(std::sqrt(l2), slv_leverage_from_lv(std::sqrt(lv), 0.0625), 1e-14);
}

TEST(Dupire, StandardErrorPropagation) {
    const LocalVarianceResult r = lv_two_rates(0.05, 0.01, 0.9, 0.5, 1e-6, {}, 0.002);
    EXPECT_NEAR(r.variance, (0.05 - 0.009) / 0.5, 1e-15);
    EXPECT_NEAR(r.std_error, 0.9 * 0.002 / 0.5, 1e-15);
}

TEST(Dupire, GridSurfaceFlat) {
    const MarketSnapshot m = lvcal::testing::flat_snapshot(0.2);
    const std::vector<double> ks = linspace(0.5, 2.0, 21);
    const std::vector<double> ts = linspace(0.2, 2.0, 10);
    const LeverageSurface s = local_vol_deterministic(m, ks, ts);
    EXPECT_EQ(s.kind(), SurfaceKind::local_vol);
    for (double v : s.values()) EXPECT_NEAR(v, 0.2, 1e-10);
}
