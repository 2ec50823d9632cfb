// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>

#include "lvcal/black_scholes.hpp"
#include "lvcal/errors.hpp"
#include "lvcal/market.hpp"
#include "test_support.hpp"

using namespace lvcal;

namespace {

BsPoint point(double y, double w, double disc_fwd = 1.0) { return BsPoint{1.0, y, w, disc_fwd, 0.0, 0.0}; }

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace

TEST(BlackScholes, AtTheMoneyPrice) {
    // N(0.1) - N(-0.1)
    EXPECT_NEAR(bs_call_tiv(point(0.0, 0.04)), 0.07965567455405798, 1e-15);
}

TEST(BlackScholes, Limits) {
    EXPECT_LT(bs_call_tiv(point(40.0, 0.04)), 1e-12);
    EXPECT_NEAR(bs_call_tiv(point(0.0, 1e4)), 1.0, 1e-6);
    EXPECT_THROW(bs_call_tiv(point(0.0, 0.0)), DomainError);
    EXPECT_THROW(bs_partials(point(0.0, -1.0)), DomainError);
}

TEST(BlackScholes, PriceBoundsAndMonotoneInY) {
    double prev = 2.0;
    for (double y = -2.0; y <= 2.0; y += 0.05) {
        const double c = bs_call_tiv(point(y, 0.09, 1.3));
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.3);
        EXPECT_LT(c, prev);
        prev = c;
    }
}

TEST(BlackScholes, VegaInVarianceAtTheMoney) {
    // 0.5 N'(0.1) / 0.2, evaluated independently.
    EXPECT_NEAR(bs_partials(point(0.0, 0.04)).dC_dw, 0.9923813686925295, 1e-14);
}

TEST(BlackScholes, PartialIdentities) {
    for (double y : {-0.7, -0.1, 0.0, 0.25, 0.9}) {
        for (double w : {0.01, 0.04, 0.3}) {
            const BsPoint p = point(y, w, 0.87);
            const BsPartials g = bs_partials(p);
            EXPECT_NEAR(g.d2C_dy2 - g.dC_dy - 2.0 * g.dC_dw, 0.0, 1e-12);
            const double sw = std::sqrt(w);
            const double d1 = -y / sw + 0.5 * sw;
            const double d2 = d1 - sw;
            EXPECT_NEAR(norm_pdf(d1), std::exp(y) * norm_pdf(d2), 1e-12);
            EXPECT_NEAR(g.price + 0.87 * std::exp(y) * norm_cdf(d2) - 0.87 * norm_cdf(d1), 0.0, 1e-12);
            EXPECT_GT(g.dC_dw, 0.0);
            EXPECT_LT(g.dC_dy, 0.0);
        }
    }
    const BsPartials g0 = bs_partials(point(0.0, 0.04));
    EXPECT_EQ(g0.d2C_dwdy, 0.5 * g0.dC_dw);
}

TEST(BlackScholes, PartialsMatchFiniteDifferences) {
    for (double y : {-0.4, 0.0, 0.3}) {
        for (double w : {0.02, 0.04, 0.25}) {
            const BsPoint p = point(y, w);
            const BsPartials g = bs_partials(p);
            auto c = [&](double dy, double dw) { return bs_call_tiv(point(y + dy, w + dw)); };
            const double hw = 1e-5 * w;
            const double hy = 1e-5;
            EXPECT_LT(rel(g.dC_dw, (c(0, hw) - c(0, -hw)) / (2 * hw)), 1e-6);
            EXPECT_LT(rel(g.dC_dy, (c(hy, 0) - c(-hy, 0)) / (2 * hy)), 1e-6);
            const double hw2 = 1e-2 * w;
            const double hy2 = 1e-2;
            using lvcal::testing::mixed_diff;
            using lvcal::testing::second_diff;
            EXPECT_LT(rel(g.d2C_dw2, second_diff([&](double h) { return c(0, h); }, hw2)), 1e-6);
            EXPECT_LT(rel(g.d2C_dy2, second_diff([&](double h) { return c(h, 0); }, hy2)), 1e-6);
            EXPECT_LT(rel(g.d2C_dwdy, mixed_diff([&](double a, double b) { return c(a, b); }, hy2, hw2)), 1e-6);
        }
    }
}

TEST(BlackScholes, BracketArithmetic) {
    EXPECT_EQ(tiv_bracket(0.3, 0.04, 0.0, 0.0), 1.0);
    EXPECT_NEAR(tiv_bracket(0.0, 0.04, 0.01, 0.02), 1.00936875, 1e-15);
    const BsPoint p = point(0.0, 0.04);
    EXPECT_EQ(dupire_denominator(p, 0.0, 0.0), bs_partials(p).dC_dw);
    EXPECT_NEAR(dupire_denominator(p, 0.01, 0.02), 0.9923813686925295 * 1.00936875, 1e-14);
}

TEST(BlackScholes, DenominatorMatchesStrikeConvexity) {
    const MarketSnapshot m = lvcal::testing::smile_snapshot();
    for (double t : {0.5, 1.0, 2.0}) {
        for (double k : {0.8, 1.0, 1.25}) {
            const MarketPoint mp = market_point(m, k, t);
            const double h = 1e-4 * k;
            auto price = [&](double kk) { return bs_call_tiv(market_point(m, kk, t).bs); };
            const double fd = 0.5 * k * k * (price(k + h) - 2 * price(k) + price(k - h)) / (h * h);
            EXPECT_LT(rel(dupire_denominator(mp.bs, mp.tv.dw_dy, mp.tv.d2w_dy2), fd), 1e-5);
            const double fd_k = (price(k + 1e-6) - price(k - 1e-6)) / 2e-6;
            EXPECT_LT(rel(strike_delta_times_k(mp.bs, mp.tv.dw_dy), k * fd_k), 1e-6);
        }
    }
}

TEST(BlackScholes, ThetaSpecialCases) {
    const double sigma2 = 0.04;
    BsPoint p{1.0, 0.1, sigma2, 1.0, 0.0, 0.0};
    EXPECT_NEAR(bs_theta_tiv(p, 0.0, sigma2), bs_partials(p).dC_dw * sigma2, 1e-16);
    p.f_dom = p.f_for = 0.03;
    EXPECT_NEAR(bs_theta_tiv(p, 0.0, sigma2), -0.03 * bs_call_tiv(p) + bs_partials(p).dC_dw * sigma2, 1e-16);
}

TEST(BlackScholes, ThetaMatchesMaturityFiniteDifference) {
    const MarketSnapshot m = lvcal::testing::smile_snapshot(0.03, 0.01);
    for (double t : {0.6, 1.1, 2.2}) {
        for (double k : {0.8, 1.0, 1.3}) {
            const MarketPoint mp = market_point(m, k, t);
            const double h = 1e-5;
            const double fd =
                (bs_call_tiv(market_point(m, k, t + h).bs) - bs_call_tiv(market_point(m, k, t - h).bs)) / (2 * h);
            EXPECT_LT(rel(bs_theta_tiv(mp.bs, mp.tv.dw_dy, mp.tv.dw_dt), fd), 1e-5);
        }
    }
}

TEST(BlackScholes, ImpliedVarianceInversion) {
    const double c = bs_call_tiv(point(0.0, 0.04));
    EXPECT_NEAR(implied_total_variance(c, 1.0, 0.0).w, 0.04, 1e-14);
    EXPECT_NEAR(std::sqrt(implied_total_variance(0.0796557, 1.0, 0.0).w), 0.2, 1e-6);
    for (double y : {-1.0, -0.2, 0.3, 1.2}) {
        for (double w : {1e-3, 0.04, 0.5}) {
            const double price = bs_call_tiv(point(y, w, 0.9));
            const ImpliedVariance iv = implied_total_variance(price, 0.9, y);
            if (iv.at_intrinsic) {
                // Time value below the solver band: only the intrinsic is recoverable.
                EXPECT_NEAR(price, 0.9 * std::max(1.0 - std::exp(y), 0.0), 1e-14);
                continue;
            }
            EXPECT_NEAR(bs_call_tiv(point(y, iv.w, 0.9)), price, 1e-10 * std::max(1.0, price));
        }
    }
    const ImpliedVariance at = implied_total_variance(1.0 - std::exp(-0.2), 1.0, -0.2);
    EXPECT_TRUE(at.at_intrinsic);
    EXPECT_EQ(at.w, 0.0);
    EXPECT_THROW(implied_total_variance(1.5, 1.0, 0.0), SolverError);
    EXPECT_THROW(implied_total_variance(0.01, 1.0, -0.2), SolverError);
}
