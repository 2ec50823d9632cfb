// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>

#include "lvcal/errors.hpp"
#include "lvcal/market.hpp"
#include "lvcal/surface.hpp"
#include "test_support.hpp"

using namespace lvcal;
using lvcal::testing::linspace;
using lvcal::testing::polynomial_surface;

TEST(Surface, FlatSurfaceSample) {
    const TotalVarianceSurface s = flat_surface(0.2, std::vector<double>{0.5, 1.0, 2.0});
    const TotalVarianceSample v = s.eval(0.1, 1.0);
    EXPECT_NEAR(v.w, 0.04, 1e-15);
    EXPECT_NEAR(v.dw_dy, 0.0, 1e-15);
    EXPECT_NEAR(v.d2w_dy2, 0.0, 1e-15);
    EXPECT_NEAR(v.dw_dt, 0.04, 1e-15);
}

TEST(Surface, PolynomialSurfaceSample) {
    const TotalVarianceSurface s = polynomial_surface(0.04, 0.0, 0.01, linspace(0.25, 3.0, 12), 1.5, 301);
    const TotalVarianceSample v = s.eval(0.2, 1.0);
    EXPECT_NEAR(v.w, 0.0404, 1e-6);
    EXPECT_NEAR(v.dw_dy, 0.004, 1e-6);
    EXPECT_NEAR(v.d2w_dy2, 0.02, 1e-6);
    EXPECT_NEAR(v.dw_dt, 0.0404, 1e-6);
}

TEST(Surface, FlatExtrapolationInY) {
    const TotalVarianceSurface s = polynomial_surface(0.04, 0.01, 0.02, {0.5, 1.0});
    const TotalVarianceSample v = s.eval(2.5, 0.7);
    EXPECT_EQ(v.dw_dy, 0.0);
    EXPECT_EQ(v.d2w_dy2, 0.0);
    EXPECT_NEAR(v.w, s.eval(1.5, 0.7).w, 1e-15);
    // The end knot itself keeps the spline slope.
    const TotalVarianceSample edge = s.eval(1.5, 1.0);
    EXPECT_NEAR(edge.dw_dy, s.eval(1.5 - 1e-9, 1.0).dw_dy, 1e-8);
    EXPECT_GT(edge.dw_dy, 0.0);
}

TEST(Surface, LinearInTimeOutsideSlices) {
    const TotalVarianceSurface s = flat_surface(0.2, std::vector<double>{0.5, 1.0});
    EXPECT_NEAR(s.eval(0.0, 0.1).w, 0.004, 1e-15);
    EXPECT_NEAR(s.eval(0.0, 3.0).w, 0.12, 1e-14);
    EXPECT_THROW(s.eval(0.0, 0.0), DomainError);
    EXPECT_THROW(s.eval(0.0, -1.0), DomainError);
}

TEST(Surface, PartialsMatchFiniteDifferences) {
    // Non-separable data so the T-interpolant is non-trivial.
    std::vector<double> ys = linspace(-1.0, 1.0, 41);
    std::vector<double> ts = {0.25, 0.5, 1.0, 1.5, 2.5};
    std::vector<double> w;
    for (double t : ts) {
        for (double y : ys) w.push_back(0.04 * t + 0.01 * y * y * std::sqrt(t) + 0.003 * y * t * t);
    }
    const TotalVarianceSurface s(ys, ts, w);
    const double h = 1e-5;
    for (double t : {0.3, 0.7, 1.2, 2.0}) {
        for (double y : {-0.63, -0.2, 0.11, 0.47}) {
            const TotalVarianceSample v = s.eval(y, t);
            const double fd_y = (s.eval(y + h, t).w - s.eval(y - h, t).w) / (2 * h);
            const double fd_yy = (s.eval(y + h, t).dw_dy - s.eval(y - h, t).dw_dy) / (2 * h);
            const double fd_t = (s.eval(y, t + h).w - s.eval(y, t - h).w) / (2 * h);
            EXPECT_NEAR(v.dw_dy, fd_y, 1e-6 * std::max(1.0, std::abs(fd_y)));
            EXPECT_NEAR(v.d2w_dy2, fd_yy, 1e-6 * std::max(1.0, std::abs(fd_yy)));
            EXPECT_NEAR(v.dw_dt, fd_t, 1e-6 * std::max(1.0, std::abs(fd_t)));
        }
    }
}

TEST(Surface, CalendarMonotone) {
    std::vector<double> ys = linspace(-1.0, 1.0, 21);
    std::vector<double> ts = {0.25, 0.5, 1.0, 2.0};
    std::vector<double> w;
    // Flat segment between 0.5 and 1.0 in the wings.
    for (double t : ts) {
        for (double y : ys) w.push_back(0.04 * std::min(t, 0.5 + 0.5 * (1.0 - std::abs(y))) + 0.04 * t * 0.01);
    }
    const TotalVarianceSurface s(ys, ts, w);
    for (double y : {-0.9, -0.3, 0.0, 0.55}) {
        double prev = 0.0;
        for (double t = 0.05; t < 2.5; t += 0.01) {
            const TotalVarianceSample v = s.eval(y, t);
            EXPECT_GE(v.w, prev - 1e-15);
            EXPECT_GE(v.dw_dt, -1e-14);
            prev = v.w;
        }
    }
}

TEST(Surface, RejectsBadInput) {
    std::vector<double> ys = {-0.5, 0.0, 0.5};
    EXPECT_THROW(TotalVarianceSurface(ys, {1.0, 2.0}, std::vector<double>{0.04, 0.04, 0.04, 0.05, 0.03, 0.05}),
                 ArbitrageError);
    EXPECT_THROW(TotalVarianceSurface(ys, {1.0}, std::vector<double>{0.04, 0.0, 0.04}), ValidationError);
    EXPECT_THROW(TotalVarianceSurface(ys, {1.0, 1.0}, std::vector<double>(6, 0.04)), ValidationError);
    EXPECT_THROW(TotalVarianceSurface(ys, {1.0}, std::vector<double>(2, 0.04)), ValidationError);
}

TEST(Surface, PerSliceGrids) {
    std::vector<TotalVarianceSurface::Slice> slices;
    slices.push_back({0.5, {-0.4, 0.0, 0.4}, {0.022, 0.02, 0.021}});
    slices.push_back({1.0, {-0.6, -0.1, 0.3, 0.7}, {0.046, 0.0401, 0.041, 0.043}});
    const TotalVarianceSurface s(slices);
    EXPECT_NEAR(s.eval(0.0, 0.5).w, 0.02, 1e-15);
    EXPECT_NEAR(s.eval(0.3, 1.0).w, 0.041, 1e-15);
    const auto [lo, hi] = s.y_range(0.75);
    EXPECT_EQ(lo, -0.6);
    EXPECT_EQ(hi, 0.7);
}
