// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>

#include "lvcal/calibrator.hpp"
#include "lvcal/errors.hpp"
#include "test_support.hpp"

using namespace lvcal;
using lvcal::testing::linspace;
using lvcal::testing::vec;

namespace {

ModelSpec rates_spec(const MarketSnapshot& m, double sigma_rates) {
    ModelSpec spec;
    spec.spot0 = m.spot;
    spec.domestic_curve = m.domestic;
    spec.foreign_curve = m.foreign;
    spec.rate_d = {0.1, sigma_rates};
    spec.rate_f = {0.1, sigma_rates};
    spec.correlation = make_correlation(0.3, -0.2, 0.2, 0.0);
    return spec;
}

CalibrationConfig small_config(std::size_t n_paths) {
    CalibrationConfig cfg;
    cfg.strike_grid = linspace(0.7, 1.4, 8);
    cfg.maturity_grid = {0.5, 1.0};
    cfg.n_paths = n_paths;
    cfg.seed = 17;
    return cfg;
}

}  // namespace

TEST(Calibrator, DeterministicRatesReproduceDupire) {
    const MarketSnapshot m = lvcal::testing::smile_snapshot(0.03, 0.01);
    const CalibrationConfig cfg = small_config(4000);
    const CalibrationReport r = calibrate_local_vol(m, rates_spec(m, 0.0), cfg);
    const LeverageSurface det = local_vol_deterministic(m, cfg.strike_grid, cfg.maturity_grid);
    for (std::size_t i = 0; i < cfg.maturity_grid.size(); ++i) {
        EXPECT_TRUE(r.slices[i].converged);
        EXPECT_EQ(r.slices[i].sweeps, 1u);
        for (std::size_t k = 0; k < cfg.strike_grid.size(); ++k) {
            EXPECT_NEAR(r.node(i, k).value, det.slice(i)[k], 1e-10);
            EXPECT_NEAR(r.node(i, k).value, r.node(i, k).target, 1e-10);
        }
    }
}

TEST(Calibrator, ConstantVarianceLeverage) {
    const MarketSnapshot m = lvcal::testing::smile_snapshot(0.03, 0.01);
    CalibrationConfig cfg = small_config(4000);
    const LeverageSurface lv = local_vol_deterministic(m, cfg.strike_grid, cfg.maturity_grid);
    ModelSpec spec = rates_spec(m, 0.0);
    spec.variance = {0.0, 0.04, 0.0, 0.04};
    const CalibrationReport r = calibrate_slv_leverage(m, spec, cfg, lv);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t k = 0; k < cfg.strike_grid.size(); ++k) {
            EXPECT_NEAR(r.node(i, k).value, lv.slice(i)[k] / 0.2, 1e-12);
        }
    }
    ASSERT_TRUE(r.gyongy.has_value());
    EXPECT_NEAR(r.gyongy->critical_value, ks_critical_value(4000, 4000), 0.0);
}

TEST(Calibrator, SameSeedSameSurface) {
    const MarketSnapshot m = lvcal::testing::smile_snapshot(0.03, 0.01);
    const CalibrationConfig cfg = small_config(5000);
    const CalibrationReport a = calibrate_local_vol(m, rates_spec(m, 0.01), cfg);
    const CalibrationReport b = calibrate_local_vol(m, rates_spec(m, 0.01), cfg);
    EXPECT_EQ(vec(a.surface.values()), vec(b.surface.values()));
    CalibrationConfig other = cfg;
    other.seed = 18;
    EXPECT_NE(vec(calibrate_local_vol(m, rates_spec(m, 0.01), other).surface.values()), vec(a.surface.values()));
}

TEST(Calibrator, LaterSlicesDoNotMoveEarlierOnes) {
    const std::vector<double> mats = linspace(0.25, 3.0, 12);
    const MarketSnapshot a = lvcal::testing::smile_snapshot(0.03, 0.01);
    std::vector<double> ys = linspace(-1.5, 1.5, 121);
    std::vector<double> w;
    for (double t : mats) {
        for (double y : ys) w.push_back((0.04 - 0.004 * y + 0.02 * y * y) * t * (t >= 2.0 ? 1.1 : 1.0));
    }
    const MarketSnapshot b(1.0, a.domestic, a.foreign, TotalVarianceSurface(ys, mats, w));
    CalibrationConfig cfg = small_config(3000);
    cfg.maturity_grid = {0.5, 1.0, 1.5};
    const CalibrationReport ra = calibrate_local_vol(a, rates_spec(a, 0.01), cfg);
    const CalibrationReport rb = calibrate_local_vol(b, rates_spec(b, 0.01), cfg);
    EXPECT_EQ(vec(ra.surface.values()), vec(rb.surface.values()));
}

TEST(Calibrator, StochasticRatesRoundTrip) {
    const MarketSnapshot m = lvcal::testing::flat_snapshot(0.2, 0.03, 0.01);
    CalibrationConfig cfg;
    cfg.strike_grid = linspace(0.6, 1.6, 21);
    cfg.maturity_grid = {0.5, 1.0};
    cfg.n_paths = 20000;
    cfg.seed = 3;
    const ModelSpec spec = rates_spec(m, 0.01);
    const CalibrationReport r = calibrate_local_vol(m, spec, cfg);
    const ValidatedModel model(local_vol_model(spec, r.surface));
    const double ys[] = {-0.2, 0.0, 0.2};
    const double ts[] = {0.5, 1.0};
    for (const RepricingPoint& p : reprice_vanillas(m, model, ys, ts, 20000, 1234)) {
        EXPECT_LT(std::abs(p.error_bps), 30.0 + 4.0 * p.vol_std_error * 1e4) << p.maturity << " " << p.y;
    }
}

TEST(Calibrator, ConfigErrorsNameTheField) {
    const MarketSnapshot m = lvcal::testing::flat_snapshot(0.2);
    CalibrationConfig cfg = small_config(100);
    cfg.strike_grid = {1.0, 0.9};
    try {
        calibrate_local_vol(m, ModelSpec{}, cfg);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("strike_grid"), std::string::npos);
    }
    cfg = small_config(0);
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = small_config(100);
    cfg.maturity_grid = {20.0};
    EXPECT_THROW(calibrate_local_vol(m, ModelSpec{}, cfg), OutOfRangeError);
}

TEST(KolmogorovSmirnov, Statistic) {
    EXPECT_EQ(ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
    EXPECT_EQ(ks_statistic({1, 2, 3}, {4, 5}), 1.0);
    EXPECT_NEAR(ks_statistic({1, 2, 3, 4}, {2.5, 3.5}), 0.5, 1e-15);
    EXPECT_NEAR(ks_critical_value(100000, 100000), 1.6276236307187293 * std::sqrt(2e-5), 1e-12);
    EXPECT_THROW(ks_statistic({}, {1.0}), DomainError);
}
