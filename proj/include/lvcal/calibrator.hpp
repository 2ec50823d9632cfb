// SPDX-License-Identifier: MIT
/// @file calibrator.hpp
/// @brief Forward bootstrap of the local-vol surface under stochastic rates and
///        of the SLV leverage function
///
/// Slice i of the output governs (T_{i-1}, T_i]. For each slice the paths are
/// simulated from a checkpoint at T_{i-1} with a trial slice, the expectations
/// are re-estimated at T_i and the slice is updated by fixed-point iteration.
/// The final slice is re-simulated once more so the stored paths are exactly
/// those of the calibrated model.

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "lvcal/dupire.hpp"
#include "lvcal/leverage_surface.hpp"
#include "lvcal/market.hpp"
#include "lvcal/mc.hpp"
#include "lvcal/model.hpp"

namespace lvcal {

struct CalibrationConfig {
    std::vector<double> strike_grid;
    std::vector<double> maturity_grid;
    std::size_t n_paths = 100000;
    std::uint64_t seed = 1;
    std::size_t inner_iterations = 2;
    double tolerance = 2e-3;
    ConditionalEstimator estimator;
    SimulationOptions simulation;
    DupireLimits limits;
    bool drift_control_variate = true;
    bool gyongy_check = true;  ///< SLV only: KS test against the pure-LV marginal

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

struct NodeReport {
    double maturity = 0.0;
    double strike = 0.0;
    double value = 0.0;       ///< sigma_LV or L
    double std_error = 0.0;   ///< first-order band on value
    std::uint32_t flags = kFlagNone;
    double expectation = 0.0; ///< drift expectation (LV) or E[U|S=K] on the final paths (SLV)
    double expectation_std_error = 0.0;
    double target = 0.0;      ///< SLV: sigma_LV at the node; LV: deterministic-rate local vol
    double repricing_bps = std::numeric_limits<double>::quiet_NaN();
};

struct SliceReport {
    double maturity = 0.0;
    std::size_t sweeps = 0;
    double max_delta = 0.0;   ///< max |delta log value| of the last sweep
    bool converged = false;
};

struct GyongyDiagnostic {
    double maturity = 0.0;
    double ks_statistic = 0.0;
    double critical_value = 0.0;  ///< 1% level, 1.628 sqrt((n1+n2)/(n1 n2))
    bool passed = false;
};

struct CalibrationReport {
    LeverageSurface surface;
    std::vector<NodeReport> nodes;  ///< row-major [maturity][strike]
    std::vector<SliceReport> slices;
    std::optional<GyongyDiagnostic> gyongy;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;

    const NodeReport& node(std::size_t t_index, std::size_t k_index) const {
        return nodes[t_index * surface.strikes().size() + k_index];
    }
};

/// sigma_LV under stochastic rates. The model's variance block is ignored
/// (pure local vol: U = 1, L = sigma_LV).
CalibrationReport calibrate_local_vol(const MarketSnapshot& snapshot, const ModelSpec& spec,
                                      const CalibrationConfig& cfg);

/// SLV leverage L = sigma_LV / sqrt(E^T[U | S = K]) given a local-vol surface.
CalibrationReport calibrate_slv_leverage(const MarketSnapshot& snapshot, const ModelSpec& spec,
                                         const CalibrationConfig& cfg, const LeverageSurface& sigma_lv);

/// Pure local-vol model spec carrying sigma_lv as its leverage.
ModelSpec local_vol_model(const ModelSpec& base, const LeverageSurface& sigma_lv);

struct RepricingPoint {
    double maturity = 0.0;
    double strike = 0.0;
    double y = 0.0;
    double market_vol = 0.0;
    double model_vol = std::numeric_limits<double>::quiet_NaN();
    double price = 0.0;
    double std_error = 0.0;
    double vol_std_error = 0.0;
    double error_bps = std::numeric_limits<double>::quiet_NaN();
};

/// Prices out-of-the-money vanillas at log-moneyness ys and the given
/// maturities on fresh paths of `model` and compares implied vols.
std::vector<RepricingPoint> reprice_vanillas(const MarketSnapshot& snapshot, const ValidatedModel& model,
                                             std::span<const double> ys, std::span<const double> maturities,
                                             std::size_t n_paths, std::uint64_t seed,
                                             SimulationOptions options = {});

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// 1% critical value of the two-sample KS statistic.
double ks_critical_value(std::size_t n1, std::size_t n2);

}  // namespace lvcal
