// SPDX-License-Identifier: MIT
/// @file mc.hpp
/// @brief Path simulation under the domestic risk-neutral measure and the
///        T-forward expectations consumed by the Dupire formulas
///
/// Scheme per step [t, t+dt], all drivers correlated through the cached
/// Cholesky factor:
///   x^d, x^f   exact Ornstein-Uhlenbeck step, r = x + phi(t)
///   int r^d    phi integrated analytically, x by the trapezoid rule
///   log S      frozen-coefficient GBM step, drift from the same rate integrals
///   U          full-truncation Euler
/// Q^T expectations are DRN averages weighted by exp(-int r^d) / P^d(0,T).

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lvcal/leverage_surface.hpp"
#include "lvcal/market.hpp"
#include "lvcal/model.hpp"

namespace lvcal {

struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    double n_effective = 0.0;
};

struct SimulationOptions {
    double max_dt = 0.02;
    bool antithetic = false;
};

/// Read-only view of all paths at one time.
struct PathView {
    double t = 0.0;
    std::span<const double> s;
    std::span<const double> r_d;
    std::span<const double> r_f;
    std::span<const double> u;
    std::span<const double> mm;      ///< int_0^t r^d
    std::span<const double> weight;  ///< exp(-mm) / P^d(0,t)
    double discount = 1.0;           ///< P^d(0,t)

    std::size_t size() const noexcept { return s.size(); }
    StateVector state(std::size_t i) const { return StateVector{s[i], r_d[i], r_f[i], u[i], {}}; }
};

/// Owns the simulation state of a path population and advances it in time.
///
/// The Gaussian draws depend on (seed, path, global step index) only, so
/// restore() followed by the same advance() sequence reproduces the paths
/// exactly when the leverage is unchanged.
class PathSimulator {
public:
    PathSimulator(const ValidatedModel& model, std::size_t n_paths, std::uint64_t seed,
                  SimulationOptions options = {});

    /// Leverage used by subsequent steps; nullptr restores the model's own.
    /// The surface must outlive the calls to advance().
    void set_leverage(const LeverageSurface* leverage) noexcept { leverage_ = leverage; }

    /// Steps from the current time to t_target in equal steps of at most max_dt.
    void advance(double t_target);

    void checkpoint();
    void restore();

    double time() const noexcept { return t_; }
    std::uint64_t step_index() const noexcept { return step_; }
    std::size_t n_paths() const noexcept { return n_; }

    /// Materializes spot, rates and weights at the current time.
    PathView view();

private:
    struct State {
        double t = 0.0;
        std::uint64_t step = 0;
        std::vector<double> log_s, x_d, x_f, ix_d, u;
    };

    void step_chunk(std::size_t begin, std::size_t end, double t0, double dt, std::uint64_t step,
                    std::span<const double> lev_strikes, std::span<const double> lev_values, bool use_leverage);

    const ValidatedModel* model_;
    std::size_t n_;
    std::uint64_t seed_;
    SimulationOptions options_;
    const LeverageSurface* leverage_ = nullptr;
    double t_ = 0.0;
    std::uint64_t step_ = 0;
    std::vector<double> log_s_, x_d_, x_f_, ix_d_, u_;
    std::optional<State> saved_;
    std::vector<double> s_buf_, rd_buf_, rf_buf_, mm_buf_, w_buf_;
    double rho_sf_ = 0.0;
};

/// Paths stored at the requested times (0 is always included).
struct PathBatch {
    std::vector<double> time_grid;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::uint64_t n_steps = 0;
    /// Per time index, per path.
    std::vector<std::vector<double>> s, r_d, r_f, u, mm_integral, weight;
    std::vector<double> discount;

    /// Index of t in time_grid; throws OutOfRangeError when t is not stored.
    std::size_t time_index(double t) const;
    PathView at(double t) const;
};

/// Simulates n_paths paths and keeps their states at every time in `times`.
PathBatch simulate_paths(const ValidatedModel& model, std::span<const double> times, std::size_t n_paths,
                         std::uint64_t seed, SimulationOptions options = {});

/// Grid of kept times: 0 plus every requested time, sorted and de-duplicated.
std::vector<double> observation_grid(std::span<const double> times);

// --- estimators ---------------------------------------------------------------

/// E^{Q^T}[payoff(X_T)]: DRN mean of exp(-int r^d) payoff / P^d(0,T).
EstimateWithError t_forward_expectation(const PathView& view,
                                        const std::function<double(const StateVector&)>& payoff);

/// Market values that turn the forward-rate part of the drift expectation
/// into a control variate: with f^d, f^f the initial forward rates at T,
///   E[(K r^d - S r^f) 1] = E[(K (r^d - f^d) - S (r^f - f^f)) 1] + K f^d E[1] - f^f E[S 1]
/// and the last two expectations are taken from the market surface.
struct DriftControl {
    double f_dom = 0.0;
    double f_for = 0.0;
    double prob_itm = 0.0;        ///< E^{Q^T}[1{S_T > K}] = -C_K / P^d
    double spot_itm = 0.0;        ///< E^{Q^T}[S_T 1{S_T > K}] = (C - K C_K) / P^d
};

DriftControl drift_control(const MarketPoint& mp);

/// E^{Q^T}[(K r^d_T - S_T r^f_T) 1{S_T > K}].
EstimateWithError drift_indicator_expectation(const PathView& view, double strike,
                                              const std::optional<DriftControl>& control = std::nullopt);

/// E^{Q^T}[{mu(X_T, T) - (S_T - K) r^d_T} 1{S_T > K}].
EstimateWithError generalized_drift_expectation(const PathView& view, double strike, const DriftFunction& mu);

struct ConditionalEstimator {
    enum class Kind { kernel, bins } kind = Kind::kernel;
    double bandwidth = 0.0;       ///< kernel: 0 selects 1.06 sd(S) n^{-1/5}
    std::size_t n_bins = 100;     ///< bins: equal-probability partition size
    double min_effective = 50.0;  ///< fewer effective samples near K is an error
};

/// Bandwidth 1.06 sd(S) n^{-1/5}.
double silverman_bandwidth(std::span<const double> s);

/// Q^T-weighted E[q | S_T = K]; q holds one value per path.
/// Throws EstimatorError when the effective sample size near K is too small.
EstimateWithError conditional_expectation(const PathView& view, std::span<const double> q, double strike,
                                          const ConditionalEstimator& estimator = {});

EstimateWithError conditional_expectation(const PathView& view,
                                          const std::function<double(const StateVector&)>& quantity, double strike,
                                          const ConditionalEstimator& estimator = {});

enum class OptionType { call, put };

/// Discounted vanilla price P^d E^{Q^T}[payoff]. With control_forward set, the
/// T-forward martingale S_T is used as a control variate with that mean.
EstimateWithError vanilla_price(const PathView& view, double strike, OptionType type,
                                std::optional<double> control_forward = std::nullopt);

struct ImpliedVolResult {
    double vol = 0.0;
    bool at_intrinsic = false;
};

/// Black-Scholes implied vol of a call price at (K, T) on the snapshot's curves.
ImpliedVolResult mc_implied_vol(double call_price, const MarketSnapshot& snapshot, double strike, double t);

/// Writes one little-endian float64 file per factor (layout [time][path]) plus
/// manifest.json describing the shapes.
void write_path_dump(const PathBatch& batch, const std::string& directory);

}  // namespace lvcal
