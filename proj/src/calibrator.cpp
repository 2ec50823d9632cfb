// SPDX-License-Identifier: MIT
#include "lvcal/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "lvcal/black_scholes.hpp"
#include "lvcal/errors.hpp"
#include "lvcal/parallel.hpp"

namespace lvcal {

namespace {

void require_increasing(const std::vector<double>& v, const char* field) {
    if (v.empty()) throw ValidationError(std::string(field) + ": must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
            throw ValidationError(std::string(field) + "[" + std::to_string(i) + "]: must be positive and finite");
        }
        if (i > 0 && !(v[i] > v[i - 1])) {
            throw ValidationError(std::string(field) + "[" + std::to_string(i) + "]: must be strictly increasing");
        }
    }
}

struct SliceResult {
    std::vector<double> value;
    std::vector<double> std_error;
    std::vector<double> expectation;
    std::vector<double> expectation_se;
    std::vector<std::uint32_t> flags;

    explicit SliceResult(std::size_t n)
        : value(n), std_error(n), expectation(n), expectation_se(n), flags(n, kFlagNone) {}
};

using InitialFn = std::function<std::vector<double>(std::size_t, PathView&)>;
using UpdateFn = std::function<SliceResult(std::size_t, const PathView&)>;
using FinalizeFn = std::function<void(std::size_t, const PathView&, SliceResult&)>;

/// Shared forward bootstrap. Fills report.surface / nodes / slices.
CalibrationReport bootstrap(PathSimulator& sim, const CalibrationConfig& cfg, SurfaceKind kind,
                            const InitialFn& initial, const UpdateFn& update, const FinalizeFn& finalize) {
    const std::vector<double>& strikes = cfg.strike_grid;
    const std::size_t nk = strikes.size();
    std::vector<double> values;
    std::vector<std::uint32_t> flags;
    std::vector<NodeReport> nodes;
    std::vector<SliceReport> slices;
    std::vector<double> mats;

    auto surface_with = [&](const std::vector<double>& trial) {
        std::vector<double> v = values;
        v.insert(v.end(), trial.begin(), trial.end());
        std::vector<double> m = mats;
        m.push_back(cfg.maturity_grid[mats.size()]);
        return LeverageSurface(kind, strikes, std::move(m), std::move(v));
    };

    for (std::size_t i = 0; i < cfg.maturity_grid.size(); ++i) {
        const double t = cfg.maturity_grid[i];
        PathView start = sim.view();
        std::vector<double> guess = initial(i, start);
        sim.checkpoint();

        SliceReport sr;
        sr.maturity = t;
        std::optional<SliceResult> last;
        for (std::size_t sweep = 0; sweep < cfg.inner_iterations; ++sweep) {
            if (sweep > 0) sim.restore();
            const LeverageSurface trial = surface_with(guess);
            sim.set_leverage(&trial);
            sim.advance(t);
            sim.set_leverage(nullptr);
            SliceResult res = update(i, sim.view());
            double delta = 0.0;
            for (std::size_t k = 0; k < nk; ++k) delta = std::max(delta, std::abs(std::log(res.value[k] / guess[k])));
            guess = res.value;
            last = std::move(res);
            sr.sweeps = sweep + 1;
            sr.max_delta = delta;
            if (delta <= cfg.tolerance) {
                sr.converged = true;
                break;
            }
        }
        // Re-simulate the slice with the final values.
        sim.restore();
        const LeverageSurface final_surface = surface_with(guess);
        sim.set_leverage(&final_surface);
        sim.advance(t);
        sim.set_leverage(nullptr);
        SliceResult& res = *last;
        if (!sr.converged) {
            for (auto& f : res.flags) f |= kFlagNonConverged;
        }
        finalize(i, sim.view(), res);

        for (std::size_t k = 0; k < nk; ++k) {
            NodeReport n;
            n.maturity = t;
            n.strike = strikes[k];
            n.value = res.value[k];
            n.std_error = res.std_error[k];
            n.flags = res.flags[k];
            n.expectation = res.expectation[k];
            n.expectation_std_error = res.expectation_se[k];
            nodes.push_back(n);
        }
        values.insert(values.end(), res.value.begin(), res.value.end());
        flags.insert(flags.end(), res.flags.begin(), res.flags.end());
        mats.push_back(t);
        slices.push_back(sr);
    }
    CalibrationReport report{LeverageSurface(kind, strikes, mats, values, flags), std::move(nodes),
                             std::move(slices), std::nullopt, cfg.seed, cfg.n_paths};
    return report;
}

struct OtmPrice {
    double call_equivalent = 0.0;
    double std_error = 0.0;
};

OtmPrice otm_price(const PathView& view, double strike, double forward) {
    const bool call = strike >= forward;
    const EstimateWithError e = vanilla_price(view, strike, call ? OptionType::call : OptionType::put, forward);
    const double c = call ? e.value : e.value + view.discount * (forward - strike);
    return OtmPrice{c, e.std_error};
}

/// Implied-vol error (bps) and its standard error for a call-equivalent price.
std::pair<double, double> vol_error(const MarketSnapshot& snapshot, double strike, double t, const OtmPrice& p,
                                    double* model_vol = nullptr) {
    const MarketPoint mp = market_point(snapshot, strike, t);
    const double market_vol = std::sqrt(mp.tv.w / t);
    try {
        const ImpliedVolResult iv = mc_implied_vol(p.call_equivalent, snapshot, strike, t);
        if (model_vol) *model_vol = iv.vol;
        // No paths beyond the strike: the price carries no vol information.
        if (iv.at_intrinsic) {
            return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        }
        BsPoint bp = mp.bs;
        bp.w = iv.vol * iv.vol * t;
        const double vega = bs_partials(bp).dC_dw * 2.0 * iv.vol * t;
        const double vol_se = vega > 0.0 ? p.std_error / vega : std::numeric_limits<double>::infinity();
        return {(iv.vol - market_vol) * 1e4, vol_se * 1e4};
    } catch (const SolverError&) {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
}

void record_repricing(const MarketSnapshot& snapshot, const CalibrationConfig& cfg, double t, const PathView& view,
                      std::vector<double>& bps) {
    const double fwd = forward_price(snapshot, t);
    bps.assign(cfg.strike_grid.size(), std::numeric_limits<double>::quiet_NaN());
    parallel_for(cfg.strike_grid.size(), [&](std::size_t k) {
        const double K = cfg.strike_grid[k];
        if (std::abs(std::log(K / fwd)) > 1.0) return;  // prices too small to invert reliably
        bps[k] = vol_error(snapshot, K, t, otm_price(view, K, fwd)).first;
    });
}

}  // namespace

void CalibrationConfig::validate() const {
    require_increasing(strike_grid, "strike_grid");
    require_increasing(maturity_grid, "maturity_grid");
    if (n_paths == 0) throw ValidationError("n_paths: must be positive");
    if (inner_iterations == 0) throw ValidationError("inner_iterations: must be at least 1");
    if (!(tolerance >= 0.0)) throw ValidationError("tolerance: must be non-negative");
    if (!(simulation.max_dt > 0.0)) throw ValidationError("max_dt: must be positive");
    if (simulation.antithetic && n_paths % 2 != 0) throw ValidationError("n_paths: must be even with antithetics");
}

ModelSpec local_vol_model(const ModelSpec& base, const LeverageSurface& sigma_lv) {
    ModelSpec spec = base;
    spec.variance = CirParams{0.0, 1.0, 0.0, 1.0};
    spec.leverage = sigma_lv;
    return spec;
}

CalibrationReport calibrate_local_vol(const MarketSnapshot& snapshot, const ModelSpec& spec,
                                      const CalibrationConfig& cfg) {
    cfg.validate();
    if (cfg.maturity_grid.back() > snapshot.horizon() + 1e-12) {
        throw OutOfRangeError("maturity_grid extends beyond the market horizon");
    }
    ModelSpec lv_spec = spec;
    lv_spec.variance = CirParams{0.0, 1.0, 0.0, 1.0};
    lv_spec.leverage.reset();
    const ValidatedModel model(lv_spec);
    PathSimulator sim(model, cfg.n_paths, cfg.seed, cfg.simulation);
    const std::vector<double>& strikes = cfg.strike_grid;
    const std::size_t nk = strikes.size();

    std::vector<std::vector<MarketPoint>> points(cfg.maturity_grid.size());
    std::vector<std::vector<double>> deterministic(cfg.maturity_grid.size());
    for (std::size_t i = 0; i < cfg.maturity_grid.size(); ++i) {
        for (double K : strikes) {
            const MarketPoint mp = market_point(snapshot, K, cfg.maturity_grid[i]);
            points[i].push_back(mp);
            deterministic[i].push_back(std::sqrt(lv_deterministic_tiv(mp.tv, mp.bs.y, cfg.limits).variance));
        }
    }

    auto initial = [&](std::size_t i, PathView&) { return deterministic[i]; };
    auto update = [&](std::size_t i, const PathView& view) {
        SliceResult res(nk);
        parallel_for(nk, [&](std::size_t k) {
            const MarketPoint& mp = points[i][k];
            std::optional<DriftControl> control;
            if (cfg.drift_control_variate) control = drift_control(mp);
            const EstimateWithError drift = drift_indicator_expectation(view, strikes[k], control);
            const LocalVarianceResult lv = lv_two_rates_tiv(mp, drift.value, cfg.limits, drift.std_error);
            res.value[k] = std::sqrt(lv.variance);
            res.std_error[k] = 0.5 * lv.std_error / res.value[k];
            res.flags[k] = lv.flags;
            res.expectation[k] = drift.value;
            res.expectation_se[k] = drift.std_error;
        });
        return res;
    };
    std::vector<double> bps;
    std::vector<std::vector<double>> all_bps;
    auto finalize = [&](std::size_t i, const PathView& view, SliceResult&) {
        record_repricing(snapshot, cfg, cfg.maturity_grid[i], view, bps);
        all_bps.push_back(bps);
    };
    CalibrationReport report = bootstrap(sim, cfg, SurfaceKind::local_vol, initial, update, finalize);
    for (std::size_t i = 0; i < cfg.maturity_grid.size(); ++i) {
        for (std::size_t k = 0; k < nk; ++k) {
            NodeReport& n = report.nodes[i * nk + k];
            n.target = deterministic[i][k];
            n.repricing_bps = all_bps[i][k];
        }
    }
    return report;
}

CalibrationReport calibrate_slv_leverage(const MarketSnapshot& snapshot, const ModelSpec& spec,
                                         const CalibrationConfig& cfg, const LeverageSurface& sigma_lv) {
    cfg.validate();
    if (sigma_lv.kind() != SurfaceKind::local_vol) throw ValidationError("sigma_lv: expected a local-vol surface");
    if (cfg.maturity_grid.back() > snapshot.horizon() + 1e-12) {
        throw OutOfRangeError("maturity_grid extends beyond the market horizon");
    }
    ModelSpec slv_spec = spec;
    slv_spec.leverage.reset();
    const ValidatedModel model(slv_spec);
    PathSimulator sim(model, cfg.n_paths, cfg.seed, cfg.simulation);
    const std::vector<double>& strikes = cfg.strike_grid;
    const std::size_t nk = strikes.size();

    std::vector<std::vector<double>> target(cfg.maturity_grid.size());
    for (std::size_t i = 0; i < cfg.maturity_grid.size(); ++i) {
        for (double K : strikes) target[i].push_back(sigma_lv.value(K, cfg.maturity_grid[i]));
    }

    // E[U | S = K] per strike with sparse nodes marked by a NaN.
    auto conditional_u = [&](const PathView& view, std::vector<double>& cond, std::vector<double>& se) {
        cond.assign(nk, std::numeric_limits<double>::quiet_NaN());
        se.assign(nk, 0.0);
        parallel_for(nk, [&](std::size_t k) {
            try {
                const EstimateWithError e = conditional_expectation(view, view.u, strikes[k], cfg.estimator);
                if (e.value > 1e-8) {
                    cond[k] = e.value;
                    se[k] = e.std_error;
                }
            } catch (const EstimatorError&) {
            }
        });
    };
    // Sparse nodes inherit the nearest reliable node of the same slice.
    auto fill_sparse = [&](std::vector<double>& v, std::vector<std::uint32_t>& flags, const std::vector<double>& fallback) {
        std::vector<double> filled = v;
        for (std::size_t k = 0; k < nk; ++k) {
            if (!std::isnan(v[k])) continue;
            flags[k] |= kFlagSparse;
            std::size_t best = nk;
            for (std::size_t d = 1; d < nk && best == nk; ++d) {
                if (k >= d && !std::isnan(v[k - d])) best = k - d;
                else if (k + d < nk && !std::isnan(v[k + d])) best = k + d;
            }
            filled[k] = best < nk ? v[best] : fallback[k];
        }
        v = std::move(filled);
    };

    const double u0 = spec.variance.u0;
    auto initial = [&](std::size_t i, PathView& view) {
        std::vector<double> guess(nk);
        if (i == 0) {
            for (std::size_t k = 0; k < nk; ++k) guess[k] = target[0][k] / std::sqrt(u0);
            return guess;
        }
        std::vector<double> cond, se;
        conditional_u(view, cond, se);
        std::vector<std::uint32_t> flags(nk, kFlagNone);
        std::vector<double> fallback(nk, u0);
        fill_sparse(cond, flags, fallback);
        for (std::size_t k = 0; k < nk; ++k) guess[k] = target[i][k] / std::sqrt(cond[k]);
        return guess;
    };
    auto leverage_from = [&](std::size_t i, const std::vector<double>& cond, const std::vector<double>& se,
                             SliceResult& res) {
        for (std::size_t k = 0; k < nk; ++k) {
            res.value[k] = slv_leverage_from_lv(target[i][k], cond[k]);
            res.std_error[k] = 0.5 * res.value[k] * se[k] / cond[k];
            res.expectation[k] = cond[k];
            res.expectation_se[k] = se[k];
        }
    };
    auto update = [&](std::size_t i, const PathView& view) {
        SliceResult res(nk);
        std::vector<double> cond, se;
        conditional_u(view, cond, se);
        std::vector<double> fallback(nk, u0);
        fill_sparse(cond, res.flags, fallback);
        leverage_from(i, cond, se, res);
        return res;
    };
    std::vector<std::vector<double>> all_bps;
    auto finalize = [&](std::size_t i, const PathView& view, SliceResult& res) {
        // Conditional variance on the paths of the calibrated model.
        std::vector<double> cond, se;
        conditional_u(view, cond, se);
        for (std::size_t k = 0; k < nk; ++k) {
            if (std::isnan(cond[k])) continue;
            res.expectation[k] = cond[k];
            res.expectation_se[k] = se[k];
        }
        std::vector<double> bps;
        record_repricing(snapshot, cfg, cfg.maturity_grid[i], view, bps);
        all_bps.push_back(std::move(bps));
    };
    CalibrationReport report = bootstrap(sim, cfg, SurfaceKind::leverage, initial, update, finalize);
    for (std::size_t i = 0; i < cfg.maturity_grid.size(); ++i) {
        for (std::size_t k = 0; k < nk; ++k) {
            NodeReport& n = report.nodes[i * nk + k];
            n.target = target[i][k];
            n.repricing_bps = all_bps[i][k];
        }
    }

    if (cfg.gyongy_check) {
        const double t = cfg.maturity_grid.back();
        const PathView slv_view = sim.view();
        std::vector<double> slv_s(slv_view.s.begin(), slv_view.s.end());
        const ValidatedModel lv_model(local_vol_model(spec, sigma_lv));
        PathSimulator lv_sim(lv_model, cfg.n_paths, cfg.seed ^ 0x9E3779B97F4A7C15ull, cfg.simulation);
        lv_sim.advance(t);
        const PathView lv_view = lv_sim.view();
        std::vector<double> lv_s(lv_view.s.begin(), lv_view.s.end());
        GyongyDiagnostic g;
        g.maturity = t;
        g.ks_statistic = ks_statistic(std::move(slv_s), std::move(lv_s));
        g.critical_value = ks_critical_value(cfg.n_paths, cfg.n_paths);
        g.passed = g.ks_statistic <= g.critical_value;
        report.gyongy = g;
    }
    return report;
}

std::vector<RepricingPoint> reprice_vanillas(const MarketSnapshot& snapshot, const ValidatedModel& model,
                                             std::span<const double> ys, std::span<const double> maturities,
                                             std::size_t n_paths, std::uint64_t seed, SimulationOptions options) {
    const PathBatch batch = simulate_paths(model, maturities, n_paths, seed, options);
    std::vector<RepricingPoint> out;
    for (double t : maturities) {
        const PathView view = batch.at(t);
        const double fwd = forward_price(snapshot, t);
        for (double y : ys) {
            RepricingPoint p;
            p.maturity = t;
            p.y = y;
            p.strike = fwd * std::exp(y);
            p.market_vol = std::sqrt(market_point(snapshot, p.strike, t).tv.w / t);
            const OtmPrice price = otm_price(view, p.strike, fwd);
            p.price = price.call_equivalent;
            p.std_error = price.std_error;
            const auto [err, se] = vol_error(snapshot, p.strike, t, price, &p.model_vol);
            p.error_bps = err;
            p.vol_std_error = se * 1e-4;
            out.push_back(p);
        }
    }
    return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_value(std::size_t n1, std::size_t n2) {
    const double a = static_cast<double>(n1);
    const double b = static_cast<double>(n2);
    // c(0.01) = sqrt(-ln(0.005) / 2)
    return std::sqrt(-std::log(0.005) / 2.0) * std::sqrt((a + b) / (a * b));
}

}  // namespace lvcal
