// SPDX-License-Identifier: MIT
#include "lvcal/mc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <string>

#include "lvcal/dupire.hpp"
#include "lvcal/errors.hpp"
#include "lvcal/kernels.hpp"
#include "lvcal/parallel.hpp"
#include "lvcal/rng.hpp"

namespace lvcal {

namespace {

constexpr double kTimeTol = 1e-12;

EstimateWithError finish(const simd::Sums2& sums, std::size_t n) {
    EstimateWithError e;
    const double dn = static_cast<double>(n);
    e.value = sums.sum / dn;
    e.n_effective = dn;
    if (n > 1) {
        const double var = std::max(0.0, (sums.sum_sq - sums.sum * e.value) / (dn - 1.0));
        e.std_error = std::sqrt(var / dn);
    }
    return e;
}

void require_paths(const PathView& view) {
    if (view.size() == 0) throw EstimatorError("estimator called on an empty path set");
}

}  // namespace

// --- simulator -------------------------------------------------------------------

PathSimulator::PathSimulator(const ValidatedModel& model, std::size_t n_paths, std::uint64_t seed,
                             SimulationOptions options)
    : model_(&model), n_(n_paths), seed_(seed), options_(options) {
    if (n_paths == 0) throw DomainError("n_paths must be positive");
    if (options.antithetic && n_paths % 2 != 0) throw DomainError("antithetic sampling needs an even path count");
    if (!(options.max_dt > 0.0)) throw DomainError("max_dt must be positive");
    const ModelSpec& spec = model.spec();
    log_s_.assign(n_, std::log(spec.spot0));
    x_d_.assign(n_, 0.0);
    x_f_.assign(n_, 0.0);
    ix_d_.assign(n_, 0.0);
    u_.assign(n_, spec.variance.u0);
    rho_sf_ = spec.correlation(kDriverSpot, kDriverFor);
}

void PathSimulator::checkpoint() { saved_ = State{t_, step_, log_s_, x_d_, x_f_, ix_d_, u_}; }

void PathSimulator::restore() {
    if (!saved_) throw SimulationError("restore() without checkpoint()");
    t_ = saved_->t;
    step_ = saved_->step;
    log_s_ = saved_->log_s;
    x_d_ = saved_->x_d;
    x_f_ = saved_->x_f;
    ix_d_ = saved_->ix_d;
    u_ = saved_->u;
}

void PathSimulator::advance(double t_target) {
    if (t_target < t_ - kTimeTol) throw SimulationError("cannot advance backwards in time");
    if (t_target - t_ <= kTimeTol) return;
    const double span = t_target - t_;
    const auto n_steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / options_.max_dt - 1e-9)));
    const double dt = span / static_cast<double>(n_steps);

    const LeverageSurface* lev = leverage_;
    if (!lev && model_->spec().leverage) lev = &*model_->spec().leverage;

    std::vector<std::span<const double>> slices(n_steps);
    std::span<const double> strikes;
    if (lev) {
        strikes = lev->strikes();
        for (std::size_t j = 0; j < n_steps; ++j) {
            const double mid = t_ + (static_cast<double>(j) + 0.5) * dt;
            slices[j] = lev->slice(lev->slice_index(mid));
        }
    }
    const double t0 = t_;
    const std::uint64_t step0 = step_;
    parallel_chunks(n_, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t j = 0; j < n_steps; ++j) {
            step_chunk(b, e, t0 + static_cast<double>(j) * dt, dt, step0 + j, strikes, slices[j], lev != nullptr);
        }
    });
    t_ = t_target;
    step_ += n_steps;
}

void PathSimulator::step_chunk(std::size_t begin, std::size_t end, double t0, double dt, std::uint64_t step,
                               std::span<const double> lev_strikes, std::span<const double> lev_values,
                               bool use_leverage) {
    const simd::KernelTable& k = simd::active_kernels();
    const ModelSpec& spec = model_->spec();
    const Eigen::Matrix4d& L = model_->cholesky();
    const std::size_t n = end - begin;

    thread_local std::vector<double> buf;
    buf.resize(9 * n);
    double* zs = buf.data();
    double* zd = zs + n;
    double* zf = zd + n;
    double* zu = zf + n;
    double* vol = zu + n;
    double* drift = vol + n;
    double* extra = drift + n;
    double* xd_old = extra + n;
    double* xf_old = xd_old + n;

    for (std::size_t i = 0; i < n; ++i) {
        const auto g = gaussian_draws(seed_, begin + i, step, options_.antithetic);
        zs[i] = L(0, 0) * g[0];
        zd[i] = L(1, 0) * g[0] + L(1, 1) * g[1];
        zf[i] = L(2, 0) * g[0] + L(2, 1) * g[1] + L(2, 2) * g[2];
        zu[i] = L(3, 0) * g[0] + L(3, 1) * g[1] + L(3, 2) * g[2] + L(3, 3) * g[3];
    }

    double* log_s = log_s_.data() + begin;
    double* x_d = x_d_.data() + begin;
    double* x_f = x_f_.data() + begin;
    double* ix_d = ix_d_.data() + begin;
    double* u = u_.data() + begin;

    for (std::size_t i = 0; i < n; ++i) {
        const double lev =
            use_leverage ? LeverageSurface::interpolate(lev_strikes, lev_values, std::exp(log_s[i])) : 1.0;
        vol[i] = lev * std::sqrt(std::max(u[i], 0.0));
    }

    const HullWhiteRate& dom = model_->domestic();
    const HullWhiteRate& fgn = model_->foreign();
    const double t1 = t0 + dt;
    const double dphi_d = dom.phi_integral(t1) - dom.phi_integral(t0);
    const double dphi_f = fgn.phi_integral(t1) - fgn.phi_integral(t0);
    const bool stoch_d = spec.rate_d.sigma > 0.0;
    const bool stoch_f = spec.rate_f.sigma > 0.0;

    if (stoch_d) {
        std::copy(x_d, x_d + n, xd_old);
        k.ou_step(x_d, zd, nullptr, n, dom.decay(dt), dom.step_std(dt), dt);
    }
    if (stoch_f) {
        std::copy(x_f, x_f + n, xf_old);
        const double* quanto = nullptr;
        if (spec.quanto_adjustment && rho_sf_ != 0.0) {
            const double c = -rho_sf_ * spec.rate_f.sigma;
            for (std::size_t i = 0; i < n; ++i) extra[i] = c * vol[i];
            quanto = extra;
        }
        k.ou_step(x_f, zf, quanto, n, fgn.decay(dt), fgn.step_std(dt), dt);
    }
    const double base = dphi_d - dphi_f;
    const double half_dt = 0.5 * dt;
    for (std::size_t i = 0; i < n; ++i) {
        double d = base;
        if (stoch_d) {
            const double ix = half_dt * (xd_old[i] + x_d[i]);
            ix_d[i] += ix;
            d += ix;
        }
        if (stoch_f) d -= half_dt * (xf_old[i] + x_f[i]);
        drift[i] = d;
    }
    k.log_spot_step(log_s, vol, drift, zs, n, dt);

    if (model_->stochastic_variance()) {
        k.cir_step(u, zu, n, spec.variance.kappa, spec.variance.theta, spec.variance.xi, dt);
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(log_s[i]) || !std::isfinite(u[i]) || !std::isfinite(x_d[i]) || !std::isfinite(x_f[i])) {
            throw SimulationError("non-finite state on path " + std::to_string(begin + i) + " at step " +
                                  std::to_string(step));
        }
    }
}

PathView PathSimulator::view() {
    const HullWhiteRate& dom = model_->domestic();
    const HullWhiteRate& fgn = model_->foreign();
    const double phi_d = dom.phi(t_);
    const double phi_f = fgn.phi(t_);
    const double phi_int = dom.phi_integral(t_);
    const double conv = dom.convexity_integral(t_);
    s_buf_.resize(n_);
    rd_buf_.resize(n_);
    rf_buf_.resize(n_);
    mm_buf_.resize(n_);
    w_buf_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        s_buf_[i] = std::exp(log_s_[i]);
        rd_buf_[i] = x_d_[i] + phi_d;
        rf_buf_[i] = x_f_[i] + phi_f;
        mm_buf_[i] = phi_int + ix_d_[i];
        // exp(-mm) / P^d(0,t) with the curve part cancelled analytically.
        w_buf_[i] = std::exp(-(ix_d_[i] + conv));
    }
    return PathView{t_, s_buf_, rd_buf_, rf_buf_, u_, mm_buf_, w_buf_, dom.curve().discount(t_)};
}

// --- batch -------------------------------------------------------------------------

std::vector<double> observation_grid(std::span<const double> times) {
    std::vector<double> grid(times.begin(), times.end());
    for (double t : grid) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("observation times must be finite and >= 0");
    }
    grid.push_back(0.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(), [](double a, double b) { return b - a <= kTimeTol; }),
               grid.end());
    return grid;
}

std::size_t PathBatch::time_index(double t) const {
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        if (std::abs(time_grid[i] - t) <= kTimeTol * std::max(1.0, t)) return i;
    }
    throw OutOfRangeError("time " + std::to_string(t) + " is not on the stored path grid");
}

PathView PathBatch::at(double t) const {
    const std::size_t i = time_index(t);
    return PathView{time_grid[i], s[i], r_d[i], r_f[i], u[i], mm_integral[i], weight[i], discount[i]};
}

PathBatch simulate_paths(const ValidatedModel& model, std::span<const double> times, std::size_t n_paths,
                         std::uint64_t seed, SimulationOptions options) {
    PathBatch batch;
    batch.time_grid = observation_grid(times);
    batch.n_paths = n_paths;
    batch.seed = seed;
    PathSimulator sim(model, n_paths, seed, options);
    for (double t : batch.time_grid) {
        sim.advance(t);
        const PathView v = sim.view();
        batch.s.emplace_back(v.s.begin(), v.s.end());
        batch.r_d.emplace_back(v.r_d.begin(), v.r_d.end());
        batch.r_f.emplace_back(v.r_f.begin(), v.r_f.end());
        batch.u.emplace_back(v.u.begin(), v.u.end());
        batch.mm_integral.emplace_back(v.mm.begin(), v.mm.end());
        batch.weight.emplace_back(v.weight.begin(), v.weight.end());
        batch.discount.push_back(v.discount);
    }
    batch.n_steps = sim.step_index();
    return batch;
}

// --- estimators ---------------------------------------------------------------------

EstimateWithError t_forward_expectation(const PathView& view,
                                        const std::function<double(const StateVector&)>& payoff) {
    require_paths(view);
    simd::Sums2 sums;
    for (std::size_t i = 0; i < view.size(); ++i) {
        const double x = view.weight[i] * payoff(view.state(i));
        sums.sum += x;
        sums.sum_sq += x * x;
    }
    return finish(sums, view.size());
}

DriftControl drift_control(const MarketPoint& mp) {
    const CallDerivatives cd = call_derivatives(mp);
    DriftControl c;
    c.f_dom = mp.bs.f_dom;
    c.f_for = mp.bs.f_for;
    c.prob_itm = -cd.dC_dK / mp.discount;
    c.spot_itm = (cd.price - mp.strike * cd.dC_dK) / mp.discount;
    return c;
}

EstimateWithError drift_indicator_expectation(const PathView& view, double strike,
                                              const std::optional<DriftControl>& control) {
    require_paths(view);
    const simd::KernelTable& k = simd::active_kernels();
    const double rd_shift = control ? control->f_dom : 0.0;
    const double rf_shift = control ? control->f_for : 0.0;
    const auto sums = chunked_reduce<simd::Sums2>(view.size(), [&](std::size_t b, std::size_t e) {
        return k.drift_indicator(view.s.data() + b, view.r_d.data() + b, view.r_f.data() + b,
                                 view.weight.data() + b, e - b, strike, rd_shift, rf_shift);
    });
    EstimateWithError est = finish(sums, view.size());
    if (control) est.value += strike * control->f_dom * control->prob_itm - control->f_for * control->spot_itm;
    return est;
}

EstimateWithError generalized_drift_expectation(const PathView& view, double strike, const DriftFunction& mu) {
    require_paths(view);
    simd::Sums2 sums;
    for (std::size_t i = 0; i < view.size(); ++i) {
        if (!(view.s[i] > strike)) continue;
        const double x = view.weight[i] * (mu(view.state(i), view.t) - (view.s[i] - strike) * view.r_d[i]);
        sums.sum += x;
        sums.sum_sq += x * x;
    }
    return finish(sums, view.size());
}

double silverman_bandwidth(std::span<const double> s) {
    const auto n = static_cast<double>(s.size());
    if (s.size() < 2) throw EstimatorError("bandwidth needs at least two samples");
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return 1.06 * sd * std::pow(n, -0.2);
}

namespace {

EstimateWithError kernel_estimate(const PathView& view, std::span<const double> q, double strike,
                                  const ConditionalEstimator& est) {
    const double h = est.bandwidth > 0.0 ? est.bandwidth : silverman_bandwidth(view.s);
    if (!(h > 0.0)) throw EstimatorError("kernel bandwidth must be positive");
    const simd::KernelTable& k = simd::active_kernels();
    const double inv_h = 1.0 / h;
    const auto sums = chunked_reduce<simd::KernelSums>(view.size(), [&](std::size_t b, std::size_t e) {
        return k.epanechnikov(view.s.data() + b, view.weight.data() + b, q.data() + b, e - b, strike, inv_h);
    });
    const double n_eff = sums.a2 > 0.0 ? sums.a * sums.a / sums.a2 : 0.0;
    if (!(n_eff >= est.min_effective)) {
        throw EstimatorError("sparse region at K=" + std::to_string(strike) + ": " + std::to_string(n_eff) +
                             " effective samples");
    }
    EstimateWithError r;
    r.value = sums.aq / sums.a;
    const double m = r.value;
    const double var = (sums.a2q2 - 2.0 * m * sums.a2q + m * m * sums.a2) / (sums.a * sums.a);
    r.std_error = std::sqrt(std::max(var, 0.0));
    r.n_effective = n_eff;
    return r;
}

EstimateWithError bin_estimate(const PathView& view, std::span<const double> q, double strike,
                               const ConditionalEstimator& est) {
    const std::size_t n = view.size();
    if (est.n_bins == 0) throw EstimatorError("bin count must be positive");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return view.s[a] < view.s[b]; });
    if (strike < view.s[order.front()] || strike > view.s[order.back()]) {
        throw EstimatorError("sparse region at K=" + std::to_string(strike) + ": outside simulated range");
    }
    double total = 0.0;
    for (std::size_t i : order) total += view.weight[i];
    const auto nb = static_cast<double>(est.n_bins);
    std::vector<std::size_t> bin(n);
    double cum = 0.0;
    std::size_t target = 0;
    bool found = false;
    for (std::size_t j = 0; j < n; ++j) {
        bin[j] = std::min(est.n_bins - 1, static_cast<std::size_t>(cum / total * nb));
        cum += view.weight[order[j]];
        if (!found && view.s[order[j]] >= strike) {
            target = bin[j];
            found = true;
        }
    }
    double sw = 0.0, sw2 = 0.0, swq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (bin[j] != target) continue;
        const double w = view.weight[order[j]];
        sw += w;
        sw2 += w * w;
        swq += w * q[order[j]];
    }
    const double n_eff = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
    if (!(n_eff >= est.min_effective)) {
        throw EstimatorError("sparse region at K=" + std::to_string(strike) + ": " + std::to_string(n_eff) +
                             " effective samples");
    }
    const double m = swq / sw;
    double ss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (bin[j] != target) continue;
        const double w = view.weight[order[j]];
        const double d = q[order[j]] - m;
        ss += w * w * d * d;
    }
    return EstimateWithError{m, std::sqrt(ss) / sw, n_eff};
}

}  // namespace

EstimateWithError conditional_expectation(const PathView& view, std::span<const double> q, double strike,
                                          const ConditionalEstimator& estimator) {
    require_paths(view);
    if (q.size() != view.size()) throw DomainError("conditional_expectation: quantity size mismatch");
    if (estimator.kind == ConditionalEstimator::Kind::bins) return bin_estimate(view, q, strike, estimator);
    return kernel_estimate(view, q, strike, estimator);
}

EstimateWithError conditional_expectation(const PathView& view,
                                          const std::function<double(const StateVector&)>& quantity, double strike,
                                          const ConditionalEstimator& estimator) {
    std::vector<double> q(view.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = quantity(view.state(i));
    return conditional_expectation(view, q, strike, estimator);
}

EstimateWithError vanilla_price(const PathView& view, double strike, OptionType type,
                                std::optional<double> control_forward) {
    require_paths(view);
    const std::size_t n = view.size();
    const simd::KernelTable& k = simd::active_kernels();
    if (!control_forward) {
        const auto sums = chunked_reduce<simd::Sums2>(n, [&](std::size_t b, std::size_t e) {
            return type == OptionType::call ? k.call_payoff(view.s.data() + b, view.weight.data() + b, e - b, strike)
                                            : k.put_payoff(view.s.data() + b, view.weight.data() + b, e - b, strike);
        });
        EstimateWithError e = finish(sums, n);
        e.value *= view.discount;
        e.std_error *= view.discount;
        return e;
    }
    // Control variate on the T-forward martingale S_T.
    const double dn = static_cast<double>(n);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pay = type == OptionType::call ? std::max(view.s[i] - strike, 0.0)
                                                    : std::max(strike - view.s[i], 0.0);
        mx += view.weight[i] * pay;
        my += view.weight[i] * view.s[i];
    }
    mx /= dn;
    my /= dn;
    double sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pay = type == OptionType::call ? std::max(view.s[i] - strike, 0.0)
                                                    : std::max(strike - view.s[i], 0.0);
        const double dx = view.weight[i] * pay - mx;
        const double dy = view.weight[i] * view.s[i] - my;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double beta = syy > 0.0 ? sxy / syy : 0.0;
    simd::Sums2 sums;
    for (std::size_t i = 0; i < n; ++i) {
        const double pay = type == OptionType::call ? std::max(view.s[i] - strike, 0.0)
                                                    : std::max(strike - view.s[i], 0.0);
        const double z = view.weight[i] * pay - beta * (view.weight[i] * view.s[i] - *control_forward);
        sums.sum += z;
        sums.sum_sq += z * z;
    }
    EstimateWithError e = finish(sums, n);
    e.value *= view.discount;
    e.std_error *= view.discount;
    return e;
}

ImpliedVolResult mc_implied_vol(double call_price, const MarketSnapshot& snapshot, double strike, double t) {
    if (!(t > 0.0)) throw DomainError("implied vol needs t > 0");
    const double fwd = forward_price(snapshot, t);
    const double disc = snapshot.domestic.discount(t);
    const ImpliedVariance iv = implied_total_variance(call_price, disc * fwd, log_moneyness(strike, fwd));
    return ImpliedVolResult{std::sqrt(iv.w / t), iv.at_intrinsic};
}

void write_path_dump(const PathBatch& batch, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    const std::array<std::pair<const char*, const std::vector<std::vector<double>>*>, 5> columns{{
        {"s", &batch.s},
        {"r_d", &batch.r_d},
        {"r_f", &batch.r_f},
        {"u", &batch.u},
        {"mm_integral", &batch.mm_integral},
    }};
    nlohmann::ordered_json manifest;
    manifest["format"] = "float64-le";
    manifest["layout"] = "[time][path]";
    manifest["n_paths"] = batch.n_paths;
    manifest["n_times"] = batch.time_grid.size();
    manifest["seed"] = batch.seed;
    manifest["time_grid"] = batch.time_grid;
    for (const auto& [name, data] : columns) {
        const std::string file = std::string(name) + ".bin";
        std::ofstream out(fs::path(directory) / file, std::ios::binary);
        if (!out) throw Error("cannot write " + file);
        for (const auto& row : *data) {
            out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 8));
        }
        manifest["columns"].push_back(file);
    }
    std::ofstream(fs::path(directory) / "manifest.json") << manifest.dump(2) << '\n';
}

}  // namespace lvcal
