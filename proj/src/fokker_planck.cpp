// SPDX-License-Identifier: MIT
#include "lvcal/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>

#include "lvcal/errors.hpp"

namespace lvcal {

namespace {

// z / (e^z - 1)
double bernoulli(double z) {
    if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z;
    return z / std::expm1(z);
}

/// Tridiagonal operator M with (dp/dt)_j = lo_j p_{j-1} + di_j p_j + up_j p_{j+1}.
struct Operator {
    std::vector<double> lo, di, up;
};

/// Face flux F = A p - D dp/dx with A = mu - sigma^2/2 - dD/dx, D = sigma^2/2.
Operator build_operator(const std::vector<double>& x, double dx, double mu, const std::vector<double>& var) {
    const std::size_t n = x.size();
    Operator op{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double d = 0.25 * (var[j] + var[j + 1]);
        const double a = mu - d - 0.5 * (var[j + 1] - var[j]) / dx;
        // F_{j+1/2} = cl p_j - cr p_{j+1}
        double cl, cr;
        if (d <= 1e-14 * std::abs(a) * dx || d == 0.0) {
            cl = std::max(a, 0.0);
            cr = std::max(-a, 0.0);
        } else {
            const double pe = a * dx / d;
            cl = d / dx * bernoulli(-pe);
            cr = d / dx * bernoulli(pe);
        }
        // dp_j/dt -= F/dx, dp_{j+1}/dt += F/dx
        op.di[j] -= cl / dx;
        op.up[j] += cr / dx;
        op.lo[j + 1] += cl / dx;
        op.di[j + 1] -= cr / dx;
    }
    return op;
}

/// Solves (I - theta dt M) p_new = (I + (1-theta) dt M) p.
void theta_step(const Operator& m, double dt, double theta, std::vector<double>& p) {
    const std::size_t n = p.size();
    std::vector<double> rhs(n);
    const double e = (1.0 - theta) * dt;
    for (std::size_t j = 0; j < n; ++j) {
        double v = p[j] + e * m.di[j] * p[j];
        if (j > 0) v += e * m.lo[j] * p[j - 1];
        if (j + 1 < n) v += e * m.up[j] * p[j + 1];
        rhs[j] = v;
    }
    // Thomas algorithm.
    std::vector<double> c(n), d(n);
    const double i = theta * dt;
    double b0 = 1.0 - i * m.di[0];
    c[0] = -i * m.up[0] / b0;
    d[0] = rhs[0] / b0;
    for (std::size_t j = 1; j < n; ++j) {
        const double a = -i * m.lo[j];
        const double b = 1.0 - i * m.di[j] - a * c[j - 1];
        c[j] = j + 1 < n ? -i * m.up[j] / b : 0.0;
        d[j] = (rhs[j] - a * d[j - 1]) / b;
    }
    p[n - 1] = d[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) p[j] = d[j] - c[j] * p[j + 1];
}

}  // namespace

std::size_t DensityGrid::time_index(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, t)) return i;
    }
    throw OutOfRangeError("time " + std::to_string(t) + " not stored in the density grid");
}

std::vector<double> DensityGrid::log_density(std::size_t t_index) const {
    std::vector<double> p(s_grid.size());
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = q_values[t_index][j] * s_grid[j];
    return p;
}

double DensityGrid::mass(std::size_t t_index) const {
    const std::vector<double> p = log_density(t_index);
    double m = 0.0;
    for (std::size_t j = 0; j + 1 < p.size(); ++j) m += 0.5 * (p[j] + p[j + 1]) * dx;
    return m;
}

double DensityGrid::mean(std::size_t t_index) const {
    // Exact integral of e^x over each cell with the cell-average density.
    const double f = std::sinh(0.5 * dx) / (0.5 * dx);
    double m = 0.0;
    for (std::size_t j = 0; j < s_grid.size(); ++j) m += q_values[t_index][j] * s_grid[j] * s_grid[j] * f * dx;
    return m;
}

double DensityGrid::second_moment(std::size_t t_index) const {
    const double f = std::sinh(dx) / dx;
    double m = 0.0;
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
        m += q_values[t_index][j] * s_grid[j] * s_grid[j] * s_grid[j] * f * dx;
    }
    return m;
}

DensityGrid solve_forward_kolmogorov(const LocalVolFunction& sigma_lv, const DiscountCurve& domestic,
                                     const DiscountCurve& foreign, double s0, const FokkerPlanckConfig& cfg) {
    if (!(s0 > 0.0)) throw DomainError("s0 must be positive");
    if (cfg.n_space < 5) throw DomainError("n_space must be at least 5");
    if (!(cfg.dt > 0.0)) throw DomainError("dt must be positive");
    std::vector<double> keep(cfg.keep_times.begin(), cfg.keep_times.end());
    keep.push_back(0.0);
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    if (keep.front() < 0.0) throw DomainError("keep_times must be non-negative");
    const double t_max = keep.back();

    double half_width = cfg.log_half_width;
    if (!(half_width > 0.0)) {
        const double drift = t_max > 0.0 ? std::abs(domestic.integrated_forward(t_max) -
                                                    foreign.integrated_forward(t_max))
                                         : 0.0;
        half_width = 8.0 * cfg.sigma_ref * std::sqrt(t_max) + drift + 0.5;
    }
    const std::size_t n = cfg.n_space;
    const std::size_t centre = n / 2;
    const double dx = 2.0 * half_width / static_cast<double>(n - 1);
    const double x0 = std::log(s0);
    std::vector<double> x(n), s(n);
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = x0 + (static_cast<double>(j) - static_cast<double>(centre)) * dx;
        s[j] = std::exp(x[j]);
    }

    // One-cell-wide Gaussian in x (lognormal in S), normalized on the grid.
    std::vector<double> p(n);
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double z = (x[j] - x0) / dx;
        p[j] = std::exp(-0.5 * z * z);
        norm += p[j] * dx;
    }
    for (double& v : p) v /= norm;

    DensityGrid grid;
    grid.s_grid = s;
    grid.dx = dx;
    auto store = [&](double t) {
        std::vector<double> q(n);
        for (std::size_t j = 0; j < n; ++j) q[j] = std::max(p[j], 0.0) / s[j];
        grid.times.push_back(t);
        grid.q_values.push_back(std::move(q));
    };
    store(0.0);

    std::vector<double> var(n);
    std::size_t implicit_left = cfg.implicit_steps;
    double t = 0.0;
    for (std::size_t k = 1; k < keep.size(); ++k) {
        const double target = keep[k];
        const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil((target - t) / cfg.dt - 1e-9)));
        const double h = (target - t) / static_cast<double>(steps);
        for (std::size_t m = 0; m < steps; ++m) {
            const double ta = t + static_cast<double>(m) * h;
            const double tb = ta + h;
            const double tm = 0.5 * (ta + tb);
            const double mu = (domestic.integrated_forward(tb) - domestic.integrated_forward(ta) -
                               foreign.integrated_forward(tb) + foreign.integrated_forward(ta)) /
                              h;
            for (std::size_t j = 0; j < n; ++j) {
                const double sig = sigma_lv(s[j], tm);
                if (!std::isfinite(sig) || sig < 0.0) {
                    throw SolverError("local vol not finite/non-negative at S=" + std::to_string(s[j]));
                }
                var[j] = sig * sig;
            }
            const Operator op = build_operator(x, dx, mu, var);
            if (implicit_left > 0) {
                // Two implicit half steps replace one Crank-Nicolson step.
                theta_step(op, 0.5 * h, 1.0, p);
                theta_step(op, 0.5 * h, 1.0, p);
                implicit_left = implicit_left > 2 ? implicit_left - 2 : 0;
            } else {
                theta_step(op, h, 0.5, p);
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (p[j] < -1e-10) {
                    char msg[128];
                    std::snprintf(msg, sizeof msg, "negative density %.3g at S=%g, t=%g", p[j], s[j], tb);
                    throw SolverError(msg);
                }
            }
        }
        t = target;
        store(t);
    }
    return grid;
}

DensityGrid solve_forward_kolmogorov(const LeverageSurface& sigma_lv, const DiscountCurve& domestic,
                                     const DiscountCurve& foreign, double s0, const FokkerPlanckConfig& cfg) {
    if (sigma_lv.kind() != SurfaceKind::local_vol) throw DomainError("expected a local-vol surface");
    return solve_forward_kolmogorov([&](double s, double t) { return sigma_lv.value(s, t); }, domestic, foreign, s0,
                                    cfg);
}

DensityPrices density_call_prices(const DensityGrid& grid, double discount, std::span<const double> strikes,
                                  double t) {
    const std::size_t ti = grid.time_index(t);
    const std::vector<double> p = grid.log_density(ti);
    const std::size_t n = p.size();
    const double half = 0.5 * grid.dx;
    const double lo = grid.s_grid.front();
    const double hi = grid.s_grid.back();
    DensityPrices out;
    for (double K : strikes) {
        if (!(K >= lo && K <= hi)) {
            throw OutOfRangeError("strike " + std::to_string(K) + " outside density grid [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + "]");
        }
        const double xk = std::log(K);
        double c = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double xj = std::log(grid.s_grid[j]);
            const double a = std::max(xj - half, xk);
            const double b = xj + half;
            if (b <= a) continue;
            c += p[j] * (std::exp(b) - std::exp(a) - K * (b - a));
        }
        out.prices.push_back(discount * c);
        // q at K by linear interpolation between centres.
        const auto it = std::upper_bound(grid.s_grid.begin(), grid.s_grid.end(), K);
        std::size_t j1 = std::min<std::size_t>(static_cast<std::size_t>(it - grid.s_grid.begin()), n - 1);
        const std::size_t j0 = j1 > 0 ? j1 - 1 : 0;
        if (j1 == j0) j1 = std::min(j0 + 1, n - 1);
        const double w = j1 == j0 ? 0.0 : (K - grid.s_grid[j0]) / (grid.s_grid[j1] - grid.s_grid[j0]);
        const double q = (1.0 - w) * grid.q_values[ti][j0] + w * grid.q_values[ti][j1];
        out.convexity.push_back(discount * q);
    }
    return out;
}

void write_density_csv(const DensityGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "time,spot,density\n" << std::setprecision(17);
    for (std::size_t i = 0; i < grid.times.size(); ++i) {
        for (std::size_t j = 0; j < grid.s_grid.size(); ++j) {
            out << grid.times[i] << ',' << grid.s_grid[j] << ',' << grid.q_values[i][j] << '\n';
        }
    }
}

}  // namespace lvcal
