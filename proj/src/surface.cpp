// SPDX-License-Identifier: MIT
#include "lvcal/surface.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lvcal/errors.hpp"

namespace lvcal {

namespace {

// Calendar comparisons tolerate round-off in node data.
constexpr double kCalendarTolerance = 1e-14;

// Natural cubic spline second derivatives (Thomas algorithm).
std::vector<double> natural_spline(const std::vector<double>& x, const std::vector<double>& f) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1];
        const double h1 = x[i + 1] - x[i];
        const double a = h0 / 6.0;
        const double b = (h0 + h1) / 3.0;
        const double cc = h1 / 6.0;
        const double rhs = (f[i + 1] - f[i]) / h1 - (f[i] - f[i - 1]) / h0;
        const double denom = b - a * c[i - 1];
        c[i] = cc / denom;
        d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m[i] = d[i] - c[i] * m[i + 1];
    }
    return m;
}

struct Slope {
    double v, d1, d2;
};

// Harmonic-mean node slope from secants a (left) and b (right), with y-derivatives.
Slope harmonic_slope(const Slope& a, const Slope& b) {
    if (!(a.v > 0.0) || !(b.v > 0.0)) return {0.0, 0.0, 0.0};
    const double s = a.v + b.v;
    const double v = 2.0 * a.v * b.v / s;
    const double da = 2.0 * b.v * b.v / (s * s);
    const double db = 2.0 * a.v * a.v / (s * s);
    const double s3 = s * s * s;
    const double daa = -4.0 * b.v * b.v / s3;
    const double dbb = -4.0 * a.v * a.v / s3;
    const double dab = 4.0 * a.v * b.v / s3;
    const double d1 = da * a.d1 + db * b.d1;
    const double d2 = da * a.d2 + db * b.d2 + daa * a.d1 * a.d1 + 2.0 * dab * a.d1 * b.d1 + dbb * b.d1 * b.d1;
    return {v, d1, d2};
}

}  // namespace

TotalVarianceSurface::TotalVarianceSurface(std::vector<double> y_grid, std::vector<double> t_grid,
                                           std::span<const double> w_values) {
    if (w_values.size() != y_grid.size() * t_grid.size()) {
        throw ValidationError("surface w_values size must equal |y_grid| * |t_grid|");
    }
    slices_.reserve(t_grid.size());
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        Slice s;
        s.t = t_grid[j];
        s.y = y_grid;
        s.w.assign(w_values.begin() + static_cast<std::ptrdiff_t>(j * y_grid.size()),
                   w_values.begin() + static_cast<std::ptrdiff_t>((j + 1) * y_grid.size()));
        slices_.push_back(std::move(s));
    }
    build();
}

TotalVarianceSurface::TotalVarianceSurface(std::vector<Slice> slices) : slices_(std::move(slices)) {
    build();
}

void TotalVarianceSurface::build() {
    if (slices_.empty()) throw ValidationError("surface needs at least one maturity slice");
    for (std::size_t j = 0; j < slices_.size(); ++j) {
        const Slice& s = slices_[j];
        if (!(s.t > 0.0)) throw ValidationError("surface maturities must be positive");
        if (j > 0 && !(s.t > slices_[j - 1].t)) {
            throw ValidationError("surface maturities must be strictly increasing");
        }
        if (s.y.empty() || s.y.size() != s.w.size()) {
            throw ValidationError("surface slice at T=" + std::to_string(s.t) + " has mismatched y/w sizes");
        }
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            if (!(s.w[i] > 0.0) || !std::isfinite(s.w[i])) {
                throw ValidationError("total variance must be positive at every node (T=" + std::to_string(s.t) +
                                      ", y=" + std::to_string(s.y[i]) + ")");
            }
            if (i > 0 && !(s.y[i] > s.y[i - 1])) {
                throw ValidationError("surface log-moneyness grid must be strictly increasing");
            }
        }
    }
    second_derivs_.clear();
    for (const Slice& s : slices_) second_derivs_.push_back(natural_spline(s.y, s.w));

    // Calendar check: each slice's nodes against the neighbouring slice interpolant.
    for (std::size_t j = 0; j + 1 < slices_.size(); ++j) {
        auto violates = [&](std::size_t lo, std::size_t hi, double y) {
            return eval_slice(lo, y).v > eval_slice(hi, y).v + kCalendarTolerance;
        };
        for (double y : slices_[j].y) {
            if (violates(j, j + 1, y)) {
                throw ArbitrageError("calendar arbitrage: w decreases between T=" + std::to_string(slices_[j].t) +
                                     " and T=" + std::to_string(slices_[j + 1].t) + " at y=" + std::to_string(y));
            }
        }
        for (double y : slices_[j + 1].y) {
            if (violates(j, j + 1, y)) {
                throw ArbitrageError("calendar arbitrage: w decreases between T=" + std::to_string(slices_[j].t) +
                                     " and T=" + std::to_string(slices_[j + 1].t) + " at y=" + std::to_string(y));
            }
        }
    }
}

TotalVarianceSurface::SplineValue TotalVarianceSurface::eval_slice(std::size_t j, double y) const {
    const Slice& s = slices_[j];
    const auto& m = second_derivs_[j];
    const std::size_t n = s.y.size();
    if (n == 1) return {s.w[0], 0.0, 0.0};
    // Flat strictly outside; the end knots keep their one-sided derivatives.
    if (y < s.y.front()) return {s.w.front(), 0.0, 0.0};
    if (y > s.y.back()) return {s.w.back(), 0.0, 0.0};
    auto it = std::upper_bound(s.y.begin(), s.y.end(), y);
    const std::size_t k = std::min(static_cast<std::size_t>(std::distance(s.y.begin(), it)) - 1, n - 2);
    const double h = s.y[k + 1] - s.y[k];
    const double a = (s.y[k + 1] - y) / h;
    const double b = (y - s.y[k]) / h;
    const double v = a * s.w[k] + b * s.w[k + 1] + ((a * a * a - a) * m[k] + (b * b * b - b) * m[k + 1]) * h * h / 6.0;
    const double d1 = (s.w[k + 1] - s.w[k]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m[k] +
                      (3.0 * b * b - 1.0) / 6.0 * h * m[k + 1];
    const double d2 = a * m[k] + b * m[k + 1];
    return {v, d1, d2};
}

TotalVarianceSample TotalVarianceSurface::eval(double y, double t) const {
    if (!(t > 0.0)) throw DomainError("total variance evaluated at non-positive maturity " + std::to_string(t));
    const std::size_t n = slices_.size();

    if (n == 1 || t <= slices_.front().t) {
        const SplineValue v = eval_slice(0, y);
        const double scale = t / slices_.front().t;
        return {v.v * scale, v.d1 * scale, v.d2 * scale, v.v / slices_.front().t};
    }

    auto secant = [&](std::size_t j, const SplineValue& lo, const SplineValue& hi) {
        const double h = slices_[j + 1].t - slices_[j].t;
        return Slope{(hi.v - lo.v) / h, (hi.d1 - lo.d1) / h, (hi.d2 - lo.d2) / h};
    };

    if (t >= slices_.back().t) {
        const SplineValue lo = eval_slice(n - 2, y);
        const SplineValue hi = eval_slice(n - 1, y);
        const Slope d = secant(n - 2, lo, hi);
        const double dt = t - slices_.back().t;
        return {hi.v + d.v * dt, hi.d1 + d.d1 * dt, hi.d2 + d.d2 * dt, d.v};
    }

    auto it = std::upper_bound(slices_.begin(), slices_.end(), t, [](double x, const Slice& s) { return x < s.t; });
    const std::size_t j = static_cast<std::size_t>(std::distance(slices_.begin(), it)) - 1;

    const SplineValue v0 = eval_slice(j, y);
    const SplineValue v1 = eval_slice(j + 1, y);
    const Slope mid = secant(j, v0, v1);

    Slope d0 = mid;
    if (j > 0) d0 = harmonic_slope(secant(j - 1, eval_slice(j - 1, y), v0), mid);
    Slope d1 = mid;
    if (j + 2 < n) d1 = harmonic_slope(mid, secant(j + 1, v1, eval_slice(j + 2, y)));

    const double h = slices_[j + 1].t - slices_[j].t;
    const double s = (t - slices_[j].t) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    const double g00 = 6.0 * s2 - 6.0 * s;
    const double g10 = 3.0 * s2 - 4.0 * s + 1.0;
    const double g01 = -6.0 * s2 + 6.0 * s;
    const double g11 = 3.0 * s2 - 2.0 * s;

    TotalVarianceSample out;
    out.w = h00 * v0.v + h10 * h * d0.v + h01 * v1.v + h11 * h * d1.v;
    out.dw_dy = h00 * v0.d1 + h10 * h * d0.d1 + h01 * v1.d1 + h11 * h * d1.d1;
    out.d2w_dy2 = h00 * v0.d2 + h10 * h * d0.d2 + h01 * v1.d2 + h11 * h * d1.d2;
    out.dw_dt = (g00 * v0.v + g10 * h * d0.v + g01 * v1.v + g11 * h * d1.v) / h;
    return out;
}

double TotalVarianceSurface::implied_vol(double y, double t) const {
    return std::sqrt(eval(y, t).w / t);
}

std::vector<double> TotalVarianceSurface::maturities() const {
    std::vector<double> out;
    out.reserve(slices_.size());
    for (const auto& s : slices_) out.push_back(s.t);
    return out;
}

std::pair<double, double> TotalVarianceSurface::y_range(double t) const {
    auto range_of = [&](std::size_t j) { return std::pair{slices_[j].y.front(), slices_[j].y.back()}; };
    if (t <= slices_.front().t) return range_of(0);
    if (t >= slices_.back().t) return range_of(slices_.size() - 1);
    auto it = std::upper_bound(slices_.begin(), slices_.end(), t, [](double x, const Slice& s) { return x < s.t; });
    const std::size_t j = static_cast<std::size_t>(std::distance(slices_.begin(), it)) - 1;
    auto [a0, b0] = range_of(j);
    auto [a1, b1] = range_of(j + 1);
    return {std::min(a0, a1), std::max(b0, b1)};
}

}  // namespace lvcal
