// SPDX-License-Identifier: MIT
#include "lvcal/black_scholes.hpp"

#include <boost/math/tools/roots.hpp>
#include <string>

#include "lvcal/errors.hpp"

namespace lvcal {

namespace {

void require_valid(const BsPoint& p) {
    if (!(p.w > 0.0)) throw DomainError("Black-Scholes total variance must be positive, got " + std::to_string(p.w));
    if (!(p.disc_fwd > 0.0)) throw DomainError("Black-Scholes discounted forward must be positive");
}

}  // namespace

double bs_call_tiv(const BsPoint& p) {
    require_valid(p);
    const double sw = std::sqrt(p.w);
    const double d1 = -p.y / sw + 0.5 * sw;
    const double d2 = d1 - sw;
    // e^y N(d2) underflows to 0 before e^y overflows for any realistic y.
    const double tail = d2 < -40.0 ? 0.0 : std::exp(p.y) * norm_cdf(d2);
    return p.disc_fwd * (norm_cdf(d1) - tail);
}

BsPartials bs_partials(const BsPoint& p) {
    require_valid(p);
    const double sw = std::sqrt(p.w);
    const double d1 = -p.y / sw + 0.5 * sw;
    const double d2 = d1 - sw;
    const double ey = std::exp(p.y);
    const double n2 = norm_cdf(d2);

    BsPartials out;
    out.price = p.disc_fwd * (norm_cdf(d1) - ey * n2);
    out.dC_dw = 0.5 * p.disc_fwd * ey * norm_pdf(d2) / sw;
    out.d2C_dw2 = 0.5 * out.dC_dw * (-0.25 - 1.0 / p.w + p.y * p.y / (p.w * p.w));
    out.d2C_dwdy = out.dC_dw * (-p.y / p.w + 0.5);
    out.dC_dy = -p.disc_fwd * ey * n2;
    out.d2C_dy2 = out.dC_dy + 2.0 * out.dC_dw;
    return out;
}

double tiv_bracket(double y, double w, double dw_dy, double d2w_dy2) {
    if (!(w > 0.0)) throw DomainError("tiv_bracket requires w > 0");
    return 1.0 - (y / w) * dw_dy + 0.5 * d2w_dy2 +
           0.25 * dw_dy * dw_dy * (-0.25 - 1.0 / w + (y * y) / (w * w));
}

double dupire_denominator(const BsPoint& p, double dw_dy, double d2w_dy2) {
    return bs_partials(p).dC_dw * tiv_bracket(p.y, p.w, dw_dy, d2w_dy2);
}

double bs_theta_tiv(const BsPoint& p, double dw_dy, double dw_dT) {
    const BsPartials g = bs_partials(p);
    return -p.f_for * g.price + g.dC_dw * dw_dT + (g.dC_dy + g.dC_dw * dw_dy) * (p.f_for - p.f_dom);
}

double strike_delta_times_k(const BsPoint& p, double dw_dy) {
    const BsPartials g = bs_partials(p);
    return g.dC_dy + g.dC_dw * dw_dy;
}

ImpliedVariance implied_total_variance(double call_price, double disc_fwd, double y) {
    if (!(disc_fwd > 0.0)) throw DomainError("implied variance requires positive discounted forward");
    const double intrinsic = std::max(disc_fwd * (1.0 - std::exp(y)), 0.0);
    const double band = 1e-14 * disc_fwd;
    if (!(call_price >= intrinsic - band) || !(call_price <= disc_fwd + band)) {
        throw SolverError("call price " + std::to_string(call_price) + " outside no-arbitrage band [" +
                          std::to_string(intrinsic) + ", " + std::to_string(disc_fwd) + "]");
    }
    if (call_price - intrinsic <= band) return {0.0, true};

    auto f = [&](double w) { return bs_call_tiv({1.0, y, w, disc_fwd, 0.0, 0.0}) - call_price; };
    double lo = 1e-16;
    double hi = 1.0;
    while (f(hi) < 0.0) {
        lo = hi;
        hi *= 4.0;
        if (hi > 1e6) throw SolverError("implied variance bracket exceeded w = 1e6");
    }
    if (f(lo) >= 0.0) return {lo, false};
    std::uintmax_t max_iter = 200;
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52),
                                                    max_iter);
    return {0.5 * (a + b), false};
}

}  // namespace lvcal
