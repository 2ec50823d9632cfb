// SPDX-License-Identifier: MIT
#include "lvcal/market.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "lvcal/errors.hpp"

namespace lvcal {

MarketSnapshot::MarketSnapshot(double spot_, DiscountCurve domestic_, DiscountCurve foreign_,
                               TotalVarianceSurface surface_)
    : spot(spot_), domestic(std::move(domestic_)), foreign(std::move(foreign_)), surface(std::move(surface_)) {
    if (!(spot > 0.0)) throw ValidationError("market spot must be positive");
    if (surface.max_maturity() > horizon()) {
        throw ValidationError("surface maturities extend beyond the discount curves");
    }
}

double MarketSnapshot::horizon() const {
    return std::min({domestic.max_tenor(), foreign.max_tenor(), surface.max_maturity()});
}

double forward_price(const MarketSnapshot& snapshot, double t) {
    return snapshot.spot * snapshot.foreign.discount(t) / snapshot.domestic.discount(t);
}

MarketPoint market_point(const MarketSnapshot& snapshot, double strike, double t) {
    MarketPoint mp;
    mp.strike = strike;
    mp.forward = forward_price(snapshot, t);
    mp.discount = snapshot.domestic.discount(t);
    const double y = log_moneyness(strike, mp.forward);
    mp.tv = snapshot.surface.eval(y, t);
    mp.bs = BsPoint{t, y, std::max(mp.tv.w, 1e-12), mp.discount * mp.forward, snapshot.domestic.forward(t),
                    snapshot.foreign.forward(t)};
    return mp;
}

TotalVarianceSurface surface_from_quotes(std::span<const VolQuote> quotes, double spot,
                                         const DiscountCurve& domestic, const DiscountCurve& foreign) {
    if (quotes.empty()) throw ValidationError("no implied-vol quotes supplied");
    std::map<double, std::vector<std::pair<double, double>>> by_maturity;
    for (const VolQuote& q : quotes) {
        if (!(q.maturity > 0.0) || !(q.strike > 0.0) || !(q.implied_vol > 0.0)) {
            throw ValidationError("quote (T=" + std::to_string(q.maturity) + ", K=" + std::to_string(q.strike) +
                                  ") must have positive maturity, strike and vol");
        }
        const double fwd = spot * foreign.discount(q.maturity) / domestic.discount(q.maturity);
        by_maturity[q.maturity].emplace_back(std::log(q.strike / fwd), q.implied_vol * q.implied_vol * q.maturity);
    }
    std::vector<TotalVarianceSurface::Slice> slices;
    for (auto& [t, nodes] : by_maturity) {
        std::sort(nodes.begin(), nodes.end());
        TotalVarianceSurface::Slice s;
        s.t = t;
        for (const auto& [y, w] : nodes) {
            if (!s.y.empty() && y == s.y.back()) {
                throw ValidationError("duplicate strike in quotes at T=" + std::to_string(t));
            }
            s.y.push_back(y);
            s.w.push_back(w);
        }
        slices.push_back(std::move(s));
    }
    return TotalVarianceSurface(std::move(slices));
}

TotalVarianceSurface flat_surface(double sigma, std::span<const double> maturities, double y_max, std::size_t n_y) {
    std::vector<double> ys(n_y);
    for (std::size_t i = 0; i < n_y; ++i) {
        ys[i] = -y_max + 2.0 * y_max * static_cast<double>(i) / static_cast<double>(n_y - 1);
    }
    std::vector<double> ts(maturities.begin(), maturities.end());
    std::vector<double> ws;
    for (double t : ts) ws.insert(ws.end(), n_y, sigma * sigma * t);
    return TotalVarianceSurface(std::move(ys), std::move(ts), ws);
}

}  // namespace lvcal
