// SPDX-License-Identifier: MIT
#include "lvcal/curves.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lvcal/errors.hpp"

namespace lvcal {

DiscountCurve::DiscountCurve(std::vector<double> tenors, std::vector<double> discounts)
    : tenors_(std::move(tenors)), discounts_(std::move(discounts)) {
    if (tenors_.size() < 2 || tenors_.size() != discounts_.size()) {
        throw ValidationError("discount curve needs at least two (tenor, discount) pairs of equal length");
    }
    if (tenors_.front() != 0.0) {
        throw ValidationError("discount curve must start at tenor 0");
    }
    if (discounts_.front() != 1.0) {
        throw ValidationError("discount curve must have P(0,0) = 1");
    }
    for (std::size_t i = 0; i < tenors_.size(); ++i) {
        if (!(discounts_[i] > 0.0) || !std::isfinite(discounts_[i])) {
            throw ValidationError("discount factor at tenor " + std::to_string(tenors_[i]) + " must be positive");
        }
        if (i > 0 && !(tenors_[i] > tenors_[i - 1])) {
            throw ValidationError("discount curve tenors must be strictly increasing");
        }
    }
    log_discounts_.reserve(discounts_.size());
    for (double p : discounts_) log_discounts_.push_back(std::log(p));
}

DiscountCurve DiscountCurve::flat(double rate, double horizon) {
    return DiscountCurve({0.0, horizon}, {1.0, std::exp(-rate * horizon)});
}

void DiscountCurve::check_range(double t) const {
    if (!(t >= 0.0) || t > tenors_.back()) {
        throw OutOfRangeError("curve time " + std::to_string(t) + " outside [0, " +
                              std::to_string(tenors_.back()) + "]");
    }
}

std::size_t DiscountCurve::segment(double t) const {
    // Right-continuous: t at node k lies in segment [t_k, t_{k+1}).
    auto it = std::upper_bound(tenors_.begin(), tenors_.end(), t);
    auto k = static_cast<std::size_t>(std::distance(tenors_.begin(), it));
    k = k == 0 ? 0 : k - 1;
    return std::min(k, tenors_.size() - 2);
}

double DiscountCurve::integrated_forward(double t) const {
    check_range(t);
    const std::size_t k = segment(t);
    const double h = tenors_[k + 1] - tenors_[k];
    const double a = (t - tenors_[k]) / h;
    return -((1.0 - a) * log_discounts_[k] + a * log_discounts_[k + 1]);
}

double DiscountCurve::discount(double t) const {
    check_range(t);
    const std::size_t k = segment(t);
    if (t == tenors_[k]) return discounts_[k];
    return std::exp(-integrated_forward(t));
}

double DiscountCurve::forward(double t) const {
    check_range(t);
    const std::size_t k = segment(t);
    return -(log_discounts_[k + 1] - log_discounts_[k]) / (tenors_[k + 1] - tenors_[k]);
}

double log_moneyness(double strike, double forward) {
    if (!(strike > 0.0) || !(forward > 0.0)) {
        throw DomainError("log_moneyness requires positive strike and forward");
    }
    return std::log(strike / forward);
}

}  // namespace lvcal
