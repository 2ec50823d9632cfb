// SPDX-License-Identifier: MIT
#include "lvcal/leverage_surface.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "lvcal/errors.hpp"

namespace lvcal {

namespace {

constexpr std::array<std::pair<std::uint32_t, const char*>, 7> kFlagNames{{
    {kFlagFlooredDenominator, "floored_denominator"},
    {kFlagFlooredVariance, "floored_variance"},
    {kFlagCappedVariance, "capped_variance"},
    {kFlagDegenerate, "degenerate"},
    {kFlagSparse, "sparse"},
    {kFlagNonConverged, "nonconverged"},
    {kFlagExtrapolated, "extrapolated"},
}};

}  // namespace

std::string flag_string(std::uint32_t flags) {
    if (flags == kFlagNone) return "ok";
    std::string out;
    for (const auto& [bit, name] : kFlagNames) {
        if (flags & bit) {
            if (!out.empty()) out += '|';
            out += name;
        }
    }
    return out;
}

std::uint32_t parse_flag_string(const std::string& text) {
    if (text.empty() || text == "ok") return kFlagNone;
    std::uint32_t flags = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('|', pos), text.size());
        const std::string token = text.substr(pos, end - pos);
        auto it = std::find_if(kFlagNames.begin(), kFlagNames.end(), [&](const auto& p) { return token == p.second; });
        if (it == kFlagNames.end()) throw ParseError("unknown node flag '" + token + "'");
        flags |= it->first;
        pos = end + 1;
    }
    return flags;
}

LeverageSurface::LeverageSurface(SurfaceKind kind, std::vector<double> strikes, std::vector<double> maturities,
                                 std::vector<double> values, std::vector<std::uint32_t> flags)
    : kind_(kind),
      strikes_(std::move(strikes)),
      maturities_(std::move(maturities)),
      values_(std::move(values)),
      flags_(std::move(flags)) {
    if (strikes_.empty() || maturities_.empty()) throw ValidationError("leverage surface grids must be non-empty");
    if (values_.size() != strikes_.size() * maturities_.size()) {
        throw ValidationError("leverage surface values must have |strikes| * |maturities| entries");
    }
    if (flags_.empty()) flags_.assign(values_.size(), kFlagNone);
    if (flags_.size() != values_.size()) throw ValidationError("leverage surface flags size mismatch");
    for (std::size_t i = 1; i < strikes_.size(); ++i) {
        if (!(strikes_[i] > strikes_[i - 1])) throw ValidationError("leverage strikes must be strictly increasing");
    }
    for (std::size_t i = 1; i < maturities_.size(); ++i) {
        if (!(maturities_[i] > maturities_[i - 1])) {
            throw ValidationError("leverage maturities must be strictly increasing");
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v) || !(v > 0.0)) throw ValidationError("leverage values must be finite and positive");
    }
}

LeverageSurface LeverageSurface::constant(SurfaceKind kind, double value) {
    return LeverageSurface(kind, {1.0}, {1.0}, {value});
}

std::size_t LeverageSurface::slice_index(double t) const {
    // Small relative slack so that a step ending exactly on T_i uses slice i.
    const double probe = t - 1e-12 * std::max(1.0, std::abs(t));
    auto it = std::lower_bound(maturities_.begin(), maturities_.end(), probe);
    if (it == maturities_.end()) return maturities_.size() - 1;
    return static_cast<std::size_t>(std::distance(maturities_.begin(), it));
}

double LeverageSurface::interpolate(std::span<const double> strikes, std::span<const double> values, double strike,
                                    bool* extrapolated) {
    const std::size_t n = strikes.size();
    if (n == 1 || strike <= strikes.front()) {
        if (extrapolated && n > 1 && strike < strikes.front()) *extrapolated = true;
        return values.front();
    }
    if (strike >= strikes.back()) {
        if (extrapolated && strike > strikes.back()) *extrapolated = true;
        return values.back();
    }
    auto it = std::upper_bound(strikes.begin(), strikes.end(), strike);
    const std::size_t k = static_cast<std::size_t>(std::distance(strikes.begin(), it)) - 1;
    const double a = (strike - strikes[k]) / (strikes[k + 1] - strikes[k]);
    return values[k] + a * (values[k + 1] - values[k]);
}

double LeverageSurface::value(double strike, double t, bool* extrapolated) const {
    return interpolate(strikes_, slice(slice_index(t)), strike, extrapolated);
}

}  // namespace lvcal
