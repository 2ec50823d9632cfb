// SPDX-License-Identifier: MIT
/// @file leverage_surface.hpp
/// @brief Local-vol / leverage grid L(K,T) and node diagnostic flags

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lvcal {

/// Bit flags attached to calibrated nodes.
enum NodeFlag : std::uint32_t {
    kFlagNone = 0,
    kFlagFlooredDenominator = 1u << 0,
    kFlagFlooredVariance = 1u << 1,
    kFlagCappedVariance = 1u << 2,
    kFlagDegenerate = 1u << 3,
    kFlagSparse = 1u << 4,
    kFlagNonConverged = 1u << 5,
    kFlagExtrapolated = 1u << 6,
};

/// "ok" or a '|'-joined list of flag names.
std::string flag_string(std::uint32_t flags);
std::uint32_t parse_flag_string(const std::string& text);

enum class SurfaceKind { local_vol, leverage };

/// Grid of sigma_LV(K,T) or L(K,T).
///
/// Between maturities the surface is piecewise constant: the slice at T_i
/// applies on (T_{i-1}, T_i], the first slice on [0, T_0] and the last slice
/// beyond T_n. Along strike it is linear with flat extrapolation.
class LeverageSurface {
public:
    LeverageSurface(SurfaceKind kind, std::vector<double> strikes, std::vector<double> maturities,
                    std::vector<double> values, std::vector<std::uint32_t> flags = {});

    /// Same value everywhere on a single-node grid.
    static LeverageSurface constant(SurfaceKind kind, double value);

    SurfaceKind kind() const noexcept { return kind_; }
    std::span<const double> strikes() const noexcept { return strikes_; }
    std::span<const double> maturities() const noexcept { return maturities_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const std::uint32_t> flags() const noexcept { return flags_; }

    double at(std::size_t t_index, std::size_t k_index) const { return values_[t_index * strikes_.size() + k_index]; }
    std::uint32_t flag_at(std::size_t t_index, std::size_t k_index) const {
        return flags_[t_index * strikes_.size() + k_index];
    }
    std::span<const double> slice(std::size_t t_index) const {
        return std::span<const double>(values_).subspan(t_index * strikes_.size(), strikes_.size());
    }

    /// Index of the slice governing time t.
    std::size_t slice_index(double t) const;

    /// Value at (strike, t); sets *extrapolated when the strike lies outside the grid.
    double value(double strike, double t, bool* extrapolated = nullptr) const;

    /// Strike interpolation on a single slice.
    static double interpolate(std::span<const double> strikes, std::span<const double> values, double strike,
                              bool* extrapolated = nullptr);

private:
    SurfaceKind kind_;
    std::vector<double> strikes_;
    std::vector<double> maturities_;
    std::vector<double> values_;
    std::vector<std::uint32_t> flags_;
};

}  // namespace lvcal
