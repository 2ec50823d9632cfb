// SPDX-License-Identifier: MIT
/// @file rng.hpp
/// @brief Counter-based Philox4x32-10 generator and keyed Gaussian draws
///
/// Draws are a pure function of (seed, path, step, driver), so changing the
/// number of paths or the block partitioning never reshuffles existing paths.

#pragma once

#include <array>
#include <cstdint>

namespace lvcal {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key) noexcept;
};

/// Uniform in (0, 1] from two 32-bit words (53 bits).
double uniform_from_bits(std::uint32_t hi, std::uint32_t lo) noexcept;

/// Four independent standard normals for (seed, path, step): one per driver.
/// With antithetic pairing, odd paths reuse the draws of path - 1 negated.
std::array<double, 4> gaussian_draws(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                                     bool antithetic = false) noexcept;

}  // namespace lvcal
