// SPDX-License-Identifier: MIT
#include "lvcal/rng.hpp"

#include <cmath>
#include <numbers>

namespace lvcal {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

double uniform_from_bits(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

std::array<double, 4> gaussian_draws(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                                     bool antithetic) noexcept {
    double sign = 1.0;
    if (antithetic) {
        if (path & 1u) sign = -1.0;
        path >>= 1;
    }
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::array<double, 4> z{};
    for (std::uint32_t block = 0; block < 2; ++block) {
        // Counter layout: (path lo, path hi, step lo, step hi << 8 | block).
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                                      static_cast<std::uint32_t>(step),
                                      static_cast<std::uint32_t>(step >> 32) << 8 | block};
        const auto r = Philox4x32::generate(ctr, key);
        const double u1 = uniform_from_bits(r[0], r[1]);
        const double u2 = uniform_from_bits(r[2], r[3]);
        // Box-Muller.
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        z[2 * block] = sign * radius * std::cos(angle);
        z[2 * block + 1] = sign * radius * std::sin(angle);
    }
    return z;
}

}  // namespace lvcal
