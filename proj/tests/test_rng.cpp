// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>

#include "lvcal/rng.hpp"

using namespace lvcal;

TEST(Philox, KnownAnswers) {
    using C = Philox4x32::Counter;
    EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, UniformRange) {
    EXPECT_GT(uniform_from_bits(0, 0), 0.0);
    EXPECT_LE(uniform_from_bits(0xffffffff, 0xffffffff), 1.0);
}

TEST(GaussianDraws, Moments) {
    const int n = 200000;
    double m[4] = {}, v[4] = {}, c01 = 0.0;
    for (int p = 0; p < n; ++p) {
        const auto z = gaussian_draws(42, static_cast<std::uint64_t>(p), 3);
        for (int d = 0; d < 4; ++d) {
            m[d] += z[d];
            v[d] += z[d] * z[d];
        }
        c01 += z[0] * z[1];
    }
    for (int d = 0; d < 4; ++d) {
        EXPECT_NEAR(m[d] / n, 0.0, 4.0 / std::sqrt(double(n)));
        EXPECT_NEAR(v[d] / n, 1.0, 4.0 * std::sqrt(2.0 / n));
    }
    EXPECT_NEAR(c01 / n, 0.0, 4.0 / std::sqrt(double(n)));
}

TEST(GaussianDraws, KeyedAndAntithetic) {
    EXPECT_EQ(gaussian_draws(7, 11, 5), gaussian_draws(7, 11, 5));
    EXPECT_NE(gaussian_draws(7, 11, 5), gaussian_draws(8, 11, 5));
    EXPECT_NE(gaussian_draws(7, 11, 5), gaussian_draws(7, 12, 5));
    EXPECT_NE(gaussian_draws(7, 11, 5), gaussian_draws(7, 11, 6));
    const auto a = gaussian_draws(7, 10, 5, true);
    const auto b = gaussian_draws(7, 11, 5, true);
    for (int d = 0; d < 4; ++d) EXPECT_EQ(a[d], -b[d]);
    EXPECT_EQ(a, gaussian_draws(7, 5, 5));
}
