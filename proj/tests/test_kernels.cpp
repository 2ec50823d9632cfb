// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lvcal/kernels.hpp"

using namespace lvcal::simd;

namespace {

struct Data {
    std::vector<double> s, rd, rf, d, q, z, extra;
};

Data make(std::size_t n, unsigned seed) {
    std::mt19937_64 g(seed);
    std::lognormal_distribution<double> spot(0.0, 0.25);
    std::normal_distribution<double> nd;
    Data x;
    for (std::size_t i = 0; i < n; ++i) {
        x.s.push_back(spot(g));
        x.rd.push_back(0.03 + 0.01 * nd(g));
        x.rf.push_back(0.01 + 0.01 * nd(g));
        x.d.push_back(std::exp(-0.02 + 0.01 * nd(g)));
        x.q.push_back(0.04 + 0.01 * nd(g));
        x.z.push_back(nd(g));
        x.extra.push_back(0.001 * nd(g));
    }
    return x;
}

void near(double a, double b, double rel) { EXPECT_NEAR(a, b, rel * std::max(1.0, std::abs(b))); }

void near(const Sums2& a, const Sums2& b) {
    near(a.sum, b.sum, 1e-12);
    near(a.sum_sq, b.sum_sq, 1e-12);
}

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {
protected:
    void SetUp() override {
        if (avx2_kernels() == nullptr) GTEST_SKIP() << "AVX2 kernels unavailable";
    }
};

}  // namespace

TEST_P(KernelEquivalence, Reductions) {
    const std::size_t n = GetParam();
    const Data x = make(n, static_cast<unsigned>(n));
    const KernelTable& a = scalar_kernels();
    const KernelTable& b = *avx2_kernels();
    near(b.weighted(x.q.data(), x.d.data(), n), a.weighted(x.q.data(), x.d.data(), n));
    for (double k : {0.6, 1.0, 1.3}) {
        near(b.drift_indicator(x.s.data(), x.rd.data(), x.rf.data(), x.d.data(), n, k, 0.03, 0.01),
             a.drift_indicator(x.s.data(), x.rd.data(), x.rf.data(), x.d.data(), n, k, 0.03, 0.01));
        near(b.call_payoff(x.s.data(), x.d.data(), n, k), a.call_payoff(x.s.data(), x.d.data(), n, k));
        near(b.put_payoff(x.s.data(), x.d.data(), n, k), a.put_payoff(x.s.data(), x.d.data(), n, k));
        near(b.indicator(x.s.data(), x.d.data(), n, k), a.indicator(x.s.data(), x.d.data(), n, k));
        const KernelSums ea = a.epanechnikov(x.s.data(), x.d.data(), x.q.data(), n, k, 1.0 / 0.05);
        const KernelSums eb = b.epanechnikov(x.s.data(), x.d.data(), x.q.data(), n, k, 1.0 / 0.05);
        near(eb.a, ea.a, 1e-12);
        near(eb.aq, ea.aq, 1e-12);
        near(eb.a2, ea.a2, 1e-12);
        near(eb.a2q, ea.a2q, 1e-12);
        near(eb.a2q2, ea.a2q2, 1e-12);
    }
}

TEST_P(KernelEquivalence, Steps) {
    const std::size_t n = GetParam();
    const Data x = make(n, static_cast<unsigned>(n) + 99);
    const KernelTable& a = scalar_kernels();
    const KernelTable& b = *avx2_kernels();

    auto check = [&](const std::vector<double>& va, const std::vector<double>& vb) {
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(va[i], vb[i], 1e-15 * std::max(1.0, std::abs(va[i])));
    };

    std::vector<double> xa = x.rd, xb = x.rd;
    a.ou_step(xa.data(), x.z.data(), x.extra.data(), n, 0.998, 0.0014, 0.02);
    b.ou_step(xb.data(), x.z.data(), x.extra.data(), n, 0.998, 0.0014, 0.02);
    check(xa, xb);
    a.ou_step(xa.data(), x.z.data(), nullptr, n, 0.998, 0.0014, 0.02);
    b.ou_step(xb.data(), x.z.data(), nullptr, n, 0.998, 0.0014, 0.02);
    check(xa, xb);

    // Include negative variances so the truncation branch is exercised.
    std::vector<double> ua(n), ub(n);
    for (std::size_t i = 0; i < n; ++i) ua[i] = ub[i] = x.q[i] - 0.04;
    a.cir_step(ua.data(), x.z.data(), n, 1.0, 0.04, 0.3, 0.02);
    b.cir_step(ub.data(), x.z.data(), n, 1.0, 0.04, 0.3, 0.02);
    check(ua, ub);

    std::vector<double> la(n), lb(n), vol(n);
    for (std::size_t i = 0; i < n; ++i) {
        la[i] = lb[i] = std::log(x.s[i]);
        vol[i] = std::sqrt(x.q[i] * x.q[i]) * 5.0;
    }
    a.log_spot_step(la.data(), vol.data(), x.extra.data(), x.z.data(), n, 0.02);
    b.log_spot_step(lb.data(), vol.data(), x.extra.data(), x.z.data(), n, 0.02);
    check(la, lb);
}

INSTANTIATE_TEST_SUITE_P(Lengths, KernelEquivalence, ::testing::Values(0, 1, 3, 4, 7, 64, 1001, 4096));

TEST(Kernels, ScalarReference) {
    const KernelTable& a = scalar_kernels();
    const double s[] = {0.5, 1.0, 1.5, 2.0};
    const double d[] = {1.0, 1.0, 2.0, 0.5};
    const Sums2 c = a.call_payoff(s, d, 4, 1.0);
    EXPECT_DOUBLE_EQ(c.sum, 1.0 + 0.5);
    EXPECT_DOUBLE_EQ(c.sum_sq, 1.0 + 0.25);
    const Sums2 ind = a.indicator(s, d, 4, 1.0);
    EXPECT_DOUBLE_EQ(ind.sum, 2.5);
    // Strict inequality at the strike.
    EXPECT_EQ(a.indicator(s, d, 4, 2.0).sum, 0.0);
    double u[] = {-0.01, 0.04};
    const double z[] = {1.0, 0.0};
    a.cir_step(u, z, 2, 1.0, 0.04, 0.3, 0.01);
    EXPECT_NEAR(u[0], -0.01 + 0.04 * 0.01, 1e-16);
    EXPECT_NEAR(u[1], 0.04, 1e-16);
}

TEST(Kernels, ActiveTableIsOneOfBoth) {
    const KernelTable& t = active_kernels();
    EXPECT_TRUE(&t == &scalar_kernels() || &t == avx2_kernels());
}
