#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "calr/dissipation.hpp"
#include "oracles.hpp"

using namespace calr;

namespace {

SlabConfig slab(double a, double delta, double beta = 0.5, double lambda = 1.0, double xi_frac = 0.25) {
    SlabConfig c;
    c.a = a;
    c.delta = delta;
    c.beta = beta;
    c.lambda = lambda;
    c.xi = xi_frac * a;
    return c;
}

oracle::Slab as_oracle(const SlabConfig& c) { return {c.a, c.delta, c.beta, c.lambda, c.xi}; }

// I_k for the rectangle as a product of its x and y factors.
std::complex<double> rect_I(const oracle::Rect& r, double k) {
    const std::complex<double> y = r.Q * (oracle::exp_integral(k, r.y0, r.y0 + r.h) - oracle::exp_integral(k, r.y0 - r.h, r.y0));
    return y * (std::exp(-k * r.d0()) - std::exp(-k * r.d1())) / k;
}

}  // namespace

TEST(Integrand, LMatchesDefinition) {
    const SlabConfig c = slab(1.0, 1e-3, 0.7, 1.2);
    const double db = std::pow(1e-3, 0.7);
    const double w = (1.2 * 1.2 * db * db + 4.0) / std::pow(2e-3 + 1.2 * db, 2);
    for (double k : {0.1, 1.0, 5.0}) {
        const double ref = (1 - std::exp(-2 * k * c.xi)) + w * std::exp(-4 * k * c.a) * (std::exp(2 * k * c.xi) - 1);
        EXPECT_NEAR(integrand_L(c, k), ref, 1e-13 * ref);
    }
    EXPECT_THROW(integrand_L(c, 0.0), InvalidParameter);
}

TEST(Integrand, FMatchesStripIntegralOfPotential) {
    const oracle::Rect r{6, 6, 1, 1, 1.0};
    const RectangleSource src(6, 6, 1, 1, 1.0);
    for (double delta : {1e-2, 1e-3}) {
        const SlabConfig c = slab(1.0, delta);
        for (double k : {0.05, 0.4, 1.5, 4.0}) {
            const double ref = oracle::naive_F(as_oracle(c), rect_I(r, k), k, 2000);
            const double got = integrand_F(src, c, k).magnitude();
            EXPECT_NEAR(got, ref, 1e-9 * ref) << delta << ' ' << k;
        }
    }
}

TEST(Dissipation, MatchesOracleQuadrature) {
    const oracle::Rect r{6, 6, 1, 1, 1.0};
    const RectangleSource src(6, 6, 1, 1, 1.0);
    for (double delta : {1e-2, 1e-3}) {
        const SlabConfig c = slab(1.0, delta);
        auto F = [&](double k) { return oracle::naive_F(as_oracle(c), rect_I(r, k), k, 200); };
        // past k = 12 the integrand is below 1e-20 of its peak
        double ref = 0.0;
        for (int i = 0; i < 24; ++i) ref += oracle::adaptive_simpson(F, 1e-12 + 0.5 * i, 0.5 * (i + 1), 1e-16);
        const auto E = dissipation(src, c, 1e-10);
        EXPECT_NEAR(E.value, ref, 1e-7 * ref) << delta;
        EXPECT_FALSE(E.warning) << E.message;
    }
}

TEST(Dissipation, CircleAgainstGridOracle) {
    const CircleSource src(6, 6, 1, 1.0);
    const SlabConfig c = slab(1.0, 1e-2);
    auto F = [&](double k) {
        const std::complex<double> I = oracle::circle_I_scaled_grid(6, 6, 1, 1.0, k, 100, 50) * std::exp(-5.0 * k);
        return oracle::naive_F(as_oracle(c), I, k, 100);
    };
    // unit panels; a fixed composite rule misses the peak near k0
    double ref = 0.0;
    for (int i = 0; i < 12; ++i) ref += oracle::adaptive_simpson(F, 1e-12 + i, i + 1.0, 1e-16);
    EXPECT_NEAR(dissipation(src, c, 1e-10).value, ref, 1e-8 * ref);
}

TEST(Dissipation, GaugeConstantDoesNotMatter) {
    const RectangleSource src(6, 6, 1, 1, 1.0);
    DissipationOptions a, b;
    b.A0 = {3.0, -1.0};
    const SlabConfig c = slab(1.0, 1e-4);
    EXPECT_EQ(dissipation(src, c, a).value, dissipation(src, c, b).value);
}

TEST(Dissipation, ScalesWithChargeSquared) {
    const SlabConfig c = slab(1.5, 1e-6);
    const double e1 = dissipation(RectangleSource(6, 6, 1, 1, 1.0), c, 1e-10).value;
    const double e2 = dissipation(RectangleSource(6, 6, 1, 1, -2.0), c, 1e-10).value;
    EXPECT_NEAR(e2, 4.0 * e1, 1e-8 * e2);
}

TEST(Dissipation, TailBoundCoversDiscardedPart) {
    const RectangleSource src(6, 6, 1, 1, 1.0);
    const SlabConfig c = slab(1.0, 1e-3);
    for (double K : {2.0, 5.0, 10.0}) {
        double tail = 0.0;
        for (double k = K; k < K + 40.0; k += 0.01) tail += 0.01 * integrand_F(src, c, k + 0.005).magnitude();
        EXPECT_LE(tail, dissipation_tail_bound(src, c, K));
    }
    EXPECT_TRUE(std::isinf(dissipation_tail_bound(src, slab(5.5, 1e-3), 1.0)));
}

TEST(Dissipation, RejectsSourceInsideSlab) {
    EXPECT_THROW(dissipation(RectangleSource(1.5, 0, 1, 1, 1.0), slab(1.0, 1e-3)), InvalidParameter);
}

TEST(Dissipation, SmallDeltaStaysFinite) {
    const RectangleSource src(6, 6, 1, 1, 1.0);
    const auto E = dissipation(src, slab(2.0, 1e-14, 0.8, 1.0), 1e-8);
    EXPECT_TRUE(std::isfinite(E.value));
    EXPECT_GT(E.value, 0.0);
    EXPECT_FALSE(E.warning) << E.message;
}

TEST(LowerBoundTail, OrderedBelowTotal) {
    const CircleSource src(6, 6, 1, 1.0);
    for (double delta : {1e-6, 1e-10}) {
        const SlabConfig c = slab(3.0, delta, 0.5, 1.0);
        const auto lb = dissipation_lower_bound_tail(src, c);
        const double E = dissipation(src, c, 1e-10).value;
        EXPECT_GT(lb.tail_integral, 0.0);
        EXPECT_LE(lb.closed_bound, lb.tail_integral);
        EXPECT_LE(lb.tail_integral, E * (1 + 1e-9));
    }
    EXPECT_THROW(dissipation_lower_bound_tail(src, slab(3.0, 0.5, 0.5, 1.0)), NotApplicable);
}
