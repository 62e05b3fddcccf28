#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "calr/slab.hpp"
#include "oracles.hpp"

using namespace calr;

namespace {

oracle::Slab as_oracle(const SlabConfig& c) { return {c.a, c.delta, c.beta, c.lambda, c.xi}; }

SlabConfig make(double a, double delta, double beta, double lambda, double xi = 0.25) {
    SlabConfig c;
    c.a = a;
    c.delta = delta;
    c.beta = beta;
    c.lambda = lambda;
    c.xi = xi;
    return c;
}

}  // namespace

TEST(Feasibility, Table) {
    EXPECT_TRUE(feasible(0.5, 1.0));
    EXPECT_FALSE(feasible(0.5, 0.0));
    EXPECT_FALSE(feasible(0.5, -1.0));
    EXPECT_TRUE(feasible(1.0, -1.0));
    EXPECT_FALSE(feasible(1.0, -1.5));
    EXPECT_TRUE(feasible(2.0, -1.0));
    EXPECT_FALSE(feasible(2.0, 0.0));
}

TEST(Tau, Values) {
    EXPECT_DOUBLE_EQ(tau(0.5), 5.0 / 3.0);
    EXPECT_DOUBLE_EQ(tau(0.8), 2.8 / 1.8);
    EXPECT_DOUBLE_EQ(tau(1.0), 1.5);
    EXPECT_DOUBLE_EQ(tau(2.0), 1.5);
    // continuous at beta = 1
    EXPECT_NEAR(tau(1.0 - 1e-12), 1.5, 1e-11);
    EXPECT_THROW(tau(0.0), InvalidParameter);
}

TEST(SlabConfig, ValidateRejects) {
    EXPECT_THROW(make(1, 0.0, 1, 1).validate(), InvalidParameter);
    EXPECT_THROW(make(1, 1.0, 1, 1).validate(), InvalidParameter);
    EXPECT_THROW(make(0, 0.1, 1, 1).validate(), InvalidParameter);
    EXPECT_THROW(make(1, 0.1, 0.5, -1).validate(), InvalidParameter);
    EXPECT_THROW(make(1, 0.1, 1, 1, 1.0).validate(), InvalidParameter);
    // feasible pair but mu < 0 for this delta
    EXPECT_THROW(make(1, 0.9, 2.0, -2.0).validate(), InvalidParameter);
    EXPECT_NO_THROW(make(1, 0.1, 2.0, -1.0).validate());
}

TEST(K0, MatchesDefinition) {
    const SlabConfig c = make(1.0, 0.1, 1.0, 1.0);
    const double p = 2 * 0.01 + 0.01;
    EXPECT_NEAR(k0(c), std::log(1.0 / p) / 2.0, 1e-14);
    EXPECT_NEAR(k0(c), 1.75327895, 1e-8);
}

TEST(K0, TinyDeltaStaysFinite) {
    const SlabConfig c = make(2.0, 1e-200, 0.5, 1.0);
    // p ~ delta^1.5 underflows; log p does not.
    const double expect = -(std::log(1e-200) + std::log(2e-200 + std::pow(1e-200, 0.5))) / 4.0;
    EXPECT_NEAR(k0(c), expect, 1e-12 * expect);
}

TEST(K0, BoundaryAndAbove) {
    // beta = 1, lambda = 2: p = 4 delta^2 = 1 at delta = 1/2.
    EXPECT_EQ(k0(make(1.0, 0.5, 1.0, 2.0)), 0.0);
    try {
        k0(make(1.0, 0.6, 1.0, 2.0));
        FAIL() << "expected DeltaTooLarge";
    } catch (const DeltaTooLarge& e) {
        EXPECT_LT(e.k0(), 0.0);
    }
}

TEST(FactoredG, MatchesClosedFormAndLayerFunctions) {
    for (double beta : {0.3, 0.5, 1.0, 2.0}) {
        for (double lambda : {-1.0, 0.5, 1.0, 2.0}) {
            if (!feasible(beta, lambda)) continue;
            for (double delta : {1e-1, 1e-3, 1e-6}) {
                SlabConfig c = make(1.3, delta, beta, lambda);
                if (c.mu() < 0) continue;
                const auto o = as_oracle(c);
                for (double k : {0.01, 0.3, 1.0, 4.0, 9.0}) {
                    const LayerScalars ls = layer_scalars(c, k);
                    const std::complex<double> ref = o.g_closed(k);
                    const std::complex<double> got = ls.g_factored.value();
                    EXPECT_LT(std::abs(got - ref), 1e-11 * std::abs(ref)) << beta << ' ' << lambda << ' ' << delta << ' ' << k;
                    const std::complex<double> via_psi = o.g_from_psi(k);
                    EXPECT_LT(std::abs(via_psi - ref), 1e-9 * std::abs(ref));
                    // negative k uses |k|
                    EXPECT_LT(std::abs(layer_scalars(c, -k).g_factored.value() - got), 1e-15 * std::abs(got));
                }
            }
        }
    }
}

TEST(FactoredG, LogFormSurvivesExtremeK) {
    const SlabConfig c = make(1.0, 1e-12, 0.5, 1.0);
    // Far below k0 the closed form would overflow in e^{-w}; the log form must not.
    const LayerScalars ls = layer_scalars(c, 1e-8);
    EXPECT_TRUE(std::isfinite(ls.g_factored.log_mod_sq()));
    // Far above k0, |g| -> delta|1 + 0| = delta.
    const LayerScalars hi = layer_scalars(c, 400.0);
    EXPECT_NEAR(0.5 * hi.g_factored.log_mod_sq(), std::log(1e-12), 1e-10);
}

TEST(FactoredG, ModulusAtLeastDelta) {
    for (double delta : {1e-2, 1e-5, 1e-10}) {
        const SlabConfig c = make(1.0, delta, 0.5, 1.0);
        for (double k = 0.05; k < 3 * k0(c); k *= 1.3) {
            EXPECT_GE(layer_scalars(c, k).g_factored.log_mod_sq(), 2 * std::log(delta) - 1e-12);
        }
    }
}

TEST(LayerScalars, TransmissionAndReflection) {
    const SlabConfig c = make(1.0, 1e-3, 0.7, 1.2);
    const auto o = as_oracle(c);
    const LayerScalars ls = layer_scalars(c, 2.0);
    const auto chi = o.chi_c();
    EXPECT_LT(std::abs(ls.transmission - 2.0 * chi / (chi + 1.0)), 1e-12);
    EXPECT_LT(std::abs(ls.reflection - (chi - 1.0) / (chi + 1.0)), 1e-12);
    EXPECT_LT(std::abs(ls.reflection - o.reflection()), 1e-10);
    EXPECT_LT(std::abs(ls.chi_m - o.chi_m()), 1e-15);
}

TEST(LowerBoundG, HoldsOnGrid) {
    for (double beta : {0.5, 1.0, 2.0}) {
        for (double delta : {1e-2, 1e-6, 1e-12}) {
            const SlabConfig c = make(1.0, delta, beta, 1.0);
            const double dpm = c.delta_plus_mu();
            for (double k = 0.01; k < 40; k *= 1.2) {
                const double lhs = layer_scalars(c, k).g_factored.log_mod_sq();
                const double rhs = std::log(8 * (1 + delta * delta)) - 2 * std::log(dpm) - 4 * k * c.a;
                EXPECT_GE(lhs, rhs - 1e-12);
            }
        }
    }
}

TEST(Thresholds, DeltaZeroAndMu) {
    const auto t = admissible_delta_thresholds(0.5, 1.0);
    // mu >= 0 always for lambda > 0; p(delta) < 1 up to delta_0.
    EXPECT_GT(t.delta_mu, 0.99);
    const double p0 = std::exp(make(1, t.delta_0, 0.5, 1.0).log_p());
    EXPECT_NEAR(p0, 1.0, 1e-9);
    const auto neg = admissible_delta_thresholds(2.0, -1.0);
    // mu = delta - delta^2 stays nonnegative up to 1
    EXPECT_GT(neg.delta_mu, 0.999);
}

TEST(Thresholds, DeltaGSeparatesBracket) {
    const double C1 = 26.0;
    const double dg = delta_g(0.5, 1.0, C1);
    EXPECT_NEAR(dg, 0.1788, 5e-4);
    auto worst = [&](double delta) {
        const SlabConfig c = make(1.0, delta, 0.5, 1.0);
        double m = 0.0;
        const double kk = k0(c);
        for (int i = 0; i <= 400; ++i) {
            const double k = kk + i * 0.01;
            m = std::max(m, std::exp(layer_scalars(c, k).g_factored.log_mod_sq()) / (delta * delta));
        }
        return m;
    };
    EXPECT_LE(worst(0.999 * dg), C1 * (1 + 1e-9));
    EXPECT_LE(worst(0.5 * dg), C1);
    // The threshold sits where the sufficient bracket reaches C1.
    const double db = std::pow(dg, 0.5);
    const double bracket = 25 + 2 * db * dg + 4 * dg * dg + db * db * (4 + dg * dg);
    EXPECT_NEAR(bracket, C1, 1e-9);
}

TEST(Thresholds, DeltaLCriterion) {
    const double dl = delta_L(0.5, 1.0, 0.25, 0.5);
    EXPECT_NEAR(dl, 0.1119, 5e-4);
    const SlabConfig c = make(1.0, dl, 0.5, 1.0);
    EXPECT_NEAR(std::pow(std::exp(c.log_p()), 0.25), 0.5, 1e-9);
}

TEST(Thresholds, PsiMinusEqualsMu) {
    for (double beta : {0.3, 1.0, 2.0}) {
        for (double lambda : {0.5, 2.0}) {
            EXPECT_EQ(delta_psi_minus(beta, lambda), admissible_delta_thresholds(beta, lambda).delta_mu);
        }
    }
}
