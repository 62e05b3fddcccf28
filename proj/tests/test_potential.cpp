#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "calr/potential.hpp"
#include "calr/verify.hpp"
#include "oracles.hpp"

using namespace calr;

namespace {

SlabConfig slab(double a, double delta, double beta = 0.5, double lambda = 1.0) {
    SlabConfig c;
    c.a = a;
    c.delta = delta;
    c.beta = beta;
    c.lambda = lambda;
    c.xi = 0.25 * a;
    return c;
}

SourcePtr rect() { return std::make_shared<RectangleSource>(6, 6, 1, 1, 1.0); }

}  // namespace

TEST(Potential, CoreCoefficientMatchesLayerFunctions) {
    const auto src = rect();
    const SlabConfig c = slab(1.0, 1e-3);
    const oracle::Slab o{1.0, 1e-3, 0.5, 1.0, 0.25};
    const oracle::Rect r{6, 6, 1, 1, 1.0};
    const FourierPotential pot(src, c);
    for (double k : {0.2, 1.0, 3.0}) {
        // A_k = I_k / (e^{-|k|a}(|k| psi+ + psi-))
        const std::complex<double> I = r.I_scaled_numeric(k) * std::exp(-k * r.d0());
        const std::complex<double> A = I / (std::exp(-k) * (k * o.psi_plus(k) + o.psi_minus(k)));
        const std::complex<double> got = pot.coefficient_A(k).to_complex();
        EXPECT_LT(std::abs(got - A), 1e-8 * std::abs(A)) << k;
    }
}

TEST(Potential, SlabFormMatchesOracle) {
    const auto src = rect();
    const SlabConfig c = slab(1.2, 1e-4, 0.8, 1.5);
    const oracle::Slab o{1.2, 1e-4, 0.8, 1.5, 0.3};
    const FourierPotential pot(src, c);
    for (double k : {0.5, 2.0}) {
        const std::complex<double> I = transform_I(*src, k).to_complex();
        for (double x : {0.0, 0.4, 1.2}) {
            const auto [v, dv] = oracle::slab_potential(o, I, x, k);
            const auto s = pot.evaluate(Region::slab, x, k);
            EXPECT_LT(std::abs(s.value.to_complex() - v), 1e-10 * std::abs(v));
            EXPECT_LT(std::abs(s.dx.to_complex() - dv), 1e-10 * std::abs(dv));
        }
    }
}

TEST(Potential, InterfaceContinuityRandomized) {
    const auto src = rect();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double delta = std::pow(10.0, -1.0 - 13.0 * u(rng));
        const double k = (u(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -2.0 + 3.5 * u(rng));
        const FourierPotential pot(src, slab(1.0 + 2.0 * u(rng), delta));
        EXPECT_LE(continuity_defect(pot, k).max(), 1e-9) << delta << ' ' << k;
    }
}

TEST(Potential, MatrixOdeBySecondDifferenceOfValues) {
    // Independent of the analytic derivative: V'' from three values.
    const auto src = rect();
    const FourierPotential pot(src, slab(1.0, 1e-6));
    for (double k : {0.3, 1.0, 2.5}) {
        for (double x : {2.0, 4.0, 5.5, 6.5, 8.0}) {
            const double h = 1e-3;
            const TransformValue v = pot.value(Region::matrix, x, k);
            const std::complex<double> vp = (pot.value(Region::matrix, x + h, k) / v).to_complex();
            const std::complex<double> vm = (pot.value(Region::matrix, x - h, k) / v).to_complex();
            const std::complex<double> d2 = (vp - 2.0 + vm) / (h * h);
            const std::complex<double> rho = (TransformValue::from_complex(src->rho_hat(x, k)) / v).to_complex();
            const double scale = std::max({std::abs(d2), k * k, std::abs(rho)});
            EXPECT_LT(std::abs(d2 - k * k + rho) / scale, 1e-5) << k << ' ' << x;
            EXPECT_LT(matrix_ode_residual(pot, x, k), 1e-6);
        }
    }
}

TEST(Potential, DecaysAwayFromSlab) {
    const auto src = rect();
    const FourierPotential pot(src, slab(1.0, 1e-3));
    for (double k : {0.5, 2.0}) {
        const double far = pot.dx(Region::matrix, 40.0, k).log_magnitude;
        const double near = pot.dx(Region::matrix, 10.0, k).log_magnitude;
        EXPECT_NEAR(far - near, -30.0 * k, 1e-6);
    }
}

TEST(Potential, GaugeOnlyAtZero) {
    const auto src = rect();
    const FourierPotential p0(src, slab(1.0, 1e-3));
    const FourierPotential p1(src, slab(1.0, 1e-3), {2.0, -1.0});
    EXPECT_EQ(p0.value(Region::slab, 0.5, 0.7).to_complex(), p1.value(Region::slab, 0.5, 0.7).to_complex());
    EXPECT_EQ(p1.value(Region::core, -1.0, 0.0).to_complex(), std::complex<double>(2.0, -1.0));
    // at k = 0 the matrix potential is A0 plus the particular part, which vanishes
    // before the support
    EXPECT_EQ(p1.value(Region::matrix, 3.0, 0.0).to_complex(), std::complex<double>(2.0, -1.0));
}

TEST(Potential, RegionChecks) {
    const FourierPotential pot(rect(), slab(1.0, 1e-3));
    EXPECT_THROW(pot.value(Region::core, 0.1, 1.0), InvalidParameter);
    EXPECT_THROW(pot.value(Region::slab, 1.1, 1.0), InvalidParameter);
    EXPECT_THROW(pot.value(Region::matrix, 0.9, 1.0), InvalidParameter);
    EXPECT_EQ(region_of(slab(1.0, 1e-3), 1.0), Region::slab);
}

TEST(Potential, NegativeWavenumberConjugatesSource) {
    const auto src = rect();
    const SlabConfig c = slab(1.0, 1e-3);
    const FourierPotential pot(src, c);
    const LayerScalars ls = layer_scalars(c, 1.3);
    const std::complex<double> I = std::conj(transform_I(*src, 1.3).to_complex());
    const std::complex<double> expect = ls.transmission * I / (1.3 * ls.g) * std::exp(1.3 * -2.0);
    EXPECT_LT(std::abs(pot.value(Region::core, -2.0, -1.3).to_complex() - expect), 1e-12 * std::abs(expect));
}

TEST(Reconstruction, MatchesDirectInverseTransform) {
    const auto src = rect();
    const SlabConfig c = slab(1.0, 1e-2);
    const FourierPotential pot(src, c);
    const double x = -1.5, y = 4.0;
    auto f = [&](double k) {
        return pot.value(Region::core, x, k).to_complex() * std::polar(1.0, k * y) +
               pot.value(Region::core, x, -k).to_complex() * std::polar(1.0, -k * y);
    };
    const std::complex<double> ref = oracle::adaptive_simpson(f, 1e-12, 12.0, 1e-14) / (2 * std::numbers::pi);
    const auto field = reconstruct_real(src, c, {{x, y}}, 12.0);
    EXPECT_LT(std::abs(field.values[0] - ref), 1e-9 * std::abs(ref));
    EXPECT_LT(field.truncation[0], 1e-6 * std::abs(ref));
}

TEST(Reconstruction, CsvHeader) {
    const auto field = reconstruct_real(rect(), slab(1.0, 1e-2), {{-4.0, 0.0}}, 10.0);
    std::ostringstream os;
    write_csv(os, field);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "x,y,re_V,im_V,truncation_estimate");
}

TEST(Reconstruction, TailInfiniteInsideSupport) {
    EXPECT_TRUE(std::isinf(reconstruction_tail(*rect(), slab(1.0, 1e-2), 6.0, 10.0)));
}

TEST(Plancherel, CoreRoundTrip) {
    const auto p = plancherel(rect(), slab(1.0, 1e-2), -4.0);
    EXPECT_LT(p.rel_diff(), 1e-4) << p.real_space << " vs " << p.fourier_space;
}

TEST(Boundedness, FarFieldCertificates) {
    const auto src = rect();
    for (double delta : {1e-2, 1e-8}) {
        const SlabConfig c = slab(1.0, delta);
        const auto cert = boundedness_certificates(*src, c);
        std::vector<FieldPoint> pts = {{-3.5, 6.0}, {-8.0, -3.0}, {cert.matrix_threshold + 0.5, 6.0},
                                       {cert.matrix_threshold + 5.0, 20.0}};
        const auto f = reconstruct_real(src, c, pts, 40.0);
        EXPECT_LE(std::abs(f.values[0]), cert.C9);
        EXPECT_LE(std::abs(f.values[1]), cert.C9);
        EXPECT_LE(std::abs(f.values[2]), cert.C10);
        EXPECT_LE(std::abs(f.values[3]), cert.C10);
    }
}
