#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "calr/bounds.hpp"
#include "calr/dissipation.hpp"
#include "calr/potential.hpp"
#include "calr/quadrature.hpp"
#include "calr/run_config.hpp"
#include "json.hpp"

namespace calr {

// ---------------------------------------------------------------------------
// Brute-force transforms straight from rho(x, y)

/// integral of rho(x, y) e^{-iky} dy by adaptive quadrature over the support box,
/// split at y_split (the rectangle's charge flips sign there).
inline cplx brute_force_rho_hat(const ChargeDensity& src, double x, double k, double y_split) {
    const SupportBox b = src.support();
    std::vector<double> br = {b.h0, b.h1};
    if (y_split > b.h0 && y_split < b.h1) br.insert(br.begin() + 1, y_split);
    quad::Options opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 1e-300;
    auto f = [&](double y) { return src.evaluate(x, y) * std::polar(1.0, -k * y); };
    const double span = b.h1 - b.h0;
    std::vector<double> fine;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        auto seg = quad::uniform_breaks(br[i], br[i + 1], std::max(span / 64.0, 1.0 / (1.0 + std::abs(k))));
        fine.insert(fine.end(), seg.begin() + (fine.empty() ? 0 : 1), seg.end());
    }
    return quad::integrate<cplx>(f, fine, opt).value;
}

/// I_k = integral of rho_hat(s, k) e^{-|k| s} ds, with the inner transform done by brute force.
inline cplx brute_force_I(const ChargeDensity& src, double k, double y_split) {
    const SupportBox b = src.support();
    quad::Options opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-300;
    auto f = [&](double s) { return brute_force_rho_hat(src, s, k, y_split) * std::exp(-std::abs(k) * (s - b.d0)); };
    return quad::integrate<cplx>(f, quad::uniform_breaks(b.d0, b.d1, (b.d1 - b.d0) / 4.0), opt).value *
           std::exp(-std::abs(k) * b.d0);
}

// ---------------------------------------------------------------------------
// Interface and ODE checks on the Fourier side

struct ContinuityDefect {
    double value_at_0 = 0.0;
    double flux_at_0 = 0.0;
    double value_at_a = 0.0;
    double flux_at_a = 0.0;
    double max() const { return std::max({value_at_0, flux_at_0, value_at_a, flux_at_a}); }
};

/// Relative jumps of V_hat and eps dV_hat/dx across x = 0 and x = a.
inline ContinuityDefect continuity_defect(const FourierPotential& pot, double k) {
    const SlabConfig& cfg = pot.slab();
    const DielectricProfile e = cfg.profile();
    const auto c0 = pot.evaluate(Region::core, 0.0, k);
    const auto s0 = pot.evaluate(Region::slab, 0.0, k);
    const auto sa = pot.evaluate(Region::slab, cfg.a, k);
    const auto ma = pot.evaluate(Region::matrix, cfg.a, k);
    ContinuityDefect d;
    d.value_at_0 = relative_difference(c0.value, s0.value);
    d.flux_at_0 = relative_difference(c0.dx * e.eps_c, s0.dx * e.eps_s);
    d.value_at_a = relative_difference(sa.value, ma.value);
    d.flux_at_a = relative_difference(sa.dx * e.eps_s, ma.dx * e.eps_m);
    return d;
}

/// |V'' - k^2 V + rho_hat| relative to the largest of the three terms, in the
/// matrix region. V'' is a central difference of the analytic derivative.
inline double matrix_ode_residual(const FourierPotential& pot, double x, double k) {
    const double h = 1e-5 * std::min(1.0, 1.0 / std::max(std::abs(k), 1e-300));
    const TransformValue v = pot.value(Region::matrix, x, k);
    if (v.is_zero()) return 0.0;
    const cplx dp = (pot.dx(Region::matrix, x + h, k) / v).to_complex();
    const cplx dm = (pot.dx(Region::matrix, x - h, k) / v).to_complex();
    const cplx d2 = (dp - dm) / (2.0 * h);
    const cplx kv = k * k;
    const cplx rho = (TransformValue::from_complex(pot.source().rho_hat(x, k)) / v).to_complex();
    const double scale = std::max({std::abs(d2), std::abs(kv), std::abs(rho)});
    return std::abs(d2 - kv + rho) / scale;
}

// ---------------------------------------------------------------------------
// Plancherel round trip in the core

struct PlancherelResult {
    double real_space = 0.0;
    double fourier_space = 0.0;
    double tail = 0.0;  ///< analytic estimate of the real-space mass beyond |y - yc| > Y
    double rel_diff() const { return std::abs(real_space - fourier_space) / fourier_space; }
};

/// Compares the integral of |V(x, y)|^2 over y (via real-space reconstruction)
/// with (1/2pi) times the integral of |V_hat(x, k)|^2 over k, for x < 0.
///
/// V_hat jumps at k = 0 (limits c+ and c-), so V decays like i(c+ - c-)/(2 pi y);
/// the real-space integral is cut at |y - yc| = Y and that 1/y^2 tail added.
inline PlancherelResult plancherel(SourcePtr src, const SlabConfig& cfg, double x, double Y = 400.0) {
    if (!(x < 0.0)) throw InvalidParameter("plancherel check is for the core region x < 0");
    const FourierPotential pot(src, cfg);
    const SupportBox b = src->support();
    const double c = b.d0 - x - 2.0 * cfg.a;
    if (!(c > 0.0)) throw InvalidParameter("V_hat does not decay at this x");
    const double K = 60.0 / c;

    PlancherelResult out;
    quad::Options opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-300;
    auto fk = [&](double k) {
        if (k == 0.0) return 0.0;
        return std::norm(pot.value(Region::core, x, k).to_complex()) +
               std::norm(pot.value(Region::core, x, -k).to_complex());
    };
    out.fourier_space =
        quad::integrate<double>(fk, quad::uniform_breaks(0.0, K, 1.0 / c), opt).value / (2.0 * std::numbers::pi);

    const double yc = 0.5 * (b.h0 + b.h1);
    auto fy = [&](double y) {
        const auto field = reconstruct_real(src, cfg, {{x, y}}, K, 1e-10);
        return std::norm(field.values.front());
    };
    std::vector<double> br;
    for (double s : {-1.0, 1.0}) {
        for (double r = 1.0; r < Y; r *= 2.0) br.push_back(yc + s * r);
        br.push_back(yc + s * Y);
    }
    br.push_back(yc);
    std::sort(br.begin(), br.end());
    quad::Options yopt;
    yopt.rel_tol = 1e-8;
    yopt.abs_tol = 1e-300;
    out.real_space = quad::integrate<double>(fy, br, yopt).value;

    const double k_small = 1e-9;
    const cplx cp = pot.value(Region::core, x, k_small).to_complex();
    const cplx cm = pot.value(Region::core, x, -k_small).to_complex();
    const double amp = std::norm(cp - cm) / (4.0 * std::numbers::pi * std::numbers::pi);
    // integral of 1/(y-yc)^2 beyond distance Y on both sides, taken about the Fourier origin
    out.tail = amp * (1.0 / (Y + yc) + 1.0 / (Y - yc));
    out.real_space += out.tail;
    return out;
}

// ---------------------------------------------------------------------------
// Verification suite

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
};

namespace detail {

inline std::string g3(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace detail

/// Runs the oracle, interface, Plancherel, lemma and sandwich checks for a
/// configuration. The transform oracle always uses the configured rectangle
/// geometry; with mutate = q_sign its closed form is built with the opposite charge.
inline VerifyReport run_verify(const RunConfig& c) {
    validate(c);
    VerifyReport rep;
    const SourcePtr src = make_source(c);
    const double beta = *std::min_element(c.beta.begin(), c.beta.end());
    using detail::g3;

    {
        const RectangleSource truth(c.x0, c.y0, c.d, c.h, c.Q);
        const RectangleSource closed(c.x0, c.y0, c.d, c.h, c.mutate == "q_sign" ? -c.Q : c.Q);
        double worst = 0.0;
        for (int i = 0; i < 8; ++i) {
            const double k = 0.05 * std::pow(1000.0, i / 7.0);
            const TransformValue ref = TransformValue::from_complex(brute_force_I(truth, k, c.y0));
            worst = std::max(worst, relative_difference(transform_I(closed, k), ref));
            const cplx rh = brute_force_rho_hat(truth, c.x0, k, c.y0);
            worst = std::max(worst, relative_difference(TransformValue::from_complex(closed.rho_hat(c.x0, k)),
                                                        TransformValue::from_complex(rh)));
        }
        rep.checks.push_back({"transform_oracle", worst <= 1e-8, "max relative error " + g3(worst)});
    }

    const SlabConfig base = slab_for(c, *src, beta, 1e-2);
    {
        double worst_c = 0.0, worst_r = 0.0;
        detail::SampleRng rng(c.seed, 101, 0);
        const SupportBox b = src->support();
        for (int i = 0; i < 20; ++i) {
            const double delta = std::pow(10.0, -2.0 - 10.0 * rng.uniform());
            const double k = 0.05 + 10.0 * rng.uniform();
            const FourierPotential pot(src, base.with_delta(delta));
            worst_c = std::max(worst_c, continuity_defect(pot, k).max());
            // Sample the matrix away from the interface and the support edges.
            const double gap = b.d0 - base.a;
            const double x = base.a + gap * (0.1 + 0.8 * rng.uniform());
            worst_r = std::max(worst_r, matrix_ode_residual(pot, x, k));
        }
        rep.checks.push_back({"interface_continuity", worst_c <= 1e-9, "max relative jump " + g3(worst_c)});
        rep.checks.push_back({"matrix_ode_residual", worst_r <= 1e-6, "max relative residual " + g3(worst_r)});
    }

    {
        const auto p = plancherel(src, base.with_delta(1e-2), -4.0 * base.a);
        rep.checks.push_back({"plancherel", p.rel_diff() <= 1e-4,
                              "real " + g3(p.real_space) + ", fourier " + g3(p.fourier_space) + ", rel " +
                                  g3(p.rel_diff())});
    }

    {
        SamplePlan plan;
        plan.samples = c.lemma_samples;
        plan.seed = c.seed;
        plan.workers = c.workers;
        const auto lr = lemma_suite(*src, base, plan);
        for (const auto& l : lr.lemmas) {
            rep.checks.push_back({"lemma:" + l.name, l.passed(),
                                  std::to_string(l.violations) + " violations, min margin " + g3(l.min_margin)});
        }
    }

    {
        bool ok = true;
        std::string detail;
        for (double delta : {1e-4, 1e-8}) {
            const SlabConfig cfg = base.with_delta(delta);
            const double E = dissipation(*src, cfg, c.tol).value;
            detail += "E(" + g3(delta) + ")=" + g3(E);
            try {
                const auto lb = dissipation_lower_bound_tail(*src, cfg);
                ok = ok && lb.tail_integral <= E * (1.0 + 1e-8) && lb.closed_bound <= lb.tail_integral * (1.0 + 1e-8);
                detail += " lower " + g3(lb.closed_bound);
            } catch (const NotApplicable&) {
            }
            try {
                const auto ch = upper_bound_chain(*src, cfg, ChainMode::per_term);
                ok = ok && E <= ch.sum * (1.0 + 1e-8);
                detail += " upper " + g3(ch.sum);
            } catch (const NotApplicable&) {
            }
            detail += "; ";
        }
        rep.checks.push_back({"sandwich", ok, detail});
    }
    return rep;
}

inline nlohmann::ordered_json to_json(const VerifyReport& r) {
    nlohmann::ordered_json j;
    j["passed"] = r.passed();
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return j;
}

inline void write_text(std::ostream& os, const VerifyReport& r) {
    for (const auto& c : r.checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    os << (r.passed() ? "all checks passed" : "some checks failed") << '\n';
}

}  // namespace calr
