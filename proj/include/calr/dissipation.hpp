#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "calr/errors.hpp"
#include "calr/quadrature.hpp"
#include "calr/slab.hpp"
#include "calr/source.hpp"
#include "calr/transform_value.hpp"

namespace calr {

/// log(1 - e^{-x}) for x > 0.
inline double log1m_exp(double x) {
    return x > std::numbers::ln2 ? std::log1p(-std::exp(-x)) : std::log(-std::expm1(-x));
}

/// log(e^x - 1) for x > 0.
inline double log_expm1(double x) { return x > 30.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x)); }

/// log of (lambda^2 delta^{2 beta} + 4)/(2 delta + lambda delta^beta)^2.
inline double log_reflection_weight(const SlabConfig& cfg) {
    const double db = std::pow(cfg.delta, cfg.beta);
    return std::log(cfg.lambda * cfg.lambda * db * db + 4.0) - 2.0 * std::log(cfg.delta_plus_mu());
}

/// log L(k), L = (1 - e^{-2k xi}) + w e^{-4ka}(e^{2k xi} - 1).
inline double log_integrand_L(const SlabConfig& cfg, double k) {
    if (!(k > 0.0)) throw InvalidParameter("L needs k > 0");
    const double first = log1m_exp(2.0 * k * cfg.xi);
    const double second = log_reflection_weight(cfg) - 4.0 * k * cfg.a + log_expm1(2.0 * k * cfg.xi);
    return log_add_exp(first, second);
}

inline double integrand_L(const SlabConfig& cfg, double k) { return std::exp(log_integrand_L(cfg, k)); }

/// F(k) = delta |I_k|^2 e^{2ka} L / (pi k |g|^2), assembled in the log domain as
///   log(delta/(pi k)) + 2 log|I_k e^{k d0}| - 2k(d0 - a) - log|g|^2 + log L.
inline TransformValue integrand_F(const ChargeDensity& src, const SlabConfig& cfg, double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw InvalidParameter("F needs finite k > 0");
    const TransformValue It = transform_I_shifted(src, k);
    if (It.is_zero()) return TransformValue::zero();
    const SupportBox b = src.support();
    const LayerScalars ls = layer_scalars(cfg, k);
    const double lf = std::log(cfg.delta) - std::log(std::numbers::pi) - std::log(k) +
                      2.0 * It.log_magnitude - 2.0 * k * (b.d0 - cfg.a) - ls.g_factored.log_mod_sq() +
                      log_integrand_L(cfg, k);
    return TransformValue::from_log(lf);
}

// ---------------------------------------------------------------------------

namespace detail {

struct LogIntegral {
    double value = 0.0;
    double abs_error = 0.0;
    std::size_t panels = 0;
    bool converged = true;
};

/// Integral of exp(logf) over the given breaks, with the integrand rescaled by
/// its largest sampled value so that nothing underflows on the way.
template <class LogF>
LogIntegral integrate_log(LogF&& logf, const std::vector<double>& breaks, double rel_tol,
                          std::size_t max_panels) {
    LogIntegral out;
    if (breaks.size() < 2) return out;
    double scale = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        for (double t : {0.25, 0.5, 0.75}) {
            const double k = breaks[i] + t * (breaks[i + 1] - breaks[i]);
            if (k > 0.0) scale = std::max(scale, logf(k));
        }
    }
    if (!std::isfinite(scale)) return out;
    auto f = [&](double k) {
        if (!(k > 0.0)) return 0.0;
        const double v = logf(k);
        return std::exp(v - scale);
    };
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 0.0;
    opt.max_panels = max_panels;
    const auto res = quad::integrate<double>(f, std::span<const double>(breaks), opt);
    const double m = std::exp(scale);
    out.value = res.value * m;
    out.abs_error = res.abs_error * m;
    out.panels = res.panels;
    out.converged = res.converged;
    return out;
}

/// Length over which |I_k| oscillates: zeros of the rectangle transform sit at
/// multiples of 2 pi/h, those of the circle envelope at multiples of 2 pi/R.
inline double oscillation_period(const ChargeDensity& src) {
    const SupportBox b = src.support();
    return 2.0 * std::numbers::pi / (0.5 * (b.h1 - b.h0));
}

inline std::vector<double> aligned_breaks(double lo, double hi, double period, std::vector<double> extra) {
    std::vector<double> b;
    b.push_back(lo);
    const double first = std::floor(lo / period) + 1.0;
    for (double n = first; n * period < hi; n += 1.0) b.push_back(n * period);
    b.push_back(hi);
    for (double e : extra) {
        if (e > lo && e < hi) b.push_back(e);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

}  // namespace detail

struct DissipationOptions {
    double tol = 1e-8;                 ///< relative tolerance on the total
    std::size_t max_panels = 1u << 18;
    double k_max = 0.0;                ///< fixed truncation; 0 picks it from the tail bound
    cplx A0 = 0.0;                     ///< gauge constant; only affects the k = 0 point
};

struct DissipationResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    double tail_bound = 0.0;
    double k_max_used = 0.0;
    std::size_t panel_count = 0;
    bool warning = false;
    std::string message;
};

/// Analytic bound on the integral of F over k > K. Uses |I_k|^2 <= (d1-d0)||rho||^2 e^{-2k d0},
/// |g|^2 >= delta^2 and L <= 1 + w e^{-2K(2a - xi)} for k >= K.
inline double dissipation_tail_bound(const ChargeDensity& src, const SlabConfig& cfg, double K) {
    const SupportBox b = src.support();
    const double c = b.d0 - cfg.a;
    if (!(c > 0.0) || !(K > 0.0)) return std::numeric_limits<double>::infinity();
    const double spread = (b.d1 - b.d0) * src.l2_norm_squared();
    const double lsup = 1.0 + std::exp(log_reflection_weight(cfg) - 2.0 * K * (2.0 * cfg.a - cfg.xi));
    return spread * lsup / (std::numbers::pi * cfg.delta) * std::exp(-2.0 * c * K) / (2.0 * c * K);
}

/// Power dissipated in the strip a - xi < x < a:
///   E_xi(delta) = integral over k > 0 of F(k) dk.
inline DissipationResult dissipation(const ChargeDensity& src, const SlabConfig& cfg,
                                     const DissipationOptions& opt = {}) {
    cfg.validate();
    const SupportBox b = src.support();
    if (!(b.d0 > cfg.a)) throw InvalidParameter("source must lie beyond the slab (d0 > a)");
    DissipationResult out;
    if (src.l2_norm_squared() == 0.0) return out;

    const double c = b.d0 - cfg.a;
    double kr = 0.0;
    try {
        kr = k0(cfg);
    } catch (const DeltaTooLarge&) {
        kr = 0.0;
    }
    const double period = detail::oscillation_period(src);
    auto logF = [&](double k) { return integrand_F(src, cfg, k).log_magnitude; };

    // Initial truncation: past the resonance plus enough decay lengths that the
    // bound is negligible relative to the integrand near its peak.
    double K = opt.k_max > 0.0 ? opt.k_max : std::max({2.0 * kr, kr + 40.0 / c, period});
    auto breaks = detail::aligned_breaks(0.0, K, period, {kr});
    auto part = detail::integrate_log(logF, breaks, 0.5 * opt.tol, opt.max_panels);
    double value = part.value;
    double err = part.abs_error;
    std::size_t panels = part.panels;
    bool converged = part.converged;

    if (opt.k_max <= 0.0) {
        for (int iter = 0; iter < 60; ++iter) {
            const double tail = dissipation_tail_bound(src, cfg, K);
            if (tail <= 0.01 * opt.tol * value || value == 0.0) break;
            // Aim directly for the K where the bound meets the target.
            const double target = 0.01 * opt.tol * std::max(value, 1e-300);
            const double spread = (b.d1 - b.d0) * src.l2_norm_squared();
            const double need = std::log(spread * 2.0 / (std::numbers::pi * cfg.delta * target));
            double K_new = std::max(K + period, need / (2.0 * c));
            K_new = std::min(K_new, K * 4.0 + 10.0 * period);
            auto more = detail::integrate_log(logF, detail::aligned_breaks(K, K_new, period, {}),
                                              0.5 * opt.tol, opt.max_panels);
            value += more.value;
            err += more.abs_error;
            panels += more.panels;
            converged = converged && more.converged;
            K = K_new;
        }
    }
    out.value = value;
    out.abs_error_estimate = err;
    out.tail_bound = dissipation_tail_bound(src, cfg, K);
    out.k_max_used = K;
    out.panel_count = panels;
    if (!converged || err + out.tail_bound > opt.tol * value) {
        out.warning = true;
        out.message = "tolerance not reached: error " + std::to_string(err) + ", tail " +
                      std::to_string(out.tail_bound) + ", value " + std::to_string(value);
    }
    return out;
}

inline DissipationResult dissipation(const ChargeDensity& src, const SlabConfig& cfg, double tol) {
    DissipationOptions opt;
    opt.tol = tol;
    return dissipation(src, cfg, opt);
}

struct LowerBoundTail {
    double tail_integral = 0.0;  ///< integral of F over k >= k0
    double closed_bound = 0.0;   ///< (C_L/(pi C1 delta)) * integral over k >= k0 of |I_k|^2 e^{2ka}/k
    double k0 = 0.0;
};

/// Both lower bounds on E_xi obtained by discarding k < k0. Requires delta below
/// delta_0, delta_g(C1) and delta_L(C_L).
inline LowerBoundTail dissipation_lower_bound_tail(const ChargeDensity& src, const SlabConfig& cfg,
                                                   double C1 = 26.0, double C_L = 0.5, double tol = 1e-10) {
    cfg.validate();
    const auto th = admissible_delta_thresholds(cfg.beta, cfg.lambda);
    const double limit = std::min({th.delta_0, delta_g(cfg.beta, cfg.lambda, C1),
                                   delta_L(cfg.beta, cfg.lambda, cfg.xi / cfg.a, C_L)});
    if (cfg.delta > limit) throw NotApplicable("delta is above the lower-bound thresholds");
    const SupportBox b = src.support();
    if (!(b.d0 > cfg.a)) throw InvalidParameter("source must lie beyond the slab (d0 > a)");
    LowerBoundTail out;
    out.k0 = k0(cfg);
    if (src.l2_norm_squared() == 0.0) return out;
    const double c = b.d0 - cfg.a;
    const double period = detail::oscillation_period(src);
    const double K = out.k0 + std::max(60.0 / c, period);
    const auto breaks = detail::aligned_breaks(out.k0, K, period, {});
    auto logF = [&](double k) { return integrand_F(src, cfg, k).log_magnitude; };
    auto logG = [&](double k) {
        const TransformValue It = transform_I_shifted(src, k);
        if (It.is_zero()) return -std::numeric_limits<double>::infinity();
        return 2.0 * It.log_magnitude - 2.0 * k * c - std::log(k);
    };
    out.tail_integral = detail::integrate_log(logF, breaks, tol, 1u << 18).value;
    out.closed_bound = C_L / (std::numbers::pi * C1 * cfg.delta) *
                       detail::integrate_log(logG, breaks, tol, 1u << 18).value;
    // Stopping at K only lowers both integrals, so they stay lower bounds.
    return out;
}

}  // namespace calr
