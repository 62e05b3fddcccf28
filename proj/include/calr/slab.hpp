#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "calr/errors.hpp"
#include "calr/roots.hpp"
#include "calr/transform_value.hpp"

namespace calr {

using cplx = std::complex<double>;

/// Feasibility rule for the loss exponent and coefficient.
inline bool feasible(double beta, double lambda) {
    if (!(beta > 0.0)) throw InvalidParameter("beta must be positive");
    if (beta < 1.0) return lambda > 0.0;
    if (beta == 1.0) return lambda >= -1.0;
    return lambda != 0.0;
}

/// Critical-distance factor: sources closer than tau(beta)*a resonate.
inline double tau(double beta) {
    if (!(beta > 0.0)) throw InvalidParameter("beta must be positive");
    return beta < 1.0 ? (beta + 2.0) / (beta + 1.0) : 1.5;
}

struct DielectricProfile {
    cplx eps_c;
    cplx eps_s;
    cplx eps_m;
};

/// Slab of thickness a occupying 0 <= x <= a, loss delta in the slab and
/// mu = delta + lambda*delta^beta in the core x < 0. The strip a-xi < x < a is
/// where dissipation is measured.
struct SlabConfig {
    double a = 1.0;
    double delta = 1e-3;
    double beta = 1.0;
    double lambda = 1.0;
    double xi = 0.25;

    double mu() const { return delta + lambda * std::pow(delta, beta); }

    /// 2*delta + lambda*delta^beta, i.e. delta + mu.
    double delta_plus_mu() const { return 2.0 * delta + lambda * std::pow(delta, beta); }

    /// log(delta*(delta+mu)) = log(2 delta^2 + lambda delta^(beta+1)), computed
    /// without forming the product so it stays finite for tiny delta.
    double log_p() const {
        const double s = delta_plus_mu();
        if (!(s > 0.0)) throw InvalidParameter("2*delta + lambda*delta^beta must be positive");
        return std::log(delta) + std::log(s);
    }

    DielectricProfile profile() const {
        return {cplx(1.0, mu()), cplx(-1.0, delta), cplx(1.0, 0.0)};
    }

    SlabConfig with_delta(double d) const {
        SlabConfig c = *this;
        c.delta = d;
        return c;
    }

    /// Throws InvalidParameter naming the first violated invariant.
    void validate() const {
        if (!(a > 0.0) || !std::isfinite(a)) throw InvalidParameter("slab thickness a must be positive");
        if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("delta must lie in (0, 1)");
        if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidParameter("beta must be positive");
        if (!std::isfinite(lambda)) throw InvalidParameter("lambda must be finite");
        if (!(xi > 0.0 && xi < a)) throw InvalidParameter("xi must lie in (0, a)");
        if (!feasible(beta, lambda)) {
            throw InvalidParameter("lambda = " + std::to_string(lambda) +
                                   " is not feasible for beta = " + std::to_string(beta));
        }
        if (mu() < 0.0) throw InvalidParameter("mu(delta) is negative");
    }
};

/// Resonance wavenumber k0 = ln(1/(delta(delta+mu))) / (2a).
///
/// Returns 0 on the boundary delta(delta+mu) = 1 and throws DeltaTooLarge
/// (carrying the negative value) above it.
inline double k0(const SlabConfig& cfg) {
    if (cfg.mu() < 0.0) throw InvalidParameter("mu(delta) is negative");
    const double k = -cfg.log_p() / (2.0 * cfg.a);
    if (k < 0.0) throw DeltaTooLarge("delta is above the resonance threshold", k);
    return k;
}

/// g = i delta [1 + q e^w] with q = (4 + lambda delta^(beta+1)) - 2i(delta - lambda delta^beta)
/// and w = -2|k|a - log(delta(delta+mu)).
///
/// Near and beyond k0 the bracket is O(1); for small k, e^w is huge and only
/// its logarithm is used.
struct FactoredG {
    double delta = 0.0;
    cplx q;
    double w = 0.0;

    /// log |1 + q e^w|^2
    double log_bracket_sq() const {
        if (w <= 0.0) return std::log(std::norm(1.0 + q * std::exp(w)));
        return 2.0 * w + std::log(std::norm(q + std::exp(-w)));
    }

    double log_mod_sq() const { return 2.0 * std::log(delta) + log_bracket_sq(); }

    TransformValue log() const {
        cplx bracket_phase_part;
        double log_bracket;
        if (w <= 0.0) {
            bracket_phase_part = 1.0 + q * std::exp(w);
            log_bracket = std::log(std::abs(bracket_phase_part));
        } else {
            bracket_phase_part = q + std::exp(-w);
            log_bracket = w + std::log(std::abs(bracket_phase_part));
        }
        return TransformValue::from_log(0.0, 0.5 * std::numbers::pi) *
               TransformValue::from_log(std::log(delta) + log_bracket,
                                        std::arg(bracket_phase_part));
    }

    cplx value() const { return cplx(0.0, delta) * (1.0 + q * std::exp(w)); }
};

struct LayerScalars {
    cplx chi_c;
    cplx chi_m;
    cplx psi_plus;
    cplx psi_minus;
    cplx g;
    FactoredG g_factored;
    /// 2 chi_c / (chi_c + 1) = 2(delta + i)/(delta + mu)
    cplx transmission;
    /// (chi_c - 1)/(chi_c + 1) = (2i - lambda delta^beta)/(2 delta + lambda delta^beta)
    cplx reflection;
};

/// Layer-ratio scalars at wavenumber k; everything depends on |k| only.
/// psi_plus, psi_minus and g are formed directly and overflow for large |k|a;
/// use g_factored in the log domain.
inline LayerScalars layer_scalars(const SlabConfig& cfg, double k) {
    if (!std::isfinite(k)) throw InvalidParameter("wavenumber must be finite");
    if (cfg.mu() < 0.0) throw InvalidParameter("mu(delta) is negative");
    const double ak = std::abs(k);
    const DielectricProfile eps = cfg.profile();
    LayerScalars s;
    s.chi_c = eps.eps_s / eps.eps_c;
    s.chi_m = eps.eps_s / eps.eps_m;
    const cplx ep = std::exp(cplx(ak * cfg.a));
    const cplx em = std::exp(cplx(-ak * cfg.a));
    s.psi_plus = ((s.chi_c + 1.0) * ep + (s.chi_c - 1.0) * em) / (2.0 * s.chi_c);
    s.psi_minus = ak * s.chi_m * ((s.chi_c + 1.0) * ep - (s.chi_c - 1.0) * em) / (2.0 * s.chi_c);

    const double d = cfg.delta;
    const double db = std::pow(d, cfg.beta);
    const double dpm = cfg.delta_plus_mu();
    s.transmission = 2.0 * cplx(d, 1.0) / dpm;
    s.reflection = cplx(-cfg.lambda * db, 2.0) / dpm;

    s.g_factored.delta = d;
    s.g_factored.q = cplx(4.0 + cfg.lambda * db * d, -2.0 * (d - cfg.lambda * db));
    s.g_factored.w = -2.0 * ak * cfg.a - cfg.log_p();
    s.g = s.g_factored.value();
    return s;
}

struct DeltaThresholds {
    double delta_mu;
    double delta_0;
};

namespace detail {
inline constexpr double delta_cap = 1.0 - 1e-9;

inline double mu_of(double d, double beta, double lambda) {
    return d + lambda * std::pow(d, beta);
}
/// log(2 d^2 + lambda d^(beta+1)), -inf-free for tiny d; NaN when the sum is not positive.
inline double log_p_of(double d, double beta, double lambda) {
    const double s = 2.0 * d + lambda * std::pow(d, beta);
    if (!(s > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::log(d) + std::log(s);
}
inline void require_feasible(double beta, double lambda) {
    if (!feasible(beta, lambda)) throw InvalidParameter("infeasible (beta, lambda)");
}
}  // namespace detail

/// delta_mu: mu >= 0 on (0, delta_mu]. delta_0: additionally delta(delta+mu) < 1,
/// i.e. k0 > 0. Both are capped at 1 - 1e-9.
inline DeltaThresholds admissible_delta_thresholds(double beta, double lambda) {
    detail::require_feasible(beta, lambda);
    const double dmu = roots::largest_prefix(
        [&](double d) { return detail::mu_of(d, beta, lambda) >= 0.0; }, detail::delta_cap);
    const double d0 = roots::largest_prefix(
        [&](double d) {
            return detail::mu_of(d, beta, lambda) >= 0.0 && detail::log_p_of(d, beta, lambda) < 0.0;
        },
        dmu);
    return {dmu, d0};
}

/// Largest delta for which |g|^2 <= C1 delta^2 holds for every k >= k0, using
/// the bracket 25 + 2 lambda delta^(beta+1) + 4 delta^2 + lambda^2 delta^(2beta)(4 + delta^2).
inline double delta_g(double beta, double lambda, double C1 = 26.0) {
    detail::require_feasible(beta, lambda);
    if (!(C1 > 25.0)) throw InvalidParameter("C1 must exceed 25");
    return roots::largest_prefix(
        [&](double d) {
            const double db = std::pow(d, beta);
            const double bracket = 25.0 + 2.0 * lambda * db * d + 4.0 * d * d +
                                   lambda * lambda * db * db * (4.0 + d * d);
            return detail::mu_of(d, beta, lambda) >= 0.0 && bracket <= C1;
        },
        detail::delta_cap);
}

/// Largest delta for which L >= C_L holds for every k >= k0, i.e.
/// (delta(delta+mu))^(xi/a) <= 1 - C_L.
inline double delta_L(double beta, double lambda, double xi_over_a, double C_L = 0.5) {
    detail::require_feasible(beta, lambda);
    if (!(C_L > 0.0 && C_L < 1.0)) throw InvalidParameter("C_L must lie in (0, 1)");
    if (!(xi_over_a > 0.0 && xi_over_a < 1.0)) throw InvalidParameter("xi/a must lie in (0, 1)");
    return roots::largest_prefix(
        [&](double d) {
            const double lp = detail::log_p_of(d, beta, lambda);
            return detail::mu_of(d, beta, lambda) >= 0.0 && xi_over_a * lp <= std::log1p(-C_L);
        },
        detail::delta_cap);
}

/// Largest delta for which |psi+ - psi-/|k||^2 <= (5/2)(delta+mu)^2 e^{2|k|a}
/// for all k.
///
/// Dividing by e^{2|k|a} leaves |(chi_c+1)(1-chi_m) + (chi_c-1)(1+chi_m) t|^2 / (4|chi_c|^2)
/// with t = e^{-2|k|a} in (0, 1]. That is convex in t, so the endpoints decide.
inline double delta_psi_minus(double beta, double lambda) {
    detail::require_feasible(beta, lambda);
    return roots::largest_prefix(
        [&](double d) {
            const double mu = detail::mu_of(d, beta, lambda);
            if (mu < 0.0) return false;
            const cplx chi_c = cplx(-1.0, d) / cplx(1.0, mu);
            const cplx chi_m = cplx(-1.0, d);
            const cplx u = (chi_c + 1.0) * (1.0 - chi_m);
            const cplx v = (chi_c - 1.0) * (1.0 + chi_m);
            const double scale = 4.0 * std::norm(chi_c);
            const double worst = std::max(std::norm(u), std::norm(u + v)) / scale;
            return worst <= 2.5 * (d + mu) * (d + mu) * (1.0 + 1e-12);
        },
        detail::delta_cap);
}

}  // namespace calr
