#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace calr {

/// A complex number stored as (log|z|, arg z).
///
/// The Fourier-side quantities of the slab problem carry factors such as
/// e^{-2 k d0} and e^{+2 k a} that over- or underflow doubles long before the
/// product does. Keeping the magnitude in log form lets those factors be
/// combined symbolically; only the final observable is exponentiated.
/// A zero is represented by log_magnitude == -inf.
struct TransformValue {
    double log_magnitude = -std::numeric_limits<double>::infinity();
    double phase = 0.0;

    static TransformValue zero() { return {}; }

    static TransformValue from_complex(std::complex<double> z) {
        const double m = std::abs(z);
        if (m == 0.0) return zero();
        return {std::log(m), std::arg(z)};
    }

    static TransformValue from_real(double x) {
        if (x == 0.0) return zero();
        return {std::log(std::abs(x)), x < 0.0 ? std::numbers::pi : 0.0};
    }

    static TransformValue from_log(double log_mag, double phase = 0.0) {
        return {log_mag, phase};
    }

    bool is_zero() const { return log_magnitude == -std::numeric_limits<double>::infinity(); }

    /// Magnitude; underflows to 0 and overflows to inf like std::exp.
    double magnitude() const { return std::exp(log_magnitude); }

    std::complex<double> to_complex() const {
        if (is_zero()) return {0.0, 0.0};
        return std::polar(std::exp(log_magnitude), phase);
    }

    /// Multiplies by e^{s}.
    TransformValue scaled_exp(double s) const {
        if (is_zero()) return *this;
        return {log_magnitude + s, phase};
    }

    TransformValue conj() const { return {log_magnitude, -phase}; }

    friend TransformValue operator*(const TransformValue& x, const TransformValue& y) {
        if (x.is_zero() || y.is_zero()) return zero();
        return {x.log_magnitude + y.log_magnitude, wrap(x.phase + y.phase)};
    }

    friend TransformValue operator/(const TransformValue& x, const TransformValue& y) {
        if (x.is_zero()) return zero();
        return {x.log_magnitude - y.log_magnitude, wrap(x.phase - y.phase)};
    }

    friend TransformValue operator*(const TransformValue& x, std::complex<double> c) {
        return x * from_complex(c);
    }

    /// Sum evaluated relative to the larger magnitude.
    friend TransformValue operator+(const TransformValue& x, const TransformValue& y) {
        if (x.is_zero()) return y;
        if (y.is_zero()) return x;
        const TransformValue& big = x.log_magnitude >= y.log_magnitude ? x : y;
        const TransformValue& small = x.log_magnitude >= y.log_magnitude ? y : x;
        const std::complex<double> rel =
            std::polar(1.0, big.phase) +
            std::polar(std::exp(small.log_magnitude - big.log_magnitude), small.phase);
        const double m = std::abs(rel);
        if (m == 0.0) return zero();
        return {big.log_magnitude + std::log(m), std::arg(rel)};
    }

    friend TransformValue operator-(const TransformValue& x, const TransformValue& y) {
        if (y.is_zero()) return x;
        return x + TransformValue{y.log_magnitude, wrap(y.phase + std::numbers::pi)};
    }

    /// |x/y - 1|, a scale-free relative difference.
    friend double relative_difference(const TransformValue& x, const TransformValue& y) {
        if (x.is_zero() && y.is_zero()) return 0.0;
        if (x.is_zero() || y.is_zero()) return 1.0;
        const std::complex<double> ratio =
            std::polar(std::exp(x.log_magnitude - y.log_magnitude), x.phase - y.phase);
        return std::abs(ratio - 1.0);
    }

private:
    static double wrap(double p) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        if (p > std::numbers::pi || p <= -std::numbers::pi) {
            p = std::remainder(p, two_pi);
        }
        return p;
    }
};

/// log(e^x + e^y) without overflow.
inline double log_add_exp(double x, double y) {
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    if (x == ninf) return y;
    if (y == ninf) return x;
    const double hi = std::max(x, y);
    return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

}  // namespace calr
