#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "calr/errors.hpp"
#include "calr/quadrature.hpp"
#include "calr/transform_value.hpp"

namespace calr {

using cplx = std::complex<double>;

/// Bounding box of supp(rho): d0 <= x <= d1, h0 <= y <= h1.
struct SupportBox {
    double d0 = 0.0;
    double d1 = 0.0;
    double h0 = 0.0;
    double h1 = 0.0;
};

namespace detail {

/// Integral of e^{rate (s - shift)} over [lo, hi].
inline double exp_segment(double lo, double hi, double shift, double rate) {
    if (!(hi > lo)) return 0.0;
    const double len = hi - lo;
    if (rate == 0.0) return len;
    const double x = rate * len;
    // e^{rate(lo-shift)} * expm1(rate*len)/rate, with expm1(x)/x -> 1 for small x
    const double ratio = std::abs(x) < 1e-300 ? len : std::expm1(x) / rate;
    return std::exp(rate * (lo - shift)) * ratio;
}

/// Integral of (s - shift) over [lo, hi].
inline double linear_segment(double lo, double hi, double shift) {
    if (!(hi > lo)) return 0.0;
    return 0.5 * ((hi - shift) * (hi - shift) - (lo - shift) * (lo - shift));
}

/// (1 - e^{-i k w})/(i k) written as w e^{-i k w/2} sinc(k w/2) so k = 0 is exact.
inline cplx cell_transform(double k, double w) {
    const double t = 0.5 * k * w;
    const double sinc = std::abs(t) < 1e-8 ? 1.0 - t * t / 6.0 : std::sin(t) / t;
    return w * sinc * std::polar(1.0, -t);
}

}  // namespace detail

/// A real charge density with compact support in the half plane x > a.
///
/// Subclasses supply the partial Fourier transform
///   rho_hat(x, k) = integral of rho(x, y) e^{-i k y} dy
/// and the weighted x-moments of it that every boundary transform is built from.
class ChargeDensity {
public:
    virtual ~ChargeDensity() = default;

    virtual std::string kind() const = 0;
    virtual SupportBox support() const = 0;
    virtual double evaluate(double x, double y) const = 0;
    virtual cplx rho_hat(double x, double k) const = 0;

    /// Integral of rho over the plane.
    virtual double total_charge() const = 0;
    /// Integral of |rho|.
    virtual double absolute_charge() const = 0;
    /// Integral of rho^2.
    virtual double l2_norm_squared() const = 0;
    /// -integral of (x + i y) rho.
    virtual cplx moment_C0() const = 0;

    /// integral over [lo, hi] of rho_hat(s, k) e^{rate (s - shift)} ds for k >= 0.
    /// Callers pick shift so the exponent stays <= 0 on [lo, hi].
    virtual cplx moment_positive(double k, double lo, double hi, double shift,
                                 double rate) const = 0;

    /// integral over [lo, hi] of (s - shift) rho_hat(s, 0) ds.
    virtual cplx linear_moment_at_zero(double lo, double hi, double shift) const = 0;

    /// Support problems that cannot be expressed by the box (non-finite data, ...).
    virtual std::vector<std::string> intrinsic_issues() const { return {}; }

    /// moment_positive extended to k < 0 by rho_hat(x, -k) = conj(rho_hat(x, k)).
    cplx moment(double k, double lo, double hi, double shift, double rate) const {
        if (k >= 0.0) return moment_positive(k, lo, hi, shift, rate);
        return std::conj(moment_positive(-k, lo, hi, shift, rate));
    }
};

using SourcePtr = std::shared_ptr<const ChargeDensity>;

/// +Q on the upper half and -Q on the lower half of the box
/// [x0-d, x0+d] x [y0-h, y0+h].
class RectangleSource final : public ChargeDensity {
public:
    RectangleSource(double x0, double y0, double d, double h, double Q)
        : x0_(x0), y0_(y0), d_(d), h_(h), Q_(Q) {
        if (!(d > 0.0) || !(h > 0.0)) throw InvalidParameter("rectangle half-sizes must be positive");
        if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(Q) || !std::isfinite(d) ||
            !std::isfinite(h)) {
            throw InvalidParameter("rectangle parameters must be finite");
        }
    }

    double x0() const { return x0_; }
    double y0() const { return y0_; }
    double d() const { return d_; }
    double h() const { return h_; }
    double Q() const { return Q_; }

    std::string kind() const override { return "rectangle"; }
    SupportBox support() const override { return {x0_ - d_, x0_ + d_, y0_ - h_, y0_ + h_}; }

    double evaluate(double x, double y) const override {
        if (x < x0_ - d_ || x > x0_ + d_ || y < y0_ - h_ || y > y0_ + h_) return 0.0;
        if (y > y0_) return Q_;
        if (y < y0_) return -Q_;
        return 0.0;
    }

    /// -(4Q/k) [sin(y0 k) + i cos(y0 k)] sin^2(hk/2) inside the x-range.
    cplx rho_hat(double x, double k) const override {
        if (x < x0_ - d_ || x > x0_ + d_) return 0.0;
        return profile(k);
    }

    double total_charge() const override { return 0.0; }
    double absolute_charge() const override { return 4.0 * d_ * h_ * std::abs(Q_); }
    double l2_norm_squared() const override { return 4.0 * d_ * h_ * Q_ * Q_; }
    cplx moment_C0() const override { return cplx(0.0, -Q_ * 2.0 * d_ * h_ * h_); }

    cplx moment_positive(double k, double lo, double hi, double shift,
                         double rate) const override {
        const double l = std::max(lo, x0_ - d_);
        const double r = std::min(hi, x0_ + d_);
        if (!(r > l)) return 0.0;
        return profile(k) * detail::exp_segment(l, r, shift, rate);
    }

    cplx linear_moment_at_zero(double, double, double) const override { return 0.0; }

private:
    cplx profile(double k) const {
        if (k == 0.0) return 0.0;
        const double s = std::sin(0.5 * h_ * k);
        return -(4.0 * Q_ / k) * cplx(std::sin(y0_ * k), std::cos(y0_ * k)) * (s * s);
    }

    double x0_, y0_, d_, h_, Q_;
};

/// +Q on the upper half and -Q on the lower half of the disc of radius R
/// centred at (x0, y0).
class CircleSource final : public ChargeDensity {
public:
    CircleSource(double x0, double y0, double R, double Q) : x0_(x0), y0_(y0), R_(R), Q_(Q) {
        if (!(R > 0.0)) throw InvalidParameter("circle radius must be positive");
        if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(R) || !std::isfinite(Q)) {
            throw InvalidParameter("circle parameters must be finite");
        }
    }

    double x0() const { return x0_; }
    double y0() const { return y0_; }
    double R() const { return R_; }
    double Q() const { return Q_; }

    std::string kind() const override { return "circle"; }
    SupportBox support() const override { return {x0_ - R_, x0_ + R_, y0_ - R_, y0_ + R_}; }

    double evaluate(double x, double y) const override {
        const double dx = x - x0_;
        const double dy = y - y0_;
        if (dx * dx + dy * dy > R_ * R_) return 0.0;
        if (dy > 0.0) return Q_;
        if (dy < 0.0) return -Q_;
        return 0.0;
    }

    /// -(4Q i e^{-i k y0}/k) sin^2(k w/2) with w = sqrt(R^2 - (x-x0)^2).
    cplx rho_hat(double x, double k) const override {
        const double dx = x - x0_;
        if (std::abs(dx) > R_ || k == 0.0) return 0.0;
        const double w = std::sqrt(R_ * R_ - dx * dx);
        const double s = std::sin(0.5 * k * w);
        return prefactor(k) * (s * s);
    }

    double total_charge() const override { return 0.0; }
    double absolute_charge() const override { return std::numbers::pi * R_ * R_ * std::abs(Q_); }
    double l2_norm_squared() const override { return std::numbers::pi * R_ * R_ * Q_ * Q_; }
    cplx moment_C0() const override { return cplx(0.0, -4.0 / 3.0 * Q_ * R_ * R_ * R_); }

    /// Quadrature in theta with x = x0 + R sin(theta), which removes the
    /// square-root endpoint behaviour. Panels are no wider than pi/(kR + 1) so
    /// the sin^2 oscillation is resolved, and the range is trimmed where the
    /// exponential weight has dropped below e^{-50} of its maximum.
    cplx moment_positive(double k, double lo, double hi, double shift,
                         double rate) const override {
        if (k == 0.0 || Q_ == 0.0) return 0.0;
        double l = std::max(lo, x0_ - R_);
        double r = std::min(hi, x0_ + R_);
        if (!(r > l)) return 0.0;
        constexpr double cutoff = 50.0;
        if (rate < 0.0) r = std::min(r, l + cutoff / -rate);
        if (rate > 0.0) l = std::max(l, r - cutoff / rate);

        auto angle = [&](double x) { return std::asin(std::clamp((x - x0_) / R_, -1.0, 1.0)); };
        const double t0 = angle(l);
        const double t1 = angle(r);
        auto f = [&](double t) {
            const double c = std::cos(t);
            const double s = std::sin(0.5 * k * R_ * c);
            return s * s * R_ * c * std::exp(rate * (x0_ + R_ * std::sin(t) - shift));
        };
        const auto breaks = quad::uniform_breaks(t0, t1, std::numbers::pi / (k * R_ + 1.0));
        quad::Options opt;
        opt.rel_tol = 1e-13;
        opt.max_panels = 1u << 16;
        const auto res = quad::integrate<double>(f, breaks, opt);
        if (!res.converged && res.abs_error > 1e-10 * std::abs(res.value)) {
            throw IntegrationError("circle transform quadrature did not converge", res.value,
                                   res.abs_error);
        }
        return prefactor(k) * res.value;
    }

    cplx linear_moment_at_zero(double, double, double) const override { return 0.0; }

private:
    cplx prefactor(double k) const {
        return -4.0 * Q_ * cplx(0.0, 1.0) * std::polar(1.0, -k * y0_) / k;
    }

    double x0_, y0_, R_, Q_;
};

/// Cell-averaged density on a uniform grid. Row i covers
/// x in [x_origin + i dx, x_origin + (i+1) dx]; column j covers
/// y in [y_origin + j dy, y_origin + (j+1) dy].
class GridSource final : public ChargeDensity {
public:
    /// `values` holds nx rows of ny entries. A net charge no larger than
    /// 1e-9 of the absolute charge is removed by shifting the non-zero cells;
    /// anything larger is kept and reported by validate().
    GridSource(double x_origin, double y_origin, double dx, double dy, std::size_t nx,
               std::size_t ny, std::vector<double> values)
        : xo_(x_origin), yo_(y_origin), dx_(dx), dy_(dy), nx_(nx), ny_(ny),
          v_(std::move(values)) {
        if (!(dx > 0.0) || !(dy > 0.0)) throw InvalidParameter("grid cell sizes must be positive");
        if (nx == 0 || ny == 0) throw InvalidParameter("grid dimensions must be positive");
        if (v_.size() != nx * ny) throw InvalidParameter("grid value count does not match dimensions");
        if (!std::isfinite(xo_) || !std::isfinite(yo_)) throw InvalidParameter("grid origin must be finite");
        for (double x : v_) {
            if (!std::isfinite(x)) throw InvalidParameter("grid contains a non-finite value");
        }
        repair_net_charge();
        build_rows();
    }

    double x_origin() const { return xo_; }
    double y_origin() const { return yo_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    const std::vector<double>& values() const { return v_; }
    bool repaired() const { return repaired_; }

    std::string kind() const override { return "grid"; }

    SupportBox support() const override { return box_; }

    double evaluate(double x, double y) const override {
        const double fi = std::floor((x - xo_) / dx_);
        const double fj = std::floor((y - yo_) / dy_);
        if (fi < 0 || fj < 0 || fi >= static_cast<double>(nx_) || fj >= static_cast<double>(ny_)) {
            return 0.0;
        }
        return v_[static_cast<std::size_t>(fi) * ny_ + static_cast<std::size_t>(fj)];
    }

    cplx rho_hat(double x, double k) const override {
        const double fi = std::floor((x - xo_) / dx_);
        if (fi < 0 || fi >= static_cast<double>(nx_)) return 0.0;
        return row_transform(static_cast<std::size_t>(fi), k);
    }

    double total_charge() const override {
        double s = 0.0;
        for (double x : v_) s += x;
        return s * dx_ * dy_;
    }
    double absolute_charge() const override {
        double s = 0.0;
        for (double x : v_) s += std::abs(x);
        return s * dx_ * dy_;
    }
    double l2_norm_squared() const override {
        double s = 0.0;
        for (double x : v_) s += x * x;
        return s * dx_ * dy_;
    }
    cplx moment_C0() const override {
        double sx = 0.0;
        double sy = 0.0;
        for (std::size_t i = 0; i < nx_; ++i) {
            const double xl = xo_ + static_cast<double>(i) * dx_;
            const double xc = xl + 0.5 * dx_;
            for (std::size_t j = 0; j < ny_; ++j) {
                const double yc = yo_ + (static_cast<double>(j) + 0.5) * dy_;
                const double val = v_[i * ny_ + j];
                sx += val * xc;
                sy += val * yc;
            }
        }
        return -cplx(sx, sy) * dx_ * dy_;
    }

    cplx moment_positive(double k, double lo, double hi, double shift,
                         double rate) const override {
        cplx sum = 0.0;
        for (std::size_t i = row_lo_; i < row_hi_; ++i) {
            const double xl = xo_ + static_cast<double>(i) * dx_;
            const double l = std::max(lo, xl);
            const double r = std::min(hi, xl + dx_);
            if (!(r > l)) continue;
            const double w = detail::exp_segment(l, r, shift, rate);
            if (w == 0.0) continue;
            sum += row_transform(i, k) * w;
        }
        return sum;
    }

    cplx linear_moment_at_zero(double lo, double hi, double shift) const override {
        double sum = 0.0;
        for (std::size_t i = row_lo_; i < row_hi_; ++i) {
            const double xl = xo_ + static_cast<double>(i) * dx_;
            const double l = std::max(lo, xl);
            const double r = std::min(hi, xl + dx_);
            if (!(r > l)) continue;
            sum += row_charge_[i] * detail::linear_segment(l, r, shift);
        }
        return sum;
    }

    std::vector<std::string> intrinsic_issues() const override {
        std::vector<std::string> out;
        if (row_hi_ <= row_lo_) out.emplace_back("grid has no non-zero cells");
        return out;
    }

private:
    cplx row_transform(std::size_t i, double k) const {
        if (k == 0.0) return row_charge_[i];
        const cplx cell = detail::cell_transform(k, dy_);
        cplx s = 0.0;
        for (std::size_t j = 0; j < ny_; ++j) {
            const double val = v_[i * ny_ + j];
            if (val == 0.0) continue;
            s += val * std::polar(1.0, -k * (yo_ + static_cast<double>(j) * dy_));
        }
        return s * cell;
    }

    void repair_net_charge() {
        double net = 0.0;
        double abs = 0.0;
        std::size_t count = 0;
        for (double x : v_) {
            net += x;
            abs += std::abs(x);
            if (x != 0.0) ++count;
        }
        if (net == 0.0 || count == 0 || std::abs(net) > 1e-9 * abs) return;
        const double shift = net / static_cast<double>(count);
        for (double& x : v_) {
            if (x != 0.0) x -= shift;
        }
        repaired_ = true;
    }

    void build_rows() {
        row_charge_.assign(nx_, 0.0);
        std::size_t ilo = nx_, ihi = 0, jlo = ny_, jhi = 0;
        for (std::size_t i = 0; i < nx_; ++i) {
            for (std::size_t j = 0; j < ny_; ++j) {
                const double val = v_[i * ny_ + j];
                row_charge_[i] += val * dy_;
                if (val != 0.0) {
                    ilo = std::min(ilo, i);
                    ihi = std::max(ihi, i + 1);
                    jlo = std::min(jlo, j);
                    jhi = std::max(jhi, j + 1);
                }
            }
        }
        row_lo_ = ilo;
        row_hi_ = ihi;
        if (ihi > ilo) {
            box_ = {xo_ + static_cast<double>(ilo) * dx_, xo_ + static_cast<double>(ihi) * dx_,
                    yo_ + static_cast<double>(jlo) * dy_, yo_ + static_cast<double>(jhi) * dy_};
        } else {
            box_ = {xo_, xo_, yo_, yo_};
        }
    }

    double xo_, yo_, dx_, dy_;
    std::size_t nx_, ny_;
    std::vector<double> v_;
    std::vector<double> row_charge_;
    std::size_t row_lo_ = 0, row_hi_ = 0;
    SupportBox box_;
    bool repaired_ = false;
};

// ---------------------------------------------------------------------------
// Boundary transforms

/// I_k = integral of rho_hat(s, k) e^{-|k| s} ds.
inline TransformValue transform_I(const ChargeDensity& src, double k) {
    if (!std::isfinite(k)) throw InvalidParameter("wavenumber must be finite");
    const SupportBox b = src.support();
    const double ak = std::abs(k);
    const cplx shifted = src.moment(k, b.d0, b.d1, b.d0, -ak);
    return TransformValue::from_complex(shifted).scaled_exp(-ak * b.d0);
}

/// I_k e^{|k| d0}, which stays O(1/k^2) instead of underflowing.
inline TransformValue transform_I_shifted(const ChargeDensity& src, double k) {
    if (!std::isfinite(k)) throw InvalidParameter("wavenumber must be finite");
    const SupportBox b = src.support();
    return TransformValue::from_complex(src.moment(k, b.d0, b.d1, b.d0, -std::abs(k)));
}

/// J_k(x) = integral of rho_hat(s, k) e^{-|k|(x - s)} ds for x > d1.
inline TransformValue transform_J(const ChargeDensity& src, double x, double k) {
    if (!std::isfinite(k) || !std::isfinite(x)) throw InvalidParameter("arguments must be finite");
    const SupportBox b = src.support();
    if (!(x > b.d1)) throw InvalidParameter("transform_J needs x > d1");
    const double ak = std::abs(k);
    const cplx at_edge = src.moment(k, b.d0, b.d1, b.d1, ak);
    return TransformValue::from_complex(at_edge).scaled_exp(-ak * (x - b.d1));
}

inline cplx moment_C0(const ChargeDensity& src) { return src.moment_C0(); }

/// Sampled estimates of sup |I_k|/|k| and sup |J_k(x)|/|k| (x > d1, 0 < k <= 1),
/// plus the L2 norm. These are estimates with a 1.05 safety factor, not
/// certified bounds.
struct BoundConstants {
    double C_I = 0.0;
    double C_J = 0.0;
    double l2_norm = 0.0;
};

inline BoundConstants bound_constants(const ChargeDensity& src, std::size_t samples = 2048) {
    const SupportBox b = src.support();
    BoundConstants out;
    out.l2_norm = std::sqrt(src.l2_norm_squared());
    const double c0 = std::abs(src.moment_C0());

    const double k_hi = std::max(200.0 / std::max(b.d0, 1e-3), 10.0);
    const double lk_lo = std::log(1e-6);
    double ci = c0;
    double cj = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
        const double kI = std::exp(lk_lo + (std::log(k_hi) - lk_lo) * t);
        ci = std::max(ci, std::exp(transform_I(src, kI).log_magnitude - std::log(kI)));
        const double kJ = std::exp(lk_lo * (1.0 - t));
        const cplx edge = src.moment(kJ, b.d0, b.d1, b.d1, kJ);
        cj = std::max(cj, std::abs(edge) / kJ);
    }
    out.C_I = 1.05 * ci;
    out.C_J = 1.05 * cj;
    return out;
}

struct ValidationReport {
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
};

/// Checks placement (d0 > a when a slab thickness is given), zero net charge
/// relative to the absolute charge, finite non-degenerate support, and bounded
/// values. Each violation is listed separately.
inline ValidationReport validate(const ChargeDensity& src, std::optional<double> slab_a = {}) {
    ValidationReport rep;
    const SupportBox b = src.support();
    const bool finite_box = std::isfinite(b.d0) && std::isfinite(b.d1) && std::isfinite(b.h0) &&
                            std::isfinite(b.h1);
    if (!finite_box) rep.issues.emplace_back("support is not bounded");
    if (!(b.d1 > b.d0) || !(b.h1 > b.h0)) {
        rep.issues.emplace_back("support has zero measure (point or dipole sources are excluded)");
    }
    if (slab_a && !(b.d0 > *slab_a)) {
        rep.issues.emplace_back("support must lie beyond the slab: d0 = " + std::to_string(b.d0) +
                                " <= a = " + std::to_string(*slab_a));
    }
    const double abs = src.absolute_charge();
    const double l2 = src.l2_norm_squared();
    if (!std::isfinite(abs) || !std::isfinite(l2)) rep.issues.emplace_back("density is not bounded");
    if (abs == 0.0) rep.issues.emplace_back("density is identically zero");
    const double net = src.total_charge();
    if (std::abs(net) > 1e-12 * abs) {
        rep.issues.emplace_back("net charge " + std::to_string(net) + " is not zero");
    }
    for (auto& s : src.intrinsic_issues()) rep.issues.push_back(std::move(s));
    return rep;
}

}  // namespace calr
