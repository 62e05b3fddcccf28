#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "calr/errors.hpp"
#include "calr/quadrature.hpp"
#include "calr/slab.hpp"
#include "calr/source.hpp"
#include "calr/transform_value.hpp"

namespace calr {

enum class Region { core, slab, matrix };

inline const char* region_name(Region r) {
    switch (r) {
        case Region::core: return "c";
        case Region::slab: return "s";
        case Region::matrix: return "m";
    }
    return "?";
}

/// Region containing x; points on an interface go to the outer side.
inline Region region_of(const SlabConfig& cfg, double x) {
    if (x < 0.0) return Region::core;
    if (x <= cfg.a) return Region::slab;
    return Region::matrix;
}

struct PotentialSample {
    TransformValue value;
    TransformValue dx;
};

/// Fourier-side potential for a fixed source and slab.
///
/// For k != 0 with T = 2 chi_c/(chi_c + 1), r = (chi_c - 1)/(chi_c + 1):
///   core    A_k e^{|k|x},                        A_k = T I_k / (|k| g)
///   slab    I_k/(|k| g) [e^{|k|x} + r e^{-|k|x}]
///   matrix  B_k e^{-|k|x} + (1/2|k|) int rho_hat(s,k) e^{-|k||x-s|} ds
/// where B_k = I_k/(2|k| g) [(2 - i delta) e^{2|k|a} + delta(-2 - i lambda delta^beta)/(delta+mu)].
/// At k = 0 the potential is the gauge constant A0 (plus the particular part in
/// the matrix region).
class FourierPotential {
public:
    FourierPotential(SourcePtr src, SlabConfig cfg, cplx A0 = 0.0)
        : src_(std::move(src)), cfg_(cfg), A0_(A0) {
        if (!src_) throw InvalidParameter("source is null");
        cfg_.validate();
        box_ = src_->support();
    }

    const ChargeDensity& source() const { return *src_; }
    const SlabConfig& slab() const { return cfg_; }
    cplx A0() const { return A0_; }

    TransformValue coefficient_A(double k) const {
        if (!std::isfinite(k)) throw InvalidParameter("wavenumber must be finite");
        if (k == 0.0) return TransformValue::from_complex(A0_);
        const double ak = std::abs(k);
        const LayerScalars ls = layer_scalars(cfg_, ak);
        return TransformValue::from_complex(ls.transmission) * shifted_I(k) /
               ls.g_factored.log() / TransformValue::from_real(ak) * TransformValue::from_log(-ak * box_.d0);
    }

    PotentialSample evaluate(Region region, double x, double k) const {
        if (!std::isfinite(k) || !std::isfinite(x)) throw InvalidParameter("arguments must be finite");
        check_region(region, x);
        if (k == 0.0) return at_zero(region, x);

        const double ak = std::abs(k);
        const LayerScalars ls = layer_scalars(cfg_, ak);
        const TransformValue I_over_g = shifted_I(k) / ls.g_factored.log();  // e^{-|k| d0} omitted
        const TransformValue inv_k = TransformValue::from_log(-std::log(ak));

        switch (region) {
            case Region::core: {
                const TransformValue v = TransformValue::from_complex(ls.transmission) * I_over_g *
                                         inv_k * TransformValue::from_log(ak * (x - box_.d0));
                return {v, v * TransformValue::from_real(ak)};
            }
            case Region::slab: {
                const double t = std::exp(-2.0 * ak * x);
                const TransformValue base = I_over_g * TransformValue::from_log(ak * (x - box_.d0));
                const TransformValue v = base * inv_k * TransformValue::from_complex(1.0 + ls.reflection * t);
                const TransformValue dv = base * TransformValue::from_complex(1.0 - ls.reflection * t);
                return {v, dv};
            }
            case Region::matrix: {
                const double d = cfg_.delta;
                const cplx c1 = d * cplx(-2.0, -cfg_.lambda * std::pow(d, cfg_.beta)) / cfg_.delta_plus_mu();
                const cplx bracket = cplx(2.0, -d) + c1 * std::exp(-2.0 * ak * cfg_.a);
                const TransformValue refl = I_over_g * inv_k * TransformValue::from_complex(0.5 * bracket) *
                                            TransformValue::from_log(ak * (2.0 * cfg_.a - box_.d0 - x));
                // Free-space part: (1/2|k|)[left + right] with the exponent kept <= 0.
                const cplx left = src_->moment(k, box_.d0, x, x, ak);
                const cplx right = src_->moment(k, x, box_.d1, x, -ak);
                TransformValue right_tv = TransformValue::from_complex(right);
                if (x < box_.d0) {
                    // Whole support lies to the right; reuse the shifted I_k.
                    right_tv = shifted_I(k).scaled_exp(-ak * (box_.d0 - x));
                }
                const TransformValue left_tv = TransformValue::from_complex(left);
                const TransformValue part = (left_tv + right_tv) * TransformValue::from_log(-std::log(2.0 * ak));
                const TransformValue dpart = (right_tv - left_tv) * TransformValue::from_log(std::log(0.5));
                return {refl + part, dpart - refl * TransformValue::from_real(ak)};
            }
        }
        throw InvalidParameter("unknown region");
    }

    TransformValue value(Region region, double x, double k) const { return evaluate(region, x, k).value; }
    TransformValue dx(Region region, double x, double k) const { return evaluate(region, x, k).dx; }

    /// Region inferred from x.
    TransformValue value(double x, double k) const { return value(region_of(cfg_, x), x, k); }

private:
    TransformValue shifted_I(double k) const { return transform_I_shifted(*src_, k); }

    void check_region(Region region, double x) const {
        bool ok = false;
        switch (region) {
            case Region::core: ok = x <= 0.0; break;
            case Region::slab: ok = x >= 0.0 && x <= cfg_.a; break;
            case Region::matrix: ok = x >= cfg_.a; break;
        }
        if (!ok) {
            throw InvalidParameter(std::string("x = ") + std::to_string(x) + " is outside region " +
                                   region_name(region));
        }
    }

    PotentialSample at_zero(Region region, double x) const {
        if (region != Region::matrix) {
            return {TransformValue::from_complex(A0_), TransformValue::zero()};
        }
        const cplx part = src_->linear_moment_at_zero(cfg_.a, x, x);
        const cplx dpart = -src_->moment(0.0, cfg_.a, x, x, 0.0);
        return {TransformValue::from_complex(A0_ + part), TransformValue::from_complex(dpart)};
    }

    SourcePtr src_;
    SlabConfig cfg_;
    cplx A0_;
    SupportBox box_;
};

inline TransformValue coefficient_A(SourcePtr src, const SlabConfig& cfg, double k, cplx A0 = 0.0) {
    return FourierPotential(std::move(src), cfg, A0).coefficient_A(k);
}

inline TransformValue potential_hat(SourcePtr src, const SlabConfig& cfg, Region region, double x,
                                    double k) {
    return FourierPotential(std::move(src), cfg).value(region, x, k);
}

// ---------------------------------------------------------------------------
// Real-space reconstruction

struct FieldPoint {
    double x = 0.0;
    double y = 0.0;
};

struct RealField {
    std::vector<FieldPoint> points;
    std::vector<cplx> values;
    std::vector<double> truncation;
    double k_max = 0.0;
    bool warning = false;
};

/// Analytic bound on (1/2pi) * integral over |k| > K of |V_hat(x,k)| dk, assembled
/// from envelopes B e^{-c k}/k. Returns +inf when an envelope does not decay.
inline double reconstruction_tail(const ChargeDensity& src, const SlabConfig& cfg, double x, double K) {
    const SupportBox b = src.support();
    const double w = std::sqrt((b.d1 - b.d0) * src.l2_norm_squared());  // sup |I_k| e^{|k| d0}
    const double a = cfg.a;
    const double dpm = cfg.delta_plus_mu();
    // 1/|g| <= (delta+mu) e^{2|k|a} / (2 sqrt(2 (1 + delta^2)))
    const double inv_g = dpm / (2.0 * std::sqrt(2.0 * (1.0 + cfg.delta * cfg.delta)));
    std::vector<std::pair<double, double>> terms;  // (B, c)
    const Region r = region_of(cfg, x);
    if (r == Region::core) {
        terms.emplace_back(w / std::sqrt(2.0), b.d0 - x - 2.0 * a);
    } else if (r == Region::slab) {
        const double rmod = std::abs(cplx(-cfg.lambda * std::pow(cfg.delta, cfg.beta), 2.0)) / dpm;
        terms.emplace_back(w * inv_g * (1.0 + rmod), b.d0 - x - 2.0 * a);
    } else {
        const double d = cfg.delta;
        const double c1 = d * std::hypot(2.0, cfg.lambda * std::pow(d, cfg.beta)) / dpm;
        terms.emplace_back(0.5 * w * inv_g * (std::hypot(2.0, d) + c1), x + b.d0 - 4.0 * a);
        if (x > b.d1) {
            terms.emplace_back(0.5 * w, x - b.d1);
        } else if (x < b.d0) {
            terms.emplace_back(0.5 * w, b.d0 - x);
        } else {
            return std::numeric_limits<double>::infinity();
        }
    }
    double tail = 0.0;
    for (auto [B, c] : terms) {
        if (!(c > 0.0)) return std::numeric_limits<double>::infinity();
        // 2 sides of k, 1/(2 pi) prefactor; integral of e^{-ck}/k over k > K is <= e^{-cK}/(cK).
        tail += 2.0 / (2.0 * std::numbers::pi) * B * std::exp(-c * K) / (c * K);
    }
    return tail;
}

/// V(x, y) = (1/2pi) integral over [-K, K] of V_hat(x, k) e^{iky} dk.
///
/// Each point uses panels no wider than pi/(1 + |y - yc|), yc the centre of
/// the support, so the e^{iky} oscillation is tracked. The warning flag is set
/// when a truncation estimate exceeds tol relative to the value.
inline RealField reconstruct_real(SourcePtr src, const SlabConfig& cfg,
                                  const std::vector<FieldPoint>& points, double k_max,
                                  double tol = 1e-10, cplx A0 = 0.0) {
    if (!(k_max > 0.0)) throw InvalidParameter("k_max must be positive");
    const FourierPotential pot(src, cfg, A0);
    const SupportBox b = src->support();
    const double yc = 0.5 * (b.h0 + b.h1);
    RealField out;
    out.points = points;
    out.k_max = k_max;
    for (const FieldPoint& p : points) {
        const Region r = region_of(cfg, p.x);
        auto f = [&](double k) {
            const cplx plus = pot.value(r, p.x, k).to_complex() * std::polar(1.0, k * p.y);
            const cplx minus = pot.value(r, p.x, -k).to_complex() * std::polar(1.0, -k * p.y);
            return plus + minus;
        };
        const auto breaks = quad::uniform_breaks(0.0, k_max, std::numbers::pi / (1.0 + std::abs(p.y - yc)));
        quad::Options opt;
        opt.rel_tol = 1e-12;
        opt.abs_tol = 1e-300;
        opt.max_panels = 1u << 16;
        const auto res = quad::integrate<cplx>(f, breaks, opt);
        const cplx v = res.value / (2.0 * std::numbers::pi);
        const double tail = reconstruction_tail(*src, cfg, p.x, k_max) + res.abs_error / (2.0 * std::numbers::pi);
        out.values.push_back(v);
        out.truncation.push_back(tail);
        if (!(tail <= tol * std::max(std::abs(v), 1e-300))) out.warning = true;
    }
    return out;
}

inline void write_csv(std::ostream& os, const RealField& field) {
    os << "x,y,re_V,im_V,truncation_estimate\n";
    os << std::scientific << std::setprecision(16);
    for (std::size_t i = 0; i < field.points.size(); ++i) {
        os << field.points[i].x << ',' << field.points[i].y << ',' << field.values[i].real() << ','
           << field.values[i].imag() << ',' << field.truncation[i] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Far-field certificates

struct BoundednessCertificates {
    double C9 = 0.0;
    double C10 = 0.0;
    /// |V| <= C9 for x < core_threshold.
    double core_threshold = 0.0;
    /// |V| <= C10 for x > matrix_threshold.
    double matrix_threshold = 0.0;
};

/// C9 = pi^{-3/2}[C_I^2 + (d1-d0)||rho||^2] and
/// C10 = pi^{-3/2}[(5/4)(delta+mu)^2 |C0|^2 + C_J^2 + (d1-d0)||rho||^2((5/4)(delta+mu)^2 + 1)].
inline BoundednessCertificates boundedness_certificates(const ChargeDensity& src, const SlabConfig& cfg,
                                                        const BoundConstants& bc) {
    const double limit = delta_psi_minus(cfg.beta, cfg.lambda);
    if (cfg.delta > limit) {
        throw NotApplicable("delta exceeds the threshold where the far-field certificates hold");
    }
    const SupportBox b = src.support();
    const double spread = (b.d1 - b.d0) * src.l2_norm_squared();
    const double pref = std::pow(std::numbers::pi, -1.5);
    const double dm2 = cfg.delta_plus_mu() * cfg.delta_plus_mu();
    const double c0 = std::abs(src.moment_C0());
    BoundednessCertificates out;
    out.C9 = pref * (bc.C_I * bc.C_I + spread);
    out.C10 = pref * (1.25 * dm2 * c0 * c0 + bc.C_J * bc.C_J + spread * (1.25 * dm2 + 1.0));
    out.core_threshold = -3.0 * cfg.a;
    out.matrix_threshold = cfg.a + std::max(b.d1, 4.0 * cfg.a);
    return out;
}

inline BoundednessCertificates boundedness_certificates(const ChargeDensity& src, const SlabConfig& cfg) {
    return boundedness_certificates(src, cfg, bound_constants(src));
}

}  // namespace calr
