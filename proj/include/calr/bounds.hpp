#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "calr/dissipation.hpp"
#include "calr/errors.hpp"
#include "calr/potential.hpp"
#include "calr/roots.hpp"
#include "calr/slab.hpp"
#include "calr/source.hpp"
#include "json.hpp"

namespace calr {

// ---------------------------------------------------------------------------
// Regime classification

enum class Regime { strong_calr, weak_calr, no_calr, indeterminate };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::strong_calr: return "strong_calr";
        case Regime::weak_calr: return "weak_calr";
        case Regime::no_calr: return "no_calr";
        case Regime::indeterminate: return "indeterminate";
    }
    return "?";
}

struct ProbeOptions {
    double k_limit = 400.0;      ///< largest wavenumber probed
    std::size_t max_terms = 200; ///< resonant-sequence terms (rectangle, circle)
    std::size_t grid_samples = 4000;
};

struct RegimeReport {
    double tau_a = 0.0;
    /// Witness depth: the requested d*, or a depth in (d0, tau a) when d* is not below tau a.
    double d_star = 0.0;
    double requested_depth = 0.0;
    /// Estimate of limsup |I_k e^{k d*}|; +inf when it grows without bound.
    double Lambda = 0.0;
    Regime regime = Regime::indeterminate;
    double growth_rate = 0.0;  ///< slope of log|I_k e^{k d*}| along the probe
    std::vector<double> probe_k;
    std::vector<double> probe_log_weighted;
    std::string note;
};

/// Wavenumbers where the source transform peaks: (2j-1)pi/h for the rectangle,
/// (2/R)(pi/2 + 2 pi j) for the circle.
inline std::vector<double> resonant_wavenumbers(const ChargeDensity& src, std::size_t first,
                                                std::size_t last) {
    std::vector<double> ks;
    if (const auto* r = dynamic_cast<const RectangleSource*>(&src)) {
        for (std::size_t j = first; j <= last; ++j) {
            ks.push_back((2.0 * static_cast<double>(j) - 1.0) * std::numbers::pi / r->h());
        }
    } else if (const auto* c = dynamic_cast<const CircleSource*>(&src)) {
        for (std::size_t j = first; j <= last; ++j) {
            ks.push_back(2.0 / c->R() * (0.5 * std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(j)));
        }
    } else {
        throw InvalidParameter("resonant sequences exist only for rectangle and circle sources");
    }
    return ks;
}

namespace detail {

struct LambdaEstimate {
    double Lambda = 0.0;
    double slope = 0.0;
    std::vector<double> k;
    std::vector<double> v;
};

/// Tracks v(k) = log|I_k| + k d along the probe and reads off the trend over
/// its second half: growing means Lambda = inf, decaying means 0.
inline LambdaEstimate estimate_Lambda(const ChargeDensity& src, double d, const ProbeOptions& probe) {
    LambdaEstimate est;
    const bool structured = dynamic_cast<const RectangleSource*>(&src) ||
                            dynamic_cast<const CircleSource*>(&src);
    if (structured) {
        for (double k : resonant_wavenumbers(src, 1, probe.max_terms)) {
            if (k > probe.k_limit) break;
            est.k.push_back(k);
        }
    } else {
        const double step = probe.k_limit / static_cast<double>(probe.grid_samples);
        for (std::size_t i = 1; i <= probe.grid_samples; ++i) est.k.push_back(step * static_cast<double>(i));
    }
    double running = -std::numeric_limits<double>::infinity();
    for (double k : est.k) {
        const double v = transform_I(src, k).log_magnitude + k * d;
        // For sampled sources only the running maximum is meaningful.
        running = std::max(running, v);
        est.v.push_back(structured ? v : running);
    }
    if (est.k.size() < 4) {
        est.Lambda = est.v.empty() ? 0.0 : std::exp(est.v.back());
        return est;
    }
    const std::size_t mid = est.k.size() / 2;
    const double dv = est.v.back() - est.v[mid];
    est.slope = dv / (est.k.back() - est.k[mid]);
    if (dv > 1.0) {
        est.Lambda = std::numeric_limits<double>::infinity();
    } else if (dv < -1.0) {
        est.Lambda = 0.0;
    } else {
        est.Lambda = std::exp(est.v.back());
    }
    return est;
}

}  // namespace detail

/// Predicted regime: no CALR when d0 > tau(beta) a; weak (limsup) or strong
/// (full limit) CALR when some depth below tau(beta) a carries Lambda > 0;
/// indeterminate otherwise, including the boundary d* = tau(beta) a.
inline RegimeReport classify(const ChargeDensity& src, const SlabConfig& cfg, double d_star,
                             const ProbeOptions& probe = {}) {
    const SupportBox b = src.support();
    if (!(b.d0 > cfg.a)) throw InvalidParameter("classify needs a < d0");
    if (d_star < b.d0 || d_star > b.d1) throw InvalidParameter("d_star must lie in [d0, d1]");
    RegimeReport rep;
    rep.tau_a = tau(cfg.beta) * cfg.a;
    rep.d_star = d_star;
    rep.requested_depth = d_star;
    if (b.d0 > rep.tau_a) {
        rep.regime = Regime::no_calr;
        rep.note = "support starts beyond tau(beta) a";
        return rep;
    }
    const bool is_grid = !dynamic_cast<const RectangleSource*>(&src) && !dynamic_cast<const CircleSource*>(&src);

    // Candidate depths: d* itself when it lies below tau a, then the midpoint
    // of (d0, min(tau a, d1)). The first with Lambda > 0 is the witness.
    const double top = std::min(rep.tau_a, b.d1);
    std::vector<double> candidates;
    if (d_star < rep.tau_a) candidates.push_back(d_star);
    if (top > b.d0) candidates.push_back(0.5 * (b.d0 + top));
    if (candidates.empty()) {
        rep.regime = Regime::indeterminate;
        rep.note = "d0 equals tau(beta) a; the boundary case is open";
        return rep;
    }
    double depth = candidates.front();
    detail::LambdaEstimate est;
    for (double c : candidates) {
        depth = c;
        est = detail::estimate_Lambda(src, depth, probe);
        if (est.Lambda > 0.0) break;
    }
    rep.d_star = depth;
    rep.Lambda = est.Lambda;
    rep.growth_rate = est.slope;
    rep.probe_k = est.k;
    rep.probe_log_weighted = est.v;

    if (is_grid) {
        rep.regime = Regime::indeterminate;
        rep.note = "sampled source: running maximum reported, limsup not decidable";
        return rep;
    }
    if (!(rep.Lambda > 0.0)) {
        rep.regime = Regime::indeterminate;
        rep.note = "no positive Lambda found below tau(beta) a";
        return rep;
    }
    // The rectangle transform vanishes at k = 2 pi n/h, so only the limsup
    // hypothesis holds. For the circle the full limit is read off a dense probe:
    // the running minimum over the last half must keep growing.
    rep.regime = Regime::weak_calr;
    rep.note = depth == d_star ? "d* inside the region of influence" : "witness depth between d0 and tau(beta) a";
    if (dynamic_cast<const CircleSource*>(&src) && std::isinf(rep.Lambda)) {
        const double top = est.k.back();
        auto min_over = [&](double lo, double hi) {
            double m = std::numeric_limits<double>::infinity();
            for (int i = 0; i <= 200; ++i) {
                const double k = lo + (hi - lo) * i / 200.0;
                m = std::min(m, transform_I(src, k).log_magnitude + k * depth);
            }
            return m;
        };
        if (min_over(0.75 * top, top) > min_over(0.5 * top, 0.75 * top) + 1.0) {
            rep.regime = Regime::strong_calr;
            rep.note += "; full limit inferred from a dense probe";
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Lower bound (blow-up estimate)

struct BoundEvaluation {
    std::string name;
    double delta = 0.0;
    double value = 0.0;
    std::optional<double> limit;
    double exponent = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<std::string, double>> constants;

    double constant(const std::string& key) const {
        for (const auto& [k, v] : constants) {
            if (k == key) return v;
        }
        throw InvalidParameter("no constant named " + key);
    }
};

struct EstimateConstants {
    double C_prime, C2, C3, C4;
};

inline EstimateConstants estimate_constants(const SlabConfig& cfg, double d_star, double Lambda,
                                            double C1 = 26.0, double C_L = 0.5) {
    EstimateConstants c{};
    c.C_prime = C_L * std::exp(-2.0 * d_star) / (2.0 * std::numbers::pi * C1);
    c.C4 = c.C_prime * cfg.a * Lambda * Lambda / 4.0;
    if (cfg.lambda > 0.0) {
        c.C2 = c.C_prime * cfg.a * Lambda * Lambda * std::pow(cfg.lambda, (d_star - cfg.a) / cfg.a) / 2.0;
        c.C3 = std::log(cfg.lambda);
    } else {
        c.C2 = std::numeric_limits<double>::quiet_NaN();
        c.C3 = std::numeric_limits<double>::quiet_NaN();
    }
    return c;
}

/// Right-hand side of the blow-up estimate at cfg.delta:
///   C2 delta^{(beta+1)(d*-a)/a - 1} / ((ln delta - 1)(C3 + (beta+1) ln delta))   for beta < 1,
///   C4 delta^{2(d*-a)/a - 1} / ((ln delta - 1) ln delta)                           for beta >= 1.
inline BoundEvaluation theorem_lower_bound(const ChargeDensity& src, const SlabConfig& cfg, double d_star,
                                           double Lambda, double C1 = 26.0, double C_L = 0.5) {
    cfg.validate();
    const SupportBox b = src.support();
    if (d_star < b.d0 || d_star > b.d1) throw InvalidParameter("d_star must lie in [d0, d1]");
    if (!(Lambda > 0.0) || !std::isfinite(Lambda)) throw InvalidParameter("Lambda must lie in (0, inf)");
    if (cfg.beta < 1.0 && !(cfg.lambda > 0.0)) throw InvalidParameter("beta < 1 needs lambda > 0");

    const auto th = admissible_delta_thresholds(cfg.beta, cfg.lambda);
    const double limit = std::min({th.delta_0, delta_g(cfg.beta, cfg.lambda, C1),
                                   delta_L(cfg.beta, cfg.lambda, cfg.xi / cfg.a, C_L)});
    if (cfg.delta > limit) throw NotApplicable("delta is above the thresholds of the estimate");
    if (k0(cfg) < 1.0) throw NotApplicable("delta too large: need k0 + 1 <= 2 k0");

    const EstimateConstants c = estimate_constants(cfg, d_star, Lambda, C1, C_L);
    const double ld = std::log(cfg.delta);
    BoundEvaluation ev;
    ev.name = "estimate";
    ev.delta = cfg.delta;
    if (cfg.beta < 1.0) {
        ev.exponent = (cfg.beta + 1.0) * (d_star - cfg.a) / cfg.a - 1.0;
        ev.value = c.C2 * std::exp(ev.exponent * ld) / ((ld - 1.0) * (c.C3 + (cfg.beta + 1.0) * ld));
    } else {
        ev.exponent = 2.0 * (d_star - cfg.a) / cfg.a - 1.0;
        ev.value = c.C4 * std::exp(ev.exponent * ld) / ((ld - 1.0) * ld);
    }
    ev.constants = {{"C1", C1}, {"C_L", C_L}, {"C_prime", c.C_prime}, {"C2", c.C2},
                    {"C3", c.C3}, {"C4", c.C4}, {"Lambda", Lambda}, {"d_star", d_star}};
    return ev;
}

// ---------------------------------------------------------------------------
// Upper-bound chain T1..T4

enum class ChainMode { full, per_term };

struct ChainConstants {
    double C5, C6, C7, C8;
};

inline ChainConstants chain_constants(const ChargeDensity& src, const SlabConfig& cfg) {
    const SupportBox b = src.support();
    ChainConstants c{};
    c.C5 = (b.d1 - b.d0) * src.l2_norm_squared() / (9.0 * std::numbers::pi);
    c.C6 = cfg.xi * c.C5 / (b.d0 - 3.0 * cfg.a);
    c.C7 = 9.0 * c.C5 * cfg.xi / (b.d0 - 1.5 * cfg.a);
    c.C8 = 9.0 * c.C5 / (2.0 * b.d0 + cfg.a - 2.0 * cfg.xi);
    return c;
}

struct UpperBoundChain {
    BoundEvaluation T1, T2, T3, T4;
    double sum = 0.0;
    ChainConstants constants{};
    double k0 = 0.0;
};

namespace detail {

/// log of the integral of e^{s k}(1 - e^{-2 xi k})/k over [lo, hi] (hi may be inf
/// when s < 0; the tail past the last panel is bounded by e^{sK}/(|s| K)).
inline double log_chain_integral(double s, double xi, double lo, double hi, double tol = 1e-12) {
    auto logf = [&](double k) { return s * k + log1m_exp(2.0 * xi * k) - std::log(k); };
    double top = hi;
    double tail = 0.0;
    if (!std::isfinite(hi)) {
        if (!(s < 0.0)) return std::numeric_limits<double>::infinity();
        top = lo + 80.0 / -s;
        tail = std::exp(s * top) / (-s * top);
    }
    if (!(top > lo)) return -std::numeric_limits<double>::infinity();
    // Panels of one decay length keep each panel smooth.
    const double width = std::max(std::abs(s), 2.0 * xi) > 0.0 ? 1.0 / std::max(std::abs(s), 2.0 * xi) : top - lo;
    std::vector<double> breaks = quad::uniform_breaks(lo, top, std::max(width, (top - lo) / 4096.0));
    const auto r = integrate_log(logf, breaks, tol, 1u << 16);
    if (tail == 0.0) return std::log(r.value);
    // Combine in the log domain: the bulk may be far below the double range in absolute terms.
    return std::log(r.value + tail);
}

}  // namespace detail

/// T1..T4 at cfg.delta by quadrature, with the small-delta limits where the
/// corresponding lemma states one.
inline UpperBoundChain upper_bound_chain(const ChargeDensity& src, const SlabConfig& cfg,
                                         ChainMode mode = ChainMode::full) {
    cfg.validate();
    const SupportBox b = src.support();
    const double a = cfg.a;
    const double xi = cfg.xi;
    const double d0 = b.d0;
    if (d0 < 1.5 * a) throw NotApplicable("upper-bound chain needs d0 >= 1.5 a");
    if (mode == ChainMode::full && !(xi < 0.5 * a)) throw NotApplicable("full chain needs xi < a/2");
    const auto th = admissible_delta_thresholds(cfg.beta, cfg.lambda);
    if (cfg.delta > th.delta_0) throw NotApplicable("delta is above delta_0");

    UpperBoundChain ch;
    ch.constants = chain_constants(src, cfg);
    const ChainConstants& C = ch.constants;
    ch.k0 = k0(cfg);
    const double kk = ch.k0;
    const double d = cfg.delta;
    const double db = std::pow(d, cfg.beta);
    const double ldm = std::log(cfg.delta_plus_mu());
    const double lw = std::log(cfg.lambda * cfg.lambda * db * db + 4.0);
    const double ld = std::log(d);
    const double lc5 = std::log(C.C5);
    constexpr double inf = std::numeric_limits<double>::infinity();

    const double l1 = lc5 + ld + 2.0 * ldm + detail::log_chain_integral(2.0 * (3.0 * a - d0), xi, 0.0, kk);
    const double l2 = lc5 + ld + lw + detail::log_chain_integral(2.0 * (a - d0 + xi), xi, 0.0, kk);
    const double l3 = std::log(9.0) + lc5 - 0.5 * ld + 0.5 * ldm +
                      detail::log_chain_integral(-2.0 * (d0 - 1.5 * a), xi, kk, inf);
    const double l4 = std::log(9.0) + lc5 - 0.5 * ld - 1.5 * ldm + lw +
                      detail::log_chain_integral(-(2.0 * d0 + a - 2.0 * xi), xi, kk, inf);

    const double t = tau(cfg.beta) * a;
    const bool at_tau = std::abs(d0 - t) <= 1e-12 * t;
    const double e1 = 2.0 + (d0 - 3.0 * a) / a;

    auto make = [&](const char* name, double lv) {
        BoundEvaluation ev;
        ev.name = name;
        ev.delta = d;
        ev.value = std::exp(lv);
        return ev;
    };
    ch.T1 = make("T1", l1);
    ch.T2 = make("T2", l2);
    ch.T3 = make("T3", l3);
    ch.T4 = make("T4", l4);

    if (d0 > t && !at_tau) {
        ch.T1.limit = 0.0;
        ch.T3.limit = 0.0;
    } else if (at_tau) {
        if (cfg.beta < 1.0) {
            ch.T1.limit = C.C6 * std::pow(cfg.lambda, e1);
            ch.T3.limit = C.C7 * std::pow(cfg.lambda, 0.5 + (d0 - 1.5 * a) / a);
        } else if (cfg.beta == 1.0) {
            ch.T1.limit = C.C6 * std::pow(2.0 + cfg.lambda, e1);
        } else {
            ch.T1.limit = C.C6 * std::pow(2.0, e1);
        }
    }
    if (d0 >= t || at_tau) {
        if (xi < 0.5 * a) ch.T2.limit = 0.0;
        ch.T4.limit = 0.0;
    }
    ch.T1.exponent = e1;
    for (BoundEvaluation* ev : {&ch.T1, &ch.T2, &ch.T3, &ch.T4}) {
        ev->constants = {{"C5", C.C5}, {"C6", C.C6}, {"C7", C.C7}, {"C8", C.C8}};
    }
    ch.sum = ch.T1.value + ch.T2.value + ch.T3.value + ch.T4.value;
    return ch;
}

// ---------------------------------------------------------------------------
// Blow-up sequences

struct BlowupSequence {
    std::string kind;
    std::vector<std::size_t> j;
    std::vector<double> k;
    std::vector<double> delta;
    double d_star = 0.0;
    bool warning = false;
    std::string message;
};

/// delta with k0(delta) = k, found by bisection in log delta on (floor, delta_0].
inline std::optional<double> delta_for_k0(const SlabConfig& cfg, double k, double floor = 1e-300) {
    const double target = -2.0 * cfg.a * k;
    const auto th = admissible_delta_thresholds(cfg.beta, cfg.lambda);
    auto f = [&](double ld) { return cfg.with_delta(std::exp(ld)).log_p() - target; };
    const double lo = std::log(floor);
    const double hi = std::log(th.delta_0);
    if (f(lo) > 0.0) return std::nullopt;
    if (f(hi) < 0.0) return th.delta_0;
    return std::exp(roots::bisect(f, lo, hi, 1e-15, 0.0, 2000));
}

inline BlowupSequence blowup_sequence(const ChargeDensity& src, const SlabConfig& cfg, std::size_t j_first,
                                      std::size_t j_last, std::optional<double> d_star = {}) {
    if (j_first == 0 || j_last < j_first) throw InvalidParameter("j range must satisfy 1 <= first <= last");
    BlowupSequence seq;
    seq.kind = src.kind();
    const auto ks = resonant_wavenumbers(src, j_first, j_last);
    const SupportBox b = src.support();
    seq.d_star = d_star.value_or(0.5 * (b.d0 + std::min(b.d1, tau(cfg.beta) * cfg.a)));
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const auto dj = delta_for_k0(cfg, ks[i]);
        if (!dj) {
            seq.warning = true;
            seq.message = "delta_j fell below 1e-300 at j = " + std::to_string(j_first + i) + "; range truncated";
            break;
        }
        seq.j.push_back(j_first + i);
        seq.k.push_back(ks[i]);
        seq.delta.push_back(*dj);
    }
    return seq;
}

/// E_xi along the sequence and whether it increases strictly.
struct BlowupDissipation {
    std::vector<double> E;
    bool increasing = false;
};

inline BlowupDissipation evaluate_blowup(const ChargeDensity& src, const SlabConfig& cfg,
                                         const BlowupSequence& seq, double tol = 1e-8) {
    BlowupDissipation out;
    for (double d : seq.delta) out.E.push_back(dissipation(src, cfg.with_delta(d), tol).value);
    out.increasing = out.E.size() >= 2;
    for (std::size_t i = 1; i < out.E.size(); ++i) out.increasing = out.increasing && out.E[i] > out.E[i - 1];
    return out;
}

// ---------------------------------------------------------------------------
// Lemma suite

struct SamplePlan {
    std::size_t samples = 10000;  ///< per lemma
    std::uint64_t seed = 20140601;
    double delta_min = 1e-14;
    double C1 = 26.0;
    double C_L = 0.5;
    unsigned workers = 1;
    /// (beta, lambda) pairs; empty means the default feasible grid.
    std::vector<std::pair<double, double>> parameters;
};

inline std::vector<std::pair<double, double>> default_parameter_grid() {
    std::vector<std::pair<double, double>> out;
    for (double beta : {0.3, 0.5, 1.0, 2.0}) {
        for (double lambda : {-1.0, 0.5, 1.0, 2.0}) {
            if (feasible(beta, lambda)) out.emplace_back(beta, lambda);
        }
    }
    return out;
}

struct LemmaResult {
    std::string name;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    double worst_beta = 0.0, worst_lambda = 0.0, worst_delta = 0.0, worst_k = 0.0;
    bool passed() const { return violations == 0; }
};

struct LemmaReport {
    std::vector<LemmaResult> lemmas;
    bool passed() const {
        return std::all_of(lemmas.begin(), lemmas.end(), [](const LemmaResult& l) { return l.passed(); });
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic uniform numbers for one (lemma, sample) pair.
class SampleRng {
public:
    SampleRng(std::uint64_t seed, std::uint64_t lemma, std::uint64_t index)
        : state_(splitmix64(seed ^ splitmix64(lemma * 0x100000001b3ULL + index))) {}
    double uniform() {
        state_ = splitmix64(state_);
        return static_cast<double>(state_ >> 11) * 0x1.0p-53;
    }
    std::size_t pick(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n))); }

private:
    std::uint64_t state_;
};

enum class KRange { up_to_5k0, below_k0, k0_to_5k0 };

}  // namespace detail

/// Evaluates each inequality on seeded random (beta, lambda, delta, k) samples
/// and records the smallest log-margin (log rhs - log lhs for upper bounds).
/// A margin below -1e-12 counts as a violation.
inline LemmaReport lemma_suite(const ChargeDensity& src, const SlabConfig& base, const SamplePlan& plan = {}) {
    base.validate();
    const SupportBox b = src.support();
    if (!(b.d0 > base.a)) throw InvalidParameter("source must lie beyond the slab (d0 > a)");
    const auto params = plan.parameters.empty() ? default_parameter_grid() : plan.parameters;
    const double spread = (b.d1 - b.d0) * src.l2_norm_squared();
    const double log_spread = std::log(spread);

    using detail::KRange;
    struct Entry {
        const char* name;
        KRange range;
        int threshold;  // 0 mu, 1 delta0, 2 min(delta0, delta_g), 3 min(delta0, delta_L), 4 psi-
    };
    const std::vector<Entry> entries = {
        {"source_transform_decay", KRange::up_to_5k0, 1},
        {"g_upper", KRange::k0_to_5k0, 2},
        {"L_lower", KRange::k0_to_5k0, 3},
        {"g_lower_below_k0", KRange::below_k0, 1},
        {"g_lower_above_k0", KRange::k0_to_5k0, 1},
        {"core_denominator", KRange::up_to_5k0, 0},
        {"psi_difference", KRange::up_to_5k0, 4},
        {"J_decay", KRange::up_to_5k0, 1},
        {"g_lower_global", KRange::up_to_5k0, 0},
        {"core_potential", KRange::up_to_5k0, 1},
    };

    // Thresholds per parameter pair, computed once.
    struct Th {
        double mu, d0, g, L, psi;
    };
    std::vector<Th> ths;
    for (auto [beta, lambda] : params) {
        const auto t = admissible_delta_thresholds(beta, lambda);
        ths.push_back({t.delta_mu, t.delta_0, std::min(t.delta_0, delta_g(beta, lambda, plan.C1)),
                       std::min(t.delta_0, delta_L(beta, lambda, base.xi / base.a, plan.C_L)),
                       delta_psi_minus(beta, lambda)});
    }

    auto margin_of = [&](std::size_t lemma, const SlabConfig& cfg, double k, double u) -> double {
        const double a = cfg.a;
        const LayerScalars ls = layer_scalars(cfg, k);
        const double lg2 = ls.g_factored.log_mod_sq();
        const double lp = cfg.log_p();
        const double ld = std::log(cfg.delta);
        const double dpm = cfg.delta_plus_mu();
        switch (lemma) {
            case 0: {  // |I_k|^2 <= (d1-d0)||rho||^2 e^{-2k d0}
                const TransformValue I = transform_I(src, k);
                if (I.is_zero()) return std::numeric_limits<double>::infinity();
                return log_spread - 2.0 * k * b.d0 - 2.0 * I.log_magnitude;
            }
            case 1:  // |g|^2 <= C1 delta^2
                return std::log(plan.C1) + 2.0 * ld - lg2;
            case 2:  // L >= C_L
                return log_integrand_L(cfg, k) - std::log(plan.C_L);
            case 3:  // |g|^2 >= 9 e^{-4ka} delta^2 / p^2
                return lg2 - (std::log(9.0) - 4.0 * k * a + 2.0 * ld - 2.0 * lp);
            case 4:  // |g|^2 >= e^{-ka} delta^2 / p^{1/2}
                return lg2 - (-k * a + 2.0 * ld - 0.5 * lp);
            case 5: {  // ||k| psi+ + psi-|^2 >= 2 k^2 e^{-2ka}
                double lhs;
                if (k * a < 300.0) {
                    lhs = std::log(std::norm(k * ls.psi_plus + ls.psi_minus));
                } else {
                    lhs = 2.0 * std::log(k) + lg2 + 2.0 * k * a +
                          std::log(std::norm(ls.chi_c + 1.0) / (4.0 * std::norm(ls.chi_c)));
                }
                return lhs - (std::log(2.0) + 2.0 * std::log(k) - 2.0 * k * a);
            }
            case 6: {  // |psi+ - psi-/|k||^2 <= (5/2)(delta+mu)^2 e^{2ka}; scaled by e^{-ka}
                const cplx u1 = (ls.chi_c + 1.0) * (1.0 - ls.chi_m);
                const cplx v1 = (ls.chi_c - 1.0) * (1.0 + ls.chi_m);
                const cplx scaled = (u1 + v1 * std::exp(-2.0 * k * a)) / (2.0 * ls.chi_c);
                return std::log(2.5 * dpm * dpm) - std::log(std::norm(scaled));
            }
            case 7: {  // |J_k(x)|^2 <= (d1-d0)||rho||^2 e^{-2k(x-d1)}
                const double x = b.d1 + 1e-3 * a + u * 5.0 * a;
                const TransformValue J = transform_J(src, x, k);
                if (J.is_zero()) return std::numeric_limits<double>::infinity();
                return log_spread - 2.0 * k * (x - b.d1) - 2.0 * J.log_magnitude;
            }
            case 8:  // |g|^2 >= 8 (1+delta^2)/(delta+mu)^2 e^{-4ka}
                return lg2 - (std::log(8.0 * (1.0 + cfg.delta * cfg.delta)) - 2.0 * std::log(dpm) - 4.0 * k * a);
            case 9: {  // |V_c(x,k)|^2 <= |I_k|^2/(2k^2) e^{2k(x+2a)}, checked at the worst x = 0
                const TransformValue I = transform_I(src, k);
                if (I.is_zero()) return std::numeric_limits<double>::infinity();
                const TransformValue A = TransformValue::from_complex(ls.transmission) * I /
                                         ls.g_factored.log() / TransformValue::from_real(k);
                const double x = -u * 5.0 * a;
                const double lhs = 2.0 * A.log_magnitude + 2.0 * k * x;
                const double rhs = 2.0 * I.log_magnitude - std::log(2.0 * k * k) + 2.0 * k * (x + 2.0 * a);
                return rhs - lhs;
            }
        }
        return std::numeric_limits<double>::infinity();
    };

    LemmaReport report;
    for (std::size_t li = 0; li < entries.size(); ++li) {
        const Entry& e = entries[li];
        const std::size_t n = plan.samples;
        std::vector<double> margins(n, std::numeric_limits<double>::infinity());
        std::vector<std::array<double, 4>> where(n);

        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                detail::SampleRng rng(plan.seed, li, i);
                const std::size_t pi = rng.pick(params.size());
                const auto [beta, lambda] = params[pi];
                const Th& t = ths[pi];
                const double thr[] = {t.mu, t.d0, t.g, t.L, t.psi};
                const double hi = std::min(thr[e.threshold], 1.0 - 1e-9);
                const double lo = std::min(plan.delta_min, hi);
                const double delta = std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
                SlabConfig cfg = base;
                cfg.beta = beta;
                cfg.lambda = lambda;
                cfg.delta = delta;
                double kz = 0.0;
                try {
                    kz = k0(cfg);
                } catch (const DeltaTooLarge&) {
                    kz = 0.0;
                }
                const double r = rng.uniform();
                double k = 0.0;
                switch (e.range) {
                    case KRange::up_to_5k0: k = (1.0 - r) * 5.0 * std::max(kz, 1e-3); break;
                    case KRange::below_k0: k = (1.0 - r) * std::max(kz, 1e-3); break;
                    case KRange::k0_to_5k0: k = kz + r * 4.0 * kz; break;
                }
                if (!(k > 0.0)) k = 1e-6;
                margins[i] = margin_of(li, cfg, k, rng.uniform());
                where[i] = {beta, lambda, delta, k};
            }
        };
        const unsigned w = std::max(1u, plan.workers);
        if (w == 1) {
            work(0, n);
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < w; ++t) pool.emplace_back(work, n * t / w, n * (t + 1) / w);
            for (auto& th : pool) th.join();
        }

        LemmaResult res;
        res.name = e.name;
        res.samples = n;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = margins[i];
            if (std::isnan(m) || m < -1e-12) ++res.violations;
            if (std::isnan(m) || m < res.min_margin) {
                res.min_margin = std::isnan(m) ? -std::numeric_limits<double>::infinity() : m;
                res.worst_beta = where[i][0];
                res.worst_lambda = where[i][1];
                res.worst_delta = where[i][2];
                res.worst_k = where[i][3];
            }
        }
        report.lemmas.push_back(res);
    }
    return report;
}

inline nlohmann::ordered_json to_json(const LemmaReport& rep) {
    nlohmann::ordered_json j;
    j["passed"] = rep.passed();
    j["lemmas"] = nlohmann::ordered_json::array();
    for (const auto& l : rep.lemmas) {
        nlohmann::ordered_json e;
        e["name"] = l.name;
        e["samples"] = l.samples;
        e["violations"] = l.violations;
        e["min_margin"] = std::isfinite(l.min_margin) ? nlohmann::ordered_json(l.min_margin) : nlohmann::ordered_json(nullptr);
        e["worst"] = {{"beta", l.worst_beta}, {"lambda", l.worst_lambda}, {"delta", l.worst_delta}, {"k", l.worst_k}};
        e["passed"] = l.passed();
        j["lemmas"].push_back(e);
    }
    return j;
}

inline nlohmann::ordered_json to_json(const RegimeReport& r) {
    nlohmann::ordered_json j;
    j["regime"] = regime_name(r.regime);
    j["tau_a"] = r.tau_a;
    j["d_star"] = r.d_star;
    j["requested_depth"] = r.requested_depth;
    j["Lambda"] = std::isfinite(r.Lambda) ? nlohmann::ordered_json(r.Lambda) : nlohmann::ordered_json("inf");
    j["growth_rate"] = r.growth_rate;
    j["note"] = r.note;
    return j;
}

}  // namespace calr
