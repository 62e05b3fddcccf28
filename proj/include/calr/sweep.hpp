#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "calr/bounds.hpp"
#include "calr/dissipation.hpp"
#include "calr/run_config.hpp"
#include "json.hpp"

namespace calr {

struct SweepRow {
    double beta = 0.0;
    double delta = 0.0;
    double E_xi = 0.0;
    double error_estimate = 0.0;
    double k0 = 0.0;
    double tau_a = 0.0;
    std::string regime;
    double T1 = NAN, T2 = NAN, T3 = NAN, T4 = NAN, T_sum = NAN;
    double theorem_bound = NAN;
    bool warning = false;
    std::string message;
};

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols = {"beta", "delta", "E_xi",  "error_estimate", "k0",
                                                  "tau_a", "regime", "T1",  "T2",             "T3",
                                                  "T4",   "T_sum",  "theorem_bound"};
    return cols;
}

struct BetaSummary {
    double beta = 0.0;
    double a = 0.0;
    std::string regime;
    double E_min = NAN, E_max = NAN;
    /// sup of E over each delta decade, largest delta first.
    std::vector<double> decade_envelope;
    /// Ratio of consecutive decade envelopes (next decade over previous).
    std::vector<double> envelope_growth;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<BetaSummary> summary;
    std::size_t warnings = 0;
};

/// Sup of values over each decade of delta, for delta sorted descending.
inline std::vector<double> decade_envelope(const std::vector<double>& delta, const std::vector<double>& value) {
    std::map<long, double, std::greater<>> env;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        // Decade n holds delta in (10^{n-1}, 10^n]; nudge so exact powers stay in their own decade.
        const long n = static_cast<long>(std::ceil(std::log10(delta[i]) - 1e-9));
        auto [it, fresh] = env.emplace(n, value[i]);
        if (!fresh) it->second = std::max(it->second, value[i]);
    }
    std::vector<double> out;
    for (const auto& [n, v] : env) out.push_back(v);
    return out;
}

namespace detail {

inline SweepRow evaluate_point(const RunConfig& c, const ChargeDensity& src, double beta, double delta,
                               const RegimeReport& regime) {
    SweepRow row;
    row.beta = beta;
    row.delta = delta;
    const SlabConfig cfg = slab_for(c, src, beta, delta);
    row.tau_a = tau(beta) * cfg.a;
    row.regime = regime_name(regime.regime);
    try {
        row.k0 = k0(cfg);
    } catch (const DeltaTooLarge&) {
        row.k0 = 0.0;
    }
    const auto E = dissipation(src, cfg, c.tol);
    row.E_xi = E.value;
    row.error_estimate = E.abs_error_estimate + E.tail_bound;
    row.warning = E.warning;
    row.message = E.message;
    try {
        const auto ch = upper_bound_chain(src, cfg, ChainMode::full);
        row.T1 = ch.T1.value;
        row.T2 = ch.T2.value;
        row.T3 = ch.T3.value;
        row.T4 = ch.T4.value;
        row.T_sum = ch.sum;
    } catch (const NotApplicable&) {
    }
    if (c.d_star && c.Lambda) {
        try {
            row.theorem_bound = theorem_lower_bound(src, cfg, *c.d_star, *c.Lambda).value;
        } catch (const NotApplicable&) {
        } catch (const InvalidParameter&) {
        }
    }
    return row;
}

}  // namespace detail

/// Evaluates every (beta, delta) grid point. Rows come out sorted by beta and
/// then by descending delta, whatever the worker count.
inline SweepResult run_sweep(const RunConfig& c) {
    validate(c);
    const SourcePtr src = make_source(c);
    std::vector<double> betas = c.beta;
    std::sort(betas.begin(), betas.end());
    const std::vector<double> deltas = delta_grid(c);

    std::vector<RegimeReport> regimes;
    for (double beta : betas) {
        const SlabConfig s = slab_for(c, *src, beta, deltas.empty() ? 0.5 : deltas.front());
        const SupportBox b = src->support();
        double ds = c.d_star.value_or(b.d0);
        if (ds < b.d0 || ds > b.d1) ds = b.d0;
        regimes.push_back(classify(*src, s, ds));
    }

    SweepResult out;
    const std::size_t n = betas.size() * deltas.size();
    out.rows.resize(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const std::size_t bi = i / deltas.size();
            out.rows[i] = detail::evaluate_point(c, *src, betas[bi], deltas[i % deltas.size()], regimes[bi]);
        }
    };
    const unsigned w = std::max(1u, std::min<unsigned>(c.workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (w == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < w; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
        BetaSummary s;
        s.beta = betas[bi];
        s.a = slab_for(c, *src, betas[bi], 0.5).a;
        s.regime = regime_name(regimes[bi].regime);
        std::vector<double> E;
        for (std::size_t j = 0; j < deltas.size(); ++j) E.push_back(out.rows[bi * deltas.size() + j].E_xi);
        if (!E.empty()) {
            s.E_min = *std::min_element(E.begin(), E.end());
            s.E_max = *std::max_element(E.begin(), E.end());
        }
        s.decade_envelope = decade_envelope(deltas, E);
        for (std::size_t j = 1; j < s.decade_envelope.size(); ++j) {
            s.envelope_growth.push_back(s.decade_envelope[j] / s.decade_envelope[j - 1]);
        }
        out.summary.push_back(s);
    }
    for (const auto& r : out.rows) out.warnings += r.warning ? 1 : 0;
    return out;
}

namespace detail {

inline std::string sci(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline nlohmann::ordered_json num(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    const auto& cols = sweep_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    using detail::sci;
    for (const auto& row : r.rows) {
        os << sci(row.beta) << ',' << sci(row.delta) << ',' << sci(row.E_xi) << ',' << sci(row.error_estimate)
           << ',' << sci(row.k0) << ',' << sci(row.tau_a) << ',' << row.regime << ',' << sci(row.T1) << ','
           << sci(row.T2) << ',' << sci(row.T3) << ',' << sci(row.T4) << ',' << sci(row.T_sum) << ','
           << sci(row.theorem_bound) << '\n';
    }
}

inline nlohmann::ordered_json summary_json(const SweepResult& r) {
    using detail::num;
    nlohmann::ordered_json j;
    j["points"] = r.rows.size();
    j["warnings"] = r.warnings;
    j["betas"] = nlohmann::ordered_json::array();
    for (const auto& s : r.summary) {
        nlohmann::ordered_json b;
        b["beta"] = s.beta;
        b["a"] = s.a;
        b["regime"] = s.regime;
        b["E_min"] = num(s.E_min);
        b["E_max"] = num(s.E_max);
        b["decade_envelope"] = nlohmann::ordered_json::array();
        for (double v : s.decade_envelope) b["decade_envelope"].push_back(num(v));
        b["envelope_growth"] = nlohmann::ordered_json::array();
        for (double v : s.envelope_growth) b["envelope_growth"].push_back(num(v));
        j["betas"].push_back(b);
    }
    return j;
}

inline void write_sweep_json(std::ostream& os, const SweepResult& r) {
    using detail::num;
    nlohmann::ordered_json j;
    j["columns"] = sweep_columns();
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json e;
        e["beta"] = row.beta;
        e["delta"] = row.delta;
        e["E_xi"] = num(row.E_xi);
        e["error_estimate"] = num(row.error_estimate);
        e["k0"] = row.k0;
        e["tau_a"] = row.tau_a;
        e["regime"] = row.regime;
        e["T1"] = num(row.T1);
        e["T2"] = num(row.T2);
        e["T3"] = num(row.T3);
        e["T4"] = num(row.T4);
        e["T_sum"] = num(row.T_sum);
        e["theorem_bound"] = num(row.theorem_bound);
        j["rows"].push_back(e);
    }
    j["summary"] = summary_json(r);
    os << std::setw(2) << j << '\n';
}

}  // namespace calr
