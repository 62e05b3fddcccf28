// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "calr/calr.hpp"
#include "oracles.hpp"

using namespace calr;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double rel(std::complex<double> got, std::complex<double> ref) { return std::abs(got - ref) / std::abs(ref); }

SlabConfig slab(double a, double delta, double beta, double lambda = 1.0) {
    SlabConfig c;
    c.a = a;
    c.delta = delta;
    c.beta = beta;
    c.lambda = lambda;
    c.xi = 0.25 * a;
    return c;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, i / double(n - 1)));
    return v;
}

// 1. closed-form transforms against brute-force quadrature
Outcome transforms() {
    const auto t0 = Clock::now();
    const RectangleSource r(6, 6, 1, 1, 1.0);
    const oracle::Rect o{6, 6, 1, 1, 1.0};
    double worst_rho = 0, worst_I = 0, worst_mod = 0, worst_circle = 0;
    for (double k : logspace(0.05, 50, 20)) {
        for (double x : {5.1, 6.0, 6.9}) worst_rho = std::max(worst_rho, rel(r.rho_hat(x, k), o.rho_hat_numeric(x, k)));
        const auto ref = o.I_scaled_numeric(k);
        worst_I = std::max(worst_I, rel(transform_I_shifted(r, k).to_complex(), ref));
        // |I_k| e^{k d0} = (4/k^2) sin^2(k/2)(1 - e^{-2k})
        const double s = std::sin(0.5 * k);
        const double mod = 4.0 / (k * k) * s * s * (1 - std::exp(-2 * k));
        worst_mod = std::max(worst_mod, std::abs(mod - std::abs(ref)) / std::abs(ref));
    }
    const CircleSource c(6, 6, 1, 1.0);
    for (double k : logspace(0.05, 50, 20)) {
        const auto ref = oracle::circle_I_scaled_grid(6, 6, 1, 1.0, k, 1000, 1000);
        worst_circle = std::max(worst_circle, rel(transform_I_shifted(c, k).to_complex(), ref));
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    Outcome out;
    out.pass = worst_rho <= 1e-8 && worst_I <= 1e-8 && worst_mod <= 1e-8 && worst_circle <= 1e-7 && secs < 120;
    out.detail = fmt("rect rho_hat %.2e, I_k %.2e, |I_k| %.2e (tol 1e-8); circle %.2e (tol 1e-7)", worst_rho, worst_I,
                     worst_mod, worst_circle) +
                 fmt("; %.1f s (limit 120)", secs);
    return out;
}

// 2. interface continuity and the matrix ODE at random (delta, k, x)
Outcome faithfulness() {
    auto src = std::make_shared<RectangleSource>(6, 6, 1, 1, 1.0);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0, 1);
    double worst_cont = 0, worst_ode = 0;
    for (int i = 0; i < 100; ++i) {
        const double delta = std::pow(10.0, -1 - 13 * u(rng));
        const double k = std::pow(10.0, -2 + 3 * u(rng));
        const double a = 1.0 + 2.0 * u(rng);
        const double x = a + 1e-3 + (9.0 - a) * u(rng);
        const FourierPotential pot(src, slab(a, delta, 0.5));
        worst_cont = std::max(worst_cont, continuity_defect(pot, k).max());
        worst_ode = std::max(worst_ode, matrix_ode_residual(pot, x, k));
    }
    return {worst_cont <= 1e-9 && worst_ode <= 1e-6,
            fmt("continuity %.2e (tol 1e-9), ODE residual %.2e (tol 1e-6)", worst_cont, worst_ode)};
}

// 3. Plancherel in the core
Outcome plancherel_check() {
    const double a = 1.0;
    const auto p = plancherel(std::make_shared<RectangleSource>(6, 6, 1, 1, 1.0), slab(a, 1e-2, 0.5), -4 * a);
    return {p.rel_diff() <= 1e-4,
            fmt("real %.10e vs Fourier %.10e, rel %.2e (tol 1e-4)", p.real_space, p.fourier_space, p.rel_diff())};
}

// 4. lemma inequalities on seeded samples
Outcome lemmas() {
    const auto t0 = Clock::now();
    SamplePlan plan;
    plan.samples = 10000;
    const auto rep = lemma_suite(RectangleSource(6, 6, 1, 1, 1.0), slab(2.0, 1e-4, 0.5), plan);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::size_t viol = 0, n = 0;
    double margin = INFINITY;
    for (const auto& l : rep.lemmas) {
        viol += l.violations;
        n += l.samples;
        margin = std::min(margin, l.min_margin);
    }
    return {viol == 0 && secs < 300,
            fmt("%.0f inequalities, %.0f samples, %.0f violations, min log-margin %.2e", double(rep.lemmas.size()),
                double(n), double(viol), margin) +
                fmt("; %.1f s (limit 300)", secs)};
}

// 5. blow-up inside the region of influence, decay at its edge
Outcome sandwich() {
    const auto t0 = Clock::now();
    RunConfig grow = preset("fig2");
    grow.beta = {0.8};
    grow.delta_min = 1e-14;
    grow.workers = 1;
    const auto gr = run_sweep(grow);
    const auto& env = gr.summary[0].decade_envelope;
    bool env_up = env.size() == 11;
    for (std::size_t i = 1; i < env.size(); ++i) env_up = env_up && env[i] > env[i - 1];

    const auto src = make_source(grow);
    const SlabConfig c = slab_for(grow, *src, 0.8, 1e-4);
    const auto seq = blowup_sequence(*src, c, 2, 10);
    const auto bl = evaluate_blowup(*src, c, seq);
    const bool seq_up = bl.increasing && seq.j.size() == 9;

    RunConfig edge = preset("fig6");
    edge.beta = {0.8};
    edge.delta_min = 1e-12;
    const auto er = run_sweep(edge);
    bool below = true;
    std::size_t checked = 0;
    for (const auto& row : er.rows) {
        if (std::isfinite(row.T_sum)) ++checked;
        below = below && std::isfinite(row.T_sum) && row.E_xi <= row.T_sum;
    }
    const double ratio = er.rows.back().E_xi / er.rows.front().E_xi;
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    Outcome out;
    out.pass = env_up && seq_up && below && ratio < 1e-2 && secs < 600;
    out.detail = fmt("envelopes increasing over %.0f decades: ", double(env.size())) + (env_up ? "yes" : "no") +
                 fmt("; blow-up j=2..%.0f increasing: ", double(seq.j.empty() ? 0 : seq.j.back())) +
                 (seq_up ? "yes" : "no") + fmt("; E <= T sum at %.0f/%.0f points", double(checked), double(er.rows.size())) +
                 (below ? "" : " (violated)") + fmt("; E(1e-12)/E(1e-4) = %.2e (limit 1e-2); %.1f s (limit 600)", ratio, secs);
    return out;
}

// 6. small-delta limits of the chain terms at d0 = tau a
Outcome limits() {
    const double beta = 0.5;
    const double a = 5.0 / tau(beta);
    const RectangleSource src(6, 6, 1, 1, 1.0);
    const auto ch = upper_bound_chain(src, slab(a, 1e-10, beta, 1.0));
    const double limit = ch.T1.limit.value_or(NAN);
    const double dev = std::abs(ch.T1.value - limit) / std::abs(limit);
    const double r2 = ch.T2.value / ch.T1.value, r4 = ch.T4.value / ch.T1.value;
    return {dev <= 0.05 && r2 < 1e-6 && r4 < 1e-6,
            fmt("T1 %.4e vs limit %.4e, deviation %.2e (tol 0.05)", ch.T1.value, limit, dev) +
                fmt("; T2/T1 %.2e, T4/T1 %.2e (tol 1e-6)", r2, r4)};
}

// 7. the same source inside the region of influence for beta = 1/2, outside for beta = 2
Outcome beta_sensitivity() {
    RunConfig c;
    c.a_rule = ARule::fixed;
    c.a = 10.0;
    c.kind = "rectangle";
    c.x0 = 16.0;
    c.y0 = 0.0;
    c.d = c.h = 0.5;
    c.beta = {0.5, 2.0};
    c.delta_max = 1e-4;
    c.delta_min = 1e-12;
    c.points_per_decade = 10;
    c.d_star = 15.5;
    const auto r = run_sweep(c);
    const auto& lo = r.summary[0];
    const auto& hi = r.summary[1];
    const bool inside = lo.regime == "weak_calr" || lo.regime == "strong_calr";
    const bool outside = hi.regime == "no_calr";
    const double g_lo = lo.decade_envelope.back() / lo.decade_envelope.front();
    const double g_hi = hi.decade_envelope.back() / hi.decade_envelope.front();
    return {inside && outside && g_lo > 1.0 && g_hi < 1.0,
            std::string("beta 0.5: ") + lo.regime + fmt(", envelope ratio %.3e; ", g_lo) + "beta 2: " + hi.regime +
                fmt(", envelope ratio %.3e", g_hi)};
}

// 8. far-field boundedness
Outcome boundedness() {
    auto src = std::make_shared<RectangleSource>(6, 6, 1, 1, 1.0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    std::size_t bad = 0, total = 0;
    double worst9 = 0, worst10 = 0;
    for (double delta : {1e-2, 1e-6, 1e-12}) {
        const SlabConfig c = slab(1.0, delta, 0.5);
        const auto cert = boundedness_certificates(*src, c);
        std::vector<FieldPoint> core, far;
        for (int i = 0; i < 50; ++i) core.push_back({cert.core_threshold - 0.01 - 10 * u(rng), -20 + 40 * u(rng)});
        for (int i = 0; i < 50; ++i) far.push_back({cert.matrix_threshold + 0.01 + 10 * u(rng), -20 + 40 * u(rng)});
        const auto fc = reconstruct_real(src, c, core, 60.0);
        const auto ff = reconstruct_real(src, c, far, 60.0);
        for (const auto& v : fc.values) {
            worst9 = std::max(worst9, std::abs(v) / cert.C9);
            bad += std::abs(v) > cert.C9;
            ++total;
        }
        for (const auto& v : ff.values) {
            worst10 = std::max(worst10, std::abs(v) / cert.C10);
            bad += std::abs(v) > cert.C10;
            ++total;
        }
    }
    return {bad == 0, fmt("%.0f of %.0f points above the certificate; max |V|/C9 %.2e, max |V|/C10 %.2e", double(bad),
                          double(total), worst9, worst10)};
}

// 9. byte-identical sweeps
Outcome determinism() {
    RunConfig c = preset("fig6");
    auto run = [&](unsigned w) {
        c.workers = w;
        std::ostringstream os;
        write_sweep_csv(os, run_sweep(c));
        return os.str();
    };
    const std::string a = run(1), b = run(1), d = run(4);
    return {a == b && a == d && !a.empty(),
            fmt("%.0f bytes; repeat identical: ", double(a.size())) + (a == b ? "yes" : "no") +
                "; 4 workers identical: " + (a == d ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"transform oracles", transforms},
        {"interface and ODE faithfulness", faithfulness},
        {"Plancherel round trip", plancherel_check},
        {"lemma inequality suite", lemmas},
        {"blow-up and decay", sandwich},
        {"chain limits at d0 = tau a", limits},
        {"beta sensitivity of the critical depth", beta_sensitivity},
        {"far-field boundedness", boundedness},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %zu %s: %s -- %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed ? 1 : 0;
}
