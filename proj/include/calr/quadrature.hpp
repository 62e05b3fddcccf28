#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace calr::quad {

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

}  // namespace detail

template <class V>
struct PanelEstimate {
    double lo = 0.0;
    double hi = 0.0;
    V value{};
    double error = 0.0;
};

/// One 15-point Kronrod panel with the embedded 7-point Gauss error estimate,
/// scaled the way QUADPACK does it.
template <class V = double, class F>
PanelEstimate<V> gauss_kronrod15(F&& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const V fc = f(center);
    V resg = fc * detail::wg[3];
    V resk = fc * detail::wgk[7];
    double resabs = detail::wgk[7] * detail::magnitude(fc);
    V fv1[7];
    V fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * detail::xgk[j];
        fv1[j] = f(center - dx);
        fv2[j] = f(center + dx);
        const V sum = fv1[j] + fv2[j];
        resk += sum * detail::wgk[j];
        resabs += detail::wgk[j] * (detail::magnitude(fv1[j]) + detail::magnitude(fv2[j]));
        if (j % 2 == 1) resg += sum * detail::wg[j / 2];
    }
    const V reskh = resk * 0.5;
    double resasc = detail::wgk[7] * detail::magnitude(fc - reskh);
    for (int j = 0; j < 7; ++j) {
        resasc += detail::wgk[j] *
                  (detail::magnitude(fv1[j] - reskh) + detail::magnitude(fv2[j] - reskh));
    }
    const double scale = std::abs(half);
    resasc *= scale;
    resabs *= scale;
    double err = detail::magnitude((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(50.0 * eps * resabs, err);
    }
    return {lo, hi, resk * half, err};
}

struct Options {
    double abs_tol = 0.0;
    double rel_tol = 1e-10;
    std::size_t max_panels = 1u << 14;
};

template <class V>
struct Result {
    V value{};
    double abs_error = 0.0;
    std::size_t panels = 0;
    bool converged = false;
};

/// Globally adaptive Gauss-Kronrod integration over consecutive intervals
/// [breaks[0], breaks[1]], [breaks[1], breaks[2]], ...
///
/// The panel with the largest error is bisected until the summed error meets
/// max(abs_tol, rel_tol * |value|) or the panel budget is exhausted. The final
/// value is summed in left-endpoint order so it does not depend on the order
/// in which panels were refined.
template <class V = double, class F>
Result<V> integrate(F&& f, std::span<const double> breaks, const Options& opt = {}) {
    Result<V> out;
    if (breaks.size() < 2) return out;

    auto by_error = [](const PanelEstimate<V>& x, const PanelEstimate<V>& y) {
        if (x.error != y.error) return x.error < y.error;
        return x.lo > y.lo;
    };
    std::priority_queue<PanelEstimate<V>, std::vector<PanelEstimate<V>>, decltype(by_error)>
        queue(by_error);

    V total{};
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] == breaks[i]) continue;
        auto p = gauss_kronrod15<V>(f, breaks[i], breaks[i + 1]);
        total += p.value;
        total_err += p.error;
        queue.push(p);
    }

    auto target = [&] {
        return std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total));
    };

    while (!queue.empty() && total_err > target() && queue.size() < opt.max_panels) {
        const PanelEstimate<V> worst = queue.top();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) break;  // interval exhausted
        queue.pop();
        auto left = gauss_kronrod15<V>(f, worst.lo, mid);
        auto right = gauss_kronrod15<V>(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }

    std::vector<PanelEstimate<V>> panels;
    panels.reserve(queue.size());
    while (!queue.empty()) {
        panels.push_back(queue.top());
        queue.pop();
    }
    std::sort(panels.begin(), panels.end(),
              [](const auto& x, const auto& y) { return x.lo < y.lo; });
    V sum{};
    double err = 0.0;
    for (const auto& p : panels) {
        sum += p.value;
        err += p.error;
    }
    out.value = sum;
    out.abs_error = err;
    out.panels = panels.size();
    out.converged = err <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(sum));
    return out;
}

template <class V = double, class F>
Result<V> integrate(F&& f, double lo, double hi, const Options& opt = {}) {
    const double breaks[2] = {lo, hi};
    return integrate<V>(std::forward<F>(f), std::span<const double>(breaks, 2), opt);
}

/// Breakpoints lo, lo+w, lo+2w, ..., hi with the last panel shortened.
inline std::vector<double> uniform_breaks(double lo, double hi, double max_width) {
    std::vector<double> b{lo};
    if (!(hi > lo)) return b;
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / max_width));
    const std::size_t panels = std::max<std::size_t>(n, 1);
    for (std::size_t i = 1; i < panels; ++i) {
        b.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(panels));
    }
    b.push_back(hi);
    return b;
}

}  // namespace calr::quad
