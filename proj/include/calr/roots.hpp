#pragma once

#include <cmath>
#include <cstddef>

namespace calr::roots {

/// Bisection for a sign change of f on [lo, hi]; stops when the bracket is
/// narrower than abs_tol or rel_tol times its midpoint.
template <class F>
double bisect(F&& f, double lo, double hi, double abs_tol = 1e-12, double rel_tol = 0.0,
              std::size_t max_iter = 400) {
    const bool lo_negative = f(lo) < 0.0;
    for (std::size_t i = 0; i < max_iter; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= abs_tol || hi - lo <= rel_tol * std::abs(mid)) break;
        if (mid <= lo || mid >= hi) break;
        if ((f(mid) < 0.0) == lo_negative) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Largest delta in (0, cap] such that pred(d) holds for every d in (0, delta].
///
/// The interval is scanned on a log grid from `floor` upward; the first failing
/// grid point is refined by bisection to abs_tol. Returns 0 when pred already
/// fails at `floor`, and `cap` when it never fails on the grid.
template <class P>
double largest_prefix(P&& pred, double cap = 1.0 - 1e-9, double abs_tol = 1e-12,
                      double floor = 1e-300, std::size_t grid = 4000) {
    if (!pred(floor)) return 0.0;
    const double lf = std::log(floor);
    const double lc = std::log(cap);
    double good = floor;
    for (std::size_t i = 1; i <= grid; ++i) {
        const double d = i == grid ? cap : std::exp(lf + (lc - lf) * static_cast<double>(i) /
                                                         static_cast<double>(grid));
        if (pred(d)) {
            good = d;
            continue;
        }
        double lo = good;
        double hi = d;
        while (hi - lo > abs_tol) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (pred(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return lo;
    }
    return cap;
}

}  // namespace calr::roots
