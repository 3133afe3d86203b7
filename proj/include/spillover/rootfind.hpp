#pragma once

// Bracketing scalar root finder. Bisection only: every root solved in this
// project comes with a guaranteed sign-changing bracket from a monotonicity
// argument, so robustness is free.

#include <cmath>
#include <stdexcept>
#include <string>

namespace spillover {

struct BracketFailure : std::runtime_error {
    explicit BracketFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Finds x in [lo, hi] with f(x) = 0 to absolute tolerance xtol.
/// Requires f(lo) and f(hi) to have opposite (or zero) signs.
template <class F>
double bisect(F&& f, double lo, double hi, double xtol = 1e-13, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw BracketFailure("bisect: no sign change on [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
    for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // interval at floating-point resolution
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace spillover
