#pragma once

// Derivative-free simplex minimizer with the classic coefficient set
// (reflection 1, expansion 2, contraction 1/2, shrink 1/2) and the usual
// best-point ordering and termination rules. Box constraints are handled by
// callers through a transform of the search variables.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace spillover {

struct NelderMeadOptions {
    double tol_x = 1e-7;      ///< simplex diameter (inf-norm) termination
    double tol_f_rel = 1e-8;  ///< function spread relative to |f_best|
    double tol_f_abs = 1e-14; ///< absolute floor of the spread test
    std::size_t max_eval = 0; ///< 0 = 5000 * dimension
    double init_rel_step = 0.05;    ///< relative perturbation of nonzero coordinates
    double init_abs_step = 0.00025; ///< perturbation of zero coordinates
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    bool converged = false;
    std::size_t n_eval = 0;
};

template <class F>
NelderMeadResult nelder_mead(F&& fn, const std::vector<double>& x0,
                             const NelderMeadOptions& opt = {}) {
    const std::size_t n = x0.size();
    const std::size_t max_eval = opt.max_eval > 0 ? opt.max_eval : 5000 * n;

    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> fval(n + 1);
    NelderMeadResult res;

    auto eval = [&](const std::vector<double>& x) {
        ++res.n_eval;
        return fn(x);
    };

    for (std::size_t i = 1; i <= n; ++i) {
        double& xi = simplex[i][i - 1];
        xi = xi != 0.0 ? xi * (1.0 + opt.init_rel_step) : opt.init_abs_step;
    }
    for (std::size_t i = 0; i <= n; ++i) fval[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto sort_order = [&] {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fval[a] < fval[b]; });
    };

    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    for (;;) {
        sort_order();
        const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];

        double fspread = 0.0, xspread = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            fspread = std::max(fspread, std::abs(fval[order[i]] - fval[best]));
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t d = 0; d < n; ++d)
                xspread = std::max(xspread, std::abs(simplex[order[i]][d] - simplex[best][d]));
        if (fspread <= std::max(opt.tol_f_abs, opt.tol_f_rel * std::abs(fval[best])) &&
            xspread <= opt.tol_x) {
            res.converged = true;
            break;
        }
        if (res.n_eval >= max_eval) break;

        for (std::size_t d = 0; d < n; ++d) {
            double sum = 0.0;
            for (std::size_t i = 0; i <= n; ++i)
                if (i != worst) sum += simplex[i][d];
            centroid[d] = sum / static_cast<double>(n);
        }

        for (std::size_t d = 0; d < n; ++d) xr[d] = 2.0 * centroid[d] - simplex[worst][d];
        const double fr = eval(xr);

        if (fr < fval[best]) {
            for (std::size_t d = 0; d < n; ++d) xe[d] = centroid[d] + 2.0 * (xr[d] - centroid[d]);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                fval[worst] = fe;
            } else {
                simplex[worst] = xr;
                fval[worst] = fr;
            }
        } else if (fr < fval[second_worst]) {
            simplex[worst] = xr;
            fval[worst] = fr;
        } else {
            bool shrink = false;
            if (fr < fval[worst]) { // outside contraction
                for (std::size_t d = 0; d < n; ++d)
                    xc[d] = centroid[d] + 0.5 * (xr[d] - centroid[d]);
                const double fc = eval(xc);
                if (fc <= fr) {
                    simplex[worst] = xc;
                    fval[worst] = fc;
                } else {
                    shrink = true;
                }
            } else { // inside contraction
                for (std::size_t d = 0; d < n; ++d)
                    xc[d] = centroid[d] - 0.5 * (centroid[d] - simplex[worst][d]);
                const double fc = eval(xc);
                if (fc < fval[worst]) {
                    simplex[worst] = xc;
                    fval[worst] = fc;
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d)
                        simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
                    fval[i] = eval(simplex[i]);
                }
            }
        }
    }

    sort_order();
    res.x = simplex[order[0]];
    res.f = fval[order[0]];
    return res;
}

} // namespace spillover
