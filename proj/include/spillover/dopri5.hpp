#pragma once

// Embedded Dormand-Prince 5(4) pair with PI step-size control and the
// standard fourth-order continuous extension. Sample times are served from
// the dense interpolant, never by forcing steps, so the error controller
// sees only the dynamics.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace spillover {

struct StepSizeUnderflow : std::runtime_error {
    explicit StepSizeUnderflow(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Butcher tableau of DOPRI5 (FSAL: stage 7 = derivative at the new point).
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - bhat, the embedded 4th-order error weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Weights of the dense-output quartic.
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;

} // namespace detail

/// One accepted DOPRI5 step plus the coefficients of its dense interpolant.
template <std::size_t N>
struct DenseStep {
    double t0 = 0.0, h = 0.0;
    std::array<std::array<double, N>, 5> rcont{}; // interpolation coefficients

    /// State at t0 + theta*h for theta in [0, 1].
    std::array<double, N> eval(double theta) const {
        const double th1 = 1.0 - theta;
        std::array<double, N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = rcont[0][i] +
                   theta * (rcont[1][i] +
                            th1 * (rcont[2][i] + theta * (rcont[3][i] + th1 * rcont[4][i])));
        return y;
    }
};

/// Integrates y' = f(t, y) from t0 to t1, invoking `on_step` after every
/// accepted step with the dense interpolant for that interval.
///
/// Error per step is controlled against atol + rtol*|y| in RMS norm.
/// Throws StepSizeUnderflow when |h| falls below 1e-12*(t1 - t0).
template <std::size_t N, class F, class OnStep>
void dopri5_integrate(F&& f, double t0, double t1, std::array<double, N> y, double rtol,
                      double atol, double max_step, OnStep&& on_step) {
    using namespace detail;
    using Vec = std::array<double, N>;

    if (!(t1 > t0)) throw std::invalid_argument("dopri5: t1 must exceed t0");
    if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("dopri5: tolerances must be > 0");

    const double span = t1 - t0;
    const double hmin = 1e-12 * span;
    const double hmax = max_step > 0.0 ? std::min(max_step, span) : span;

    Vec k1 = f(t0, y);

    // Initial step size: second-derivative estimate following Hairer's hinit.
    double h;
    {
        double dn0 = 0.0, dn1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = atol + rtol * std::abs(y[i]);
            dn0 += (y[i] / sc) * (y[i] / sc);
            dn1 += (k1[i] / sc) * (k1[i] / sc);
        }
        dn0 = std::sqrt(dn0 / N);
        dn1 = std::sqrt(dn1 / N);
        double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * (dn0 / dn1);
        h0 = std::min(h0, hmax);
        Vec y1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h0 * k1[i];
        Vec k2 = f(t0 + h0, y1);
        double dn2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = atol + rtol * std::abs(y[i]);
            dn2 += ((k2[i] - k1[i]) / sc) * ((k2[i] - k1[i]) / sc);
        }
        dn2 = std::sqrt(dn2 / N) / h0;
        const double dmax = std::max(dn1, dn2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                        : std::pow(0.01 / dmax, 0.2);
        h = std::min({100.0 * h0, h1, hmax});
    }

    const double safety = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    const double fac_min = 0.2, fac_max = 10.0; // step-size change limits
    double err_old = 1e-4;
    double t = t0;
    bool rejected = false;
    Vec k2, k3, k4, k5, k6, k7, ytmp, ynew;

    while (t < t1) {
        if (h < hmin && h < t1 - t)
            throw StepSizeUnderflow("dopri5: step size underflow at t = " + std::to_string(t));
        bool final_step = false;
        if (t + h >= t1) {
            h = t1 - t;
            final_step = true;
        }

        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        k2 = f(t + c2 * h, ytmp);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(t + c3 * h, ytmp);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(t + c4 * h, ytmp);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(t + c5 * h, ytmp);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        k6 = f(t + h, ytmp);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = f(t + h, ynew);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / N);

        if (err <= 1.0) {
            DenseStep<N> dense;
            dense.t0 = t;
            dense.h = h;
            for (std::size_t i = 0; i < N; ++i) {
                const double dy = ynew[i] - y[i];
                const double bspl = h * k1[i] - dy;
                dense.rcont[0][i] = y[i];
                dense.rcont[1][i] = dy;
                dense.rcont[2][i] = bspl;
                dense.rcont[3][i] = dy - h * k7[i] - bspl;
                dense.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                         d6 * k6[i] + d7 * k7[i]);
            }
            t = final_step ? t1 : t + h;
            y = ynew;
            k1 = k7; // FSAL
            on_step(dense, t, y);

            const double fac =
                std::pow(err > 0.0 ? err : 1e-16, expo1) / std::pow(err_old, beta) / safety;
            double hnew = h / std::clamp(fac, 1.0 / fac_max, 1.0 / fac_min);
            if (rejected) hnew = std::min(hnew, h); // no growth right after a rejection
            h = std::min(hnew, hmax);
            err_old = std::max(err, 1e-4);
            rejected = false;
        } else {
            const double fac = std::pow(err, expo1) / safety;
            h = h / std::min(fac, 1.0 / fac_min);
            rejected = true;
        }
    }
}

} // namespace spillover
