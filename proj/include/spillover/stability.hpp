#pragma once

// Local stability of equilibria via the reduced 6-D Jacobian (R_i eliminated
// through R_i = 1 - S_i - I_i). Two independent routes:
//   * analytic block Jacobian + Routh-Hurwitz on the diagonal 3x3 blocks,
//     valid wherever the cross-disease coupling vanishes (disease-free,
//     boundary, and s = 0 endemic equilibria);
//   * numeric eigenvalues of the full 6x6.
// The endemic equilibrium under spillover has no proven analytic criterion;
// it is classified from eigenvalues only and flagged as such.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spillover/equilibria.hpp"
#include "spillover/model.hpp"

namespace spillover {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

/// Reduced state ordering: (S_A, I_A, It_A, S_B, I_B, It_B).
inline Vector6 reduce_state(const State& x) {
    Vector6 u;
    u << x.s_a, x.i_a, x.it_a, x.s_b, x.i_b, x.it_b;
    return u;
}

inline State expand_state(const Vector6& u) {
    State x;
    x.s_a = u[0];
    x.i_a = u[1];
    x.it_a = u[2];
    x.r_a = 1.0 - u[0] - u[1];
    x.s_b = u[3];
    x.i_b = u[4];
    x.it_b = u[5];
    x.r_b = 1.0 - u[3] - u[4];
    return x;
}

namespace detail {

// Reduced vector field with the smooth transmission law (no clamping of
// negative perceived prevalence): this is the field the Jacobian linearizes,
// and it coincides with rhs() on the model domain It >= 0.
inline Vector6 reduced_rhs_smooth(const Params& p, const Vector6& u) {
    const double m_a = std::exp(-p.k * u[2]);
    const double m_b = std::exp(-p.k * u[5]);
    const double beta_a = p.beta0_a() * m_a * (1.0 - p.s * (1.0 - m_b));
    const double beta_b = p.beta0_b() * (1.0 - p.s * (1.0 - m_a)) * m_b;
    Vector6 d;
    d[0] = -beta_a * u[0] * u[1] + (1.0 - u[0] - u[1]) / p.tau_r;
    d[1] = beta_a * u[0] * u[1] - u[1] / p.tau_i;
    d[2] = (u[1] - u[2]) / p.tau_p;
    d[3] = -beta_b * u[3] * u[4] + (1.0 - u[3] - u[4]) / p.tau_r;
    d[4] = beta_b * u[3] * u[4] - u[4] / p.tau_i;
    d[5] = (u[4] - u[5]) / p.tau_p;
    return d;
}

} // namespace detail

/// Analytic Jacobian of the reduced system at x. Exact partial derivatives
/// of the transmission law; at boundary equilibria the lower-left coupling
/// block vanishes and the matrix is block upper-triangular.
inline Matrix6 reduced_jacobian(const Params& p, const State& x) {
    const double m_a = std::exp(-p.k * x.it_a);
    const double m_b = std::exp(-p.k * x.it_b);
    const double b0a = p.beta0_a(), b0b = p.beta0_b();
    const double beta_a = b0a * m_a * (1.0 - p.s * (1.0 - m_b));
    const double beta_b = b0b * (1.0 - p.s * (1.0 - m_a)) * m_b;
    // d beta_A / d It_A = -k beta_A ; d beta_A / d It_B = -k s b0a m_a m_b
    const double cross = p.k * p.s * b0a * m_a * m_b; // = -d beta_A/d It_B
    const double cross_b = p.k * p.s * b0b * m_a * m_b;

    Matrix6 J = Matrix6::Zero();
    J(0, 0) = -beta_a * x.i_a - 1.0 / p.tau_r;
    J(0, 1) = -beta_a * x.s_a - 1.0 / p.tau_r;
    J(0, 2) = p.k * beta_a * x.s_a * x.i_a;
    J(0, 5) = cross * x.s_a * x.i_a;
    J(1, 0) = beta_a * x.i_a;
    J(1, 1) = beta_a * x.s_a - 1.0 / p.tau_i;
    J(1, 2) = -p.k * beta_a * x.s_a * x.i_a;
    J(1, 5) = -cross * x.s_a * x.i_a;
    J(2, 1) = 1.0 / p.tau_p;
    J(2, 2) = -1.0 / p.tau_p;

    J(3, 3) = -beta_b * x.i_b - 1.0 / p.tau_r;
    J(3, 4) = -beta_b * x.s_b - 1.0 / p.tau_r;
    J(3, 5) = p.k * beta_b * x.s_b * x.i_b;
    J(3, 2) = cross_b * x.s_b * x.i_b;
    J(4, 3) = beta_b * x.i_b;
    J(4, 4) = beta_b * x.s_b - 1.0 / p.tau_i;
    J(4, 5) = -p.k * beta_b * x.s_b * x.i_b;
    J(4, 2) = -cross_b * x.s_b * x.i_b;
    J(5, 4) = 1.0 / p.tau_p;
    J(5, 5) = -1.0 / p.tau_p;
    return J;
}

/// Central-difference Jacobian of the reduced vector field, step h per
/// coordinate. Independent oracle for reduced_jacobian.
inline Matrix6 reduced_jacobian_fd(const Params& p, const State& x, double h = 1e-7) {
    const Vector6 u0 = reduce_state(x);
    Matrix6 J;
    for (int j = 0; j < 6; ++j) {
        Vector6 up = u0, um = u0;
        up[j] += h;
        um[j] -= h;
        J.col(j) = (detail::reduced_rhs_smooth(p, up) - detail::reduced_rhs_smooth(p, um)) /
                   (2.0 * h);
    }
    return J;
}

/// Coefficients (a1, a2, a3) of the monic characteristic cubic of a 3x3
/// block: lambda^3 + a1 lambda^2 + a2 lambda + a3.
inline std::array<double, 3> characteristic_cubic(const Eigen::Matrix3d& m) {
    const double a1 = -m.trace();
    const double a2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                      m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    const double a3 = -m.determinant();
    return {a1, a2, a3};
}

/// Routh-Hurwitz test for a monic cubic: all roots in the open left half
/// plane iff a1 > 0, a3 > 0 and a1 a2 - a3 > 0.
inline bool routh_hurwitz_block(double a1, double a2, double a3) {
    return a1 > 0.0 && a3 > 0.0 && a1 * a2 - a3 > 0.0;
}

/// Largest real part over the eigenvalues of the 6x6 Jacobian.
inline double leading_eigenvalue_real(const Matrix6& j) {
    Eigen::EigenSolver<Matrix6> solver(j, /*computeEigenvectors=*/false);
    return solver.eigenvalues().real().maxCoeff();
}

enum class StabilityLabel { Stable, Unstable, Marginal };

inline const char* to_string(StabilityLabel l) {
    switch (l) {
        case StabilityLabel::Stable: return "stable";
        case StabilityLabel::Unstable: return "unstable";
        case StabilityLabel::Marginal: return "marginal";
    }
    return "?";
}

enum class StabilityMethod { RouthHurwitz, NumericEigen, Both };

inline const char* to_string(StabilityMethod m) {
    switch (m) {
        case StabilityMethod::RouthHurwitz: return "routh_hurwitz";
        case StabilityMethod::NumericEigen: return "numeric_eigen";
        case StabilityMethod::Both: return "both";
    }
    return "?";
}

struct StabilityVerdict {
    StabilityLabel label = StabilityLabel::Unstable;
    StabilityMethod method = StabilityMethod::Both;
    double leading_eigen_real = 0.0;
    std::vector<std::array<double, 3>> rh_coefficients; ///< per diagonal block
    /// True for the endemic equilibrium under spillover, where the analytic
    /// stability condition is only conjectured and the verdict is numeric.
    bool conjecture_region = false;

    bool stable() const { return label == StabilityLabel::Stable; }
};

/// Eigenvalue real parts closer to zero than this are reported Marginal:
/// below the composed noise of the root solves and the eigensolver.
inline constexpr double kMarginalBand = 1e-9;

/// Classifies an existing equilibrium. For the disease-free, boundary and
/// no-spillover endemic equilibria the analytic Routh-Hurwitz route and the
/// numeric eigenvalue route must agree outside the marginal band; the
/// endemic equilibrium with s > 0 is numeric-only.
inline StabilityVerdict classify(const Params& p, const EquilibriumReport& report) {
    if (!report.exists)
        throw std::invalid_argument("classify: equilibrium does not exist");

    const Matrix6 j = reduced_jacobian(p, report.full_state);
    StabilityVerdict v;
    v.leading_eigen_real = leading_eigenvalue_real(j);
    const bool numeric_stable = v.leading_eigen_real < 0.0;
    const bool marginal = std::abs(v.leading_eigen_real) < kMarginalBand;

    if (report.kind == EquilibriumKind::Endemic && p.s > 0.0) {
        v.method = StabilityMethod::NumericEigen;
        v.conjecture_region = true;
        v.label = marginal ? StabilityLabel::Marginal
                           : (numeric_stable ? StabilityLabel::Stable : StabilityLabel::Unstable);
        return v;
    }

    // Cross-disease coupling vanishes here, so the spectrum is the union of
    // the two diagonal blocks.
    v.method = StabilityMethod::Both;
    bool rh_stable = true;
    for (int blk = 0; blk < 2; ++blk) {
        const auto coeff = characteristic_cubic(j.block<3, 3>(3 * blk, 3 * blk));
        rh_stable = rh_stable && routh_hurwitz_block(coeff[0], coeff[1], coeff[2]);
        v.rh_coefficients.push_back(coeff);
    }

    if (marginal) {
        v.label = StabilityLabel::Marginal;
        return v;
    }
    if (rh_stable != numeric_stable)
        throw std::runtime_error("classify: Routh-Hurwitz and eigenvalue routes disagree "
                                 "outside the marginal band");
    v.label = rh_stable ? StabilityLabel::Stable : StabilityLabel::Unstable;
    return v;
}

} // namespace spillover
