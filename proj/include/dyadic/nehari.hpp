#pragma once

#include "dyadic/core.hpp"
#include "dyadic/linsys.hpp"

#include <optional>

namespace dyadic {

/// Gramian-balanced realization with its Hankel singular values.
struct BalancedRealization {
    Matrix A_b;
    Matrix B_b;
    Matrix C_b;
    Vector hsv;  ///< nonincreasing, positive
};

/// Stable compensator (H_A, H_B, H_C, optional D_H) approximating the
/// anticausal adjoint of a closed-loop map.
struct NehariApproximant {
    Matrix H_A;
    Matrix H_B;
    Matrix H_C;
    Matrix D_H;  ///< 0 x 0 when absent
    double achieved_error = 0.0;  ///< frequency-gridded sup of the error system
    double optimal_error = 0.0;   ///< leading Hankel singular value
    Vector hsv;

    bool has_feedthrough() const { return D_H.size() > 0; }
    Index order() const { return H_A.rows(); }

    /// D_H + H_C (s I - H_A)^-1 H_B at s = j omega.
    ComplexMatrix frequency_response(double omega) const;

    /// DC value D_H - H_C H_A^-1 H_B.
    Matrix dc_gain() const;
};

/// Cost-gap constant S = (||G_m||_inf + ||R^-1/2||) * sigma_1.
struct SuboptimalityBound {
    double S = 0.0;
    double g_inf_norm = 0.0;
    double r_inv_sqrt_norm = 0.0;
    double hankel_norm = 0.0;
};

/// Gramian-balanced form of a Hurwitz system; states with
/// sigma_i < 1e-10 sigma_1 are truncated to enforce minimality.
BalancedRealization balance(const StateSpaceSystem& sys);

/// C (j omega I - A)^-1 B.
ComplexMatrix frequency_response(const StateSpaceSystem& sys, double omega);

/// H-infinity norm by a 400-point log frequency grid (scaled by the spectral
/// abscissa magnitude) with golden-section refinement; the DC point is
/// always included.
double hinf_norm(const StateSpaceSystem& sys);

/// Best stable approximation of the anticausal adjoint of G_m in the
/// L-infinity sense (optimal distance = sigma_1), via the all-pass
/// embedding on the balanced realization.
///
/// When `enforce_strictly_proper` is set, the feedthrough is folded through
/// a fast real pole, trading a documented increase of achieved_error for a
/// strictly proper compensator. `compensator_order`, when given, balanced-
/// truncates the dynamic part to that order and reports the larger error.
NehariApproximant solve_nehari(const StateSpaceSystem& G_m, const Matrix& R,
                               bool enforce_strictly_proper = false,
                               std::optional<Index> compensator_order = std::nullopt);

/// Nehari solution corrected by a slow first-order term so that
/// G_m(0) R^-1 X(0) = I exactly; required for asymptotic tracking of
/// constant references.
NehariApproximant solve_constrained_nehari(const StateSpaceSystem& G_m, const Matrix& R);

/// S = (||G_m||_inf + ||R^-1/2||) * hankel_norm.
SuboptimalityBound suboptimality_constant(const StateSpaceSystem& G_m, const Matrix& R);

/// Sup over the frequency grid of || G_m(jw)^H - X(jw) ||_2 for the
/// compensator X; shared by synthesis and validation.
double adjoint_approximation_error(const StateSpaceSystem& G_m,
                                   const NehariApproximant& X);

}  // namespace dyadic
