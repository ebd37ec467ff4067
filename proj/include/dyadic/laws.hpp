#pragma once

#include "dyadic/core.hpp"
#include "dyadic/linsys.hpp"
#include "dyadic/riccati.hpp"

#include <optional>

namespace dyadic {

enum class LawKind {
    Lqr,
    Lqt,
    PureFormRegulator,
    PureFormTracker,
    Sdre,
    OracleTracker,       ///< feedforward from the non-causal backward solve
    DynamicCompensator,  ///< feedforward from a causal compensator state
};

const char* law_kind_name(LawKind kind);

/// A control law as a pure map (t, v_h, v_p) -> u.
///
/// Every law built from one RiccatiSolution shares the identical gain K and
/// evaluates as
///     u = -K (v_h + v_p) + Gp v_p + ff + Mf f(v_h + v_p) + ff_t(t),
/// with unused pieces empty. Laws acting on the full state only (LQR, LQT,
/// SDRE) have Gp = 0.
struct ControlLaw {
    LawKind kind = LawKind::Lqr;
    Matrix K;                           ///< shared state gain
    Matrix Gp;                          ///< extra gain on the particular state
    Vector ff;                          ///< constant feedforward
    Matrix Mf;                          ///< gain on the nonlinearity value
    std::function<Vector(const Vector&)> f;  ///< nonlinearity hook for SDRE
    std::optional<SignalTimeline> ff_timeline;  ///< time-indexed feedforward

    Index input_dim() const { return K.rows(); }

    Vector evaluate(double t, const Vector& v_h, const Vector& v_p) const;

    /// Pure-form laws only: the dyadic form -K v_h - R^-1 B' W_o v_p (- ff).
    /// Must agree with evaluate() to machine precision.
    Vector evaluate_split_form(const Vector& v_h, const Vector& v_p) const;
};

/// Exponential fit of the gap between two laws along a shared trajectory.
struct LawGapReport {
    Vector times;
    Vector gap;                  ///< ||u1 - u2|| per sample
    double fitted_decay_rate = 0.0;
    double sup_gap = 0.0;
    Index fit_samples = 0;
};

/// u(v) = -K v.
ControlLaw lqr_law(const RiccatiSolution& sol);

/// u(v) = -K v - R^-1 B' (A_m')^-1 C' r for a constant reference r.
ControlLaw lqt_law(const RiccatiSolution& sol, const Vector& r);

/// u(v_h, v_p) = -K v_h - R^-1 B' W_o v_p.
ControlLaw pure_form_regulator(const RiccatiSolution& sol, const GramianResult& W_o);

/// u(v_h, v_p) = -K v_h - R^-1 B' (W_o v_p + (A_m')^-1 C' r).
ControlLaw pure_form_tracker(const RiccatiSolution& sol, const GramianResult& W_o,
                             const Vector& r);

/// u(v) = -K v - R^-1 B' (A_m')^-1 C' r + R^-1 B' (A_m')^-1 Pi f(v).
ControlLaw sdre_law(const RiccatiSolution& sol, const SemilinearPlant& plant,
                    const Vector& r);

/// Pure-form law whose feedforward -R^-1 B' q(t) comes from a backward solve.
ControlLaw oracle_tracker(const RiccatiSolution& sol, const SignalTimeline& u_R);

/// Backward RK4 of dq/dt = -A_m' q + C' sigma(t), q(T) = 0, on sigma's grid.
SignalTimeline solve_q_backward(const RiccatiSolution& sol, const SignalTimeline& sigma,
                                double T);

/// -R^-1 B' q(t) on q's grid.
SignalTimeline tracking_input_from_adjoint(const RiccatiSolution& sol,
                                           const SignalTimeline& q);

/// Evaluate both laws on the same (v_h, v_p) samples and fit the decay rate
/// of log ||u1 - u2|| by least squares over the window [0.1 T, 0.9 T],
/// ignoring samples at or below the 1e-12 floor.
LawGapReport law_gap(const ControlLaw& law1, const ControlLaw& law2,
                     const Vector& times, const Matrix& v_h_samples,
                     const Matrix& v_p_samples);

/// Long-time limit of the gap between the pure-form law and the SDRE law for
/// a constant nonlinearity value:
///   -R^-1 B' ((A_m')^-1 C'C A_m^-1 + (A_m')^-1 Pi) f,
/// with the double-convolution factor evaluated by quadrature of its
/// defining tail (truncated per the decay certificate).
Vector sdre_gap_asymptote(const RiccatiSolution& sol, const Vector& f_value);

/// (A_m')^-1 z realized as -integral_0^inf exp(A_m' t) z dt; for Hurwitz A_m
/// this coincides with the matrix inverse. Exposed for validation.
Matrix quadrature_inverse(const Matrix& A);

}  // namespace dyadic
