#pragma once

#include "dyadic/core.hpp"
#include "dyadic/linsys.hpp"

namespace dyadic {

/// Stabilizing solution of A'Pi + Pi A + C'C - Pi B R^-1 B' Pi = 0.
struct RiccatiSolution {
    Matrix Pi;    ///< symmetric PSD
    Matrix K;     ///< R^-1 B' Pi
    Matrix A_m;   ///< A - B K, Hurwitz
    Matrix B;     ///< control operator of the solved plant
    Matrix C;     ///< output operator of the solved plant
    Matrix R;     ///< control weight
    Matrix Rinv;  ///< cached R^-1
    double residual_norm = 0.0;
};

/// Self-adjoint coercive P with A_m'P + P A_m <= -lambda_P * P.
struct LyapunovCertificate {
    Matrix P;
    double lambda_P = 0.0;
};

/// Solution of A_m'W + W A_m + C'C = 0.
struct GramianResult {
    Matrix W;
    double residual_norm = 0.0;
};

/// Constants with ||exp(A_m t)||_2 <= M exp(-beta t).
struct DecayCertificate {
    double M = 1.0;
    double beta = 0.0;
};

/// Continuous Lyapunov equation A'X + X A + Q = 0 by complex-Schur
/// back-substitution (Bartels-Stewart).
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Unique stabilizing CARE solution via an ordered Schur decomposition of the
/// Hamiltonian [[A, -B R^-1 B'], [-C'C, -A']].
///
/// Throws SynthesisError when (A, B) is not stabilizable or (A, C) is not
/// detectable, and ConditioningError when the stable-subspace basis is
/// ill-conditioned (condition number above 1e12) or the reordering fails.
RiccatiSolution solve_care(const StateSpaceSystem& sys, const Matrix& R);

/// A - B R^-1 B' Pi.
Matrix closed_loop_generator(const RiccatiSolution& sol);

/// Closed-loop observability Gramian; requires Hurwitz A_m.
GramianResult observability_gramian(const Matrix& A_m, const Matrix& C);

/// Solves A_m'P + P A_m = -I and returns lambda_P = 1 / lambda_max(P).
LyapunovCertificate lyapunov_certificate(const Matrix& A_m);

/// beta = 0.95 |spectral abscissa|, M = grid sup of ||exp(A_m t)|| e^{beta t}
/// inflated by 5% (log grid t in [1e-3, 1e2]).
DecayCertificate decay_certificate(const Matrix& A_m);

/// L-infinity induced norm of the convolution with exp(A_m t):
/// integral_0^inf ||exp(A_m t)||_2 dt by adaptive quadrature with an
/// analytically bounded tail.
double convolution_operator_norm(const Matrix& A_m);

/// ||exp(A t)||_2 (largest singular value of the propagator).
double propagator_norm(const Matrix& A, double t);

/// RK4 backward integration of the differential Riccati equation
///   -dPi/dt = A'Pi + Pi A + C'C - Pi B R^-1 B' Pi,  Pi(T) = 0,
/// returning Pi(0). Links the algebraic steady-state solution to its
/// finite-horizon origin.
Matrix integrate_riccati_backward(const StateSpaceSystem& sys, const Matrix& R,
                                  double T, double dt);

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-9);

}  // namespace dyadic
