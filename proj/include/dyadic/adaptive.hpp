#pragma once

#include "dyadic/core.hpp"
#include "dyadic/linsys.hpp"
#include "dyadic/nehari.hpp"
#include "dyadic/riccati.hpp"

namespace dyadic {

/// States of the particular/homogeneous observers and the parameter estimate.
struct ObserverState {
    Vector v_hat_p;
    Vector v_hat_h;
    Vector alpha_hat;
};

/// Adaptation gain, projection margin and the Lyapunov weight used by the
/// adaptation inner product.
struct AdaptationConfig {
    double gamma = 1.0;
    double epsilon = 0.05;
    Matrix P;

    void validate() const;
};

/// Every constant entering the small-gain inequality, plus the verdict.
struct SmallGainReport {
    double M = 0.0;
    double rho0 = 0.0;
    double conv_norm = 0.0;  ///< ||Gamma_{A_m}||_i
    double nu1 = 0.0;
    double nu2 = 0.0;
    double delta_0w = 0.0;
    double delta_0r = 0.0;
    double delta_0u = 0.0;
    double r_inf = 0.0;
    double norm_B = 0.0;
    double rho_w = 0.0;
    double epsilon_s = 0.0;
    double lhs = 0.0;
    double margin = 0.0;  ///< (rho_w - epsilon_s) - lhs; -inf when denominator <= 0
    bool satisfied = false;
};

/// Induced-gain constants of the compensator path,
/// ||u_R|| <= delta_0w ||v|| + delta_0r ||r|| + delta_0u.
struct DeltaConstants {
    double delta_0w = 0.0;
    double delta_0r = 0.0;
    double delta_0u = 0.0;
    double g_H = 0.0;  ///< L-infinity induced gain of the compensator
    LipschitzBounds bounds;
};

/// Smooth one-dimensional projection with a linear taper in the boundary
/// layer nu_alpha < |alpha_hat| <= nu_alpha (1 + epsilon). Returns the
/// modified adaptation rate; throws StepSizeError when the invariant
/// |alpha_hat| <= nu_alpha (1 + epsilon) is already violated on entry.
double project(double alpha_hat_j, double y_j, double nu_alpha, double epsilon);

/// One RK4 step of the coupled observer/adaptation dynamics
///   d v_hat_p / dt = A_m v_hat_p + alpha_hat phi(v)
///   d v_hat_h / dt = A_m v_hat_h + B u_R
///   d alpha_hat_j / dt = gamma Proj(alpha_hat_j, -<P vtilde, phi(v) e_j>)
/// with v and u_R held at their instantaneous values and the projection
/// applied inside every stage.
ObserverState observer_step(const ObserverState& state, const Vector& v,
                            const Vector& u_R, const AdaptationConfig& cfg,
                            const RiccatiSolution& sol, const BasisFunction& phi,
                            double nu_alpha, double dt);

/// Conservative induced-norm composition along the compensator signal paths.
DeltaConstants delta_constants(const NehariApproximant& H, const RiccatiSolution& sol,
                               const SemilinearPlant& plant, double rho_w,
                               double epsilon, int lipschitz_samples = 256);

/// Assumption-4 style loop inequality:
///   lhs = (M rho0 + c (nu2 + delta_0r ||r||_inf + delta_0u))
///         / (1 - c (nu1 + ||B|| delta_0w)),   c = ||Gamma_{A_m}||_i,
/// satisfied iff the denominator is positive and lhs <= rho_w - epsilon_s.
SmallGainReport small_gain_check(double M, double rho0, double conv_norm, double nu1,
                                 double nu2, double delta_0w, double delta_0r,
                                 double delta_0u, double r_inf, double norm_B,
                                 double rho_w, double epsilon_s);

}  // namespace dyadic
