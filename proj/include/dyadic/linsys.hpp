#pragma once

#include "dyadic/core.hpp"

#include <functional>

namespace dyadic {

/// Scalar basis function of the state, phi: R^n -> R.
using BasisFunction = std::function<double(const Vector&)>;

/// Finite-dimensional realization (A, B, C) of a linear plant.
struct StateSpaceSystem {
    Matrix A;  ///< n x n drift
    Matrix B;  ///< n x m control
    Matrix C;  ///< p x n output

    StateSpaceSystem() = default;
    StateSpaceSystem(Matrix A_, Matrix B_, Matrix C_);

    Index n() const { return A.rows(); }
    Index m() const { return B.cols(); }
    Index p() const { return C.rows(); }
};

/// Semilinear plant: linear part plus f(v) = alpha * phi(v).
///
/// `alpha` is the true parameter; controllers only see `phi`, the bound
/// `nu_alpha` and the initial-condition radius `rho0`.
struct SemilinearPlant {
    StateSpaceSystem linear;
    BasisFunction phi;
    Vector alpha;
    double nu_alpha = 0.0;
    double rho0 = 1.0;

    SemilinearPlant() = default;
    SemilinearPlant(StateSpaceSystem sys, BasisFunction basis, Vector alpha_,
                    double nu_alpha_, double rho0_);
};

/// Sampled vector signal on [0, T] with piecewise-linear interpolation.
struct SignalTimeline {
    Vector times;   ///< strictly increasing, times[0] = 0
    Matrix values;  ///< one column per sample

    SignalTimeline() = default;
    SignalTimeline(Vector times_, Matrix values_);

    Index dim() const { return values.rows(); }
    Index samples() const { return times.size(); }
    double horizon() const { return times(times.size() - 1); }

    /// Linear interpolation; throws DomainError outside [0, T] (1e-9 slack).
    Vector eval(double t) const;

    /// Uniform grid carrying a single constant value.
    static SignalTimeline constant(double T, double dt, const Vector& value);
    /// Uniform zero signal of dimension `dim`.
    static SignalTimeline zero(double T, double dt, Index dim);
    /// Uniform grid on [0, T] sampled from a callable.
    static SignalTimeline sample(double T, double dt,
                                 const std::function<Vector(double)>& f);
};

/// Affine growth bounds ||f(v)|| <= nu1 ||v|| + nu2 on a ball of radius rho.
struct LipschitzBounds {
    double rho = 0.0;
    double nu1 = 0.0;
    double nu2 = 0.0;
};

/// Central-difference discretization of dv/dt = kappa * d^2 v / dx^2 on (0, L)
/// with homogeneous Dirichlet boundaries, a single interior actuator at node
/// ceil(N/2) and an averaging output row (entries h = L / (N + 1)).
StateSpaceSystem build_heat_plant(int grid_points, double length, double diffusion);

/// f(v) = alpha * phi(v); throws on non-finite phi(v).
Vector eval_nonlinearity(const SemilinearPlant& plant, const Vector& v);

/// PBH test: every eigenvalue of A with Re >= 0 is controllable through B.
/// Rank decisions use singular values with threshold tol * scale.
bool is_stabilizable(const Matrix& A, const Matrix& B, double tol = 1e-8);

/// PBH test on the dual pair: every unstable mode is visible through C.
bool is_detectable(const Matrix& A, const Matrix& C, double tol = 1e-8);

/// Affine envelope of ||f(v)|| over `samples` quasi-random states with
/// ||v|| <= rho, inflated by 10%. Deterministic for fixed inputs.
LipschitzBounds estimate_lipschitz_bounds(const SemilinearPlant& plant, double rho,
                                          int samples, unsigned seed = 0x5eed);

}  // namespace dyadic
