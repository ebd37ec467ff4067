#include "dyadic/linsys.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace dyadic {

double spectral_abscissa(const Matrix& A) {
    return A.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Matrix& A) {
    return spectral_abscissa(A) < 0.0;
}

StateSpaceSystem::StateSpaceSystem(Matrix A_, Matrix B_, Matrix C_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)) {
    if (A.rows() != A.cols()) {
        throw DimensionError("StateSpaceSystem: A must be square");
    }
    if (B.rows() != A.rows()) {
        throw DimensionError("StateSpaceSystem: B row count must match A");
    }
    if (C.cols() != A.rows()) {
        throw DimensionError("StateSpaceSystem: C column count must match A");
    }
}

SemilinearPlant::SemilinearPlant(StateSpaceSystem sys, BasisFunction basis, Vector alpha_,
                                 double nu_alpha_, double rho0_)
    : linear(std::move(sys)),
      phi(std::move(basis)),
      alpha(std::move(alpha_)),
      nu_alpha(nu_alpha_),
      rho0(rho0_) {
    if (alpha.size() != linear.n()) {
        throw DimensionError("SemilinearPlant: alpha dimension must match state");
    }
    if (!(nu_alpha > 0.0)) {
        throw PreconditionError("SemilinearPlant: nu_alpha must be positive");
    }
    if (alpha.lpNorm<Eigen::Infinity>() >= nu_alpha) {
        throw PreconditionError("SemilinearPlant: ||alpha||_inf must be < nu_alpha");
    }
    if (!(rho0 > 0.0)) {
        throw PreconditionError("SemilinearPlant: rho0 must be positive");
    }
}

SignalTimeline::SignalTimeline(Vector times_, Matrix values_)
    : times(std::move(times_)), values(std::move(values_)) {
    if (times.size() == 0 || values.cols() != times.size()) {
        throw DimensionError("SignalTimeline: one value column per sample required");
    }
    if (std::abs(times(0)) > 0.0) {
        throw PreconditionError("SignalTimeline: grid must start at t = 0");
    }
    for (Index i = 0; i + 1 < times.size(); ++i) {
        if (!(times(i + 1) > times(i))) {
            throw PreconditionError("SignalTimeline: sample instants must strictly increase");
        }
    }
}

Vector SignalTimeline::eval(double t) const {
    const double T = horizon();
    const double slack = 1e-9 * (1.0 + T);
    if (t < -slack || t > T + slack) {
        throw DomainError("SignalTimeline: query outside [0, T]");
    }
    if (t <= times(0)) return values.col(0);
    if (t >= T) return values.col(times.size() - 1);

    // binary search for the bracketing interval
    Index lo = 0;
    Index hi = times.size() - 1;
    while (hi - lo > 1) {
        const Index mid = (lo + hi) / 2;
        (times(mid) <= t ? lo : hi) = mid;
    }
    const double w = (t - times(lo)) / (times(hi) - times(lo));
    return (1.0 - w) * values.col(lo) + w * values.col(hi);
}

namespace {

Vector uniform_grid(double T, double dt) {
    if (!(dt > 0.0) || !(T > 0.0)) {
        throw PreconditionError("SignalTimeline: T and dt must be positive");
    }
    const auto steps = static_cast<Index>(std::ceil(T / dt - 1e-12));
    Vector t(steps + 1);
    for (Index i = 0; i <= steps; ++i) t(i) = std::min(i * dt, T);
    t(steps) = T;
    return t;
}

}  // namespace

SignalTimeline SignalTimeline::constant(double T, double dt, const Vector& value) {
    Vector t = uniform_grid(T, dt);
    Matrix vals(value.size(), t.size());
    vals.colwise() = value;
    return SignalTimeline(std::move(t), std::move(vals));
}

SignalTimeline SignalTimeline::zero(double T, double dt, Index dim) {
    return constant(T, dt, Vector::Zero(dim));
}

SignalTimeline SignalTimeline::sample(double T, double dt,
                                      const std::function<Vector(double)>& f) {
    Vector t = uniform_grid(T, dt);
    Matrix vals(f(0.0).size(), t.size());
    for (Index i = 0; i < t.size(); ++i) vals.col(i) = f(t(i));
    return SignalTimeline(std::move(t), std::move(vals));
}

StateSpaceSystem build_heat_plant(int grid_points, double length, double diffusion) {
    if (grid_points < 2) {
        throw PreconditionError("build_heat_plant: at least two grid points required");
    }
    if (!(length > 0.0)) {
        throw PreconditionError("build_heat_plant: length must be positive");
    }
    if (!(diffusion > 0.0)) {
        throw PreconditionError("build_heat_plant: diffusion must be positive");
    }
    const int N = grid_points;
    const double h = length / (N + 1);
    const double c = diffusion / (h * h);

    Matrix A = Matrix::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        A(i, i) = -2.0 * c;
        if (i > 0) A(i, i - 1) = c;
        if (i + 1 < N) A(i, i + 1) = c;
    }
    Matrix B = Matrix::Zero(N, 1);
    B((N + 1) / 2 - 1, 0) = 1.0;  // actuator at node ceil(N/2), 1-based
    Matrix C = Matrix::Constant(1, N, h);
    return StateSpaceSystem(std::move(A), std::move(B), std::move(C));
}

Vector eval_nonlinearity(const SemilinearPlant& plant, const Vector& v) {
    if (v.size() != plant.linear.n()) {
        throw DimensionError("eval_nonlinearity: state dimension mismatch");
    }
    if (!v.allFinite()) {
        throw PreconditionError("eval_nonlinearity: state must be finite");
    }
    const double s = plant.phi(v);
    if (!std::isfinite(s)) {
        throw Error("eval_nonlinearity: phi(v) is not finite");
    }
    return plant.alpha * s;
}

namespace {

// PBH rank test of [A - lambda I, M] for every eigenvalue with Re >= 0.
bool pbh_unstable_modes_reachable(const Matrix& A, const Matrix& M, double tol) {
    const Index n = A.rows();
    const ComplexVector eigs = A.eigenvalues();
    const double scale = std::max(1.0, A.norm() + M.norm());
    for (Index k = 0; k < n; ++k) {
        if (eigs(k).real() < 0.0) continue;
        ComplexMatrix pencil(n, n + M.cols());
        pencil.leftCols(n) = A.cast<std::complex<double>>();
        pencil.leftCols(n).diagonal().array() -= eigs(k);
        pencil.rightCols(M.cols()) = M.cast<std::complex<double>>();
        Eigen::JacobiSVD<ComplexMatrix> svd(pencil);
        if (svd.singularValues()(n - 1) <= tol * scale) return false;
    }
    return true;
}

}  // namespace

bool is_stabilizable(const Matrix& A, const Matrix& B, double tol) {
    if (A.rows() != A.cols() || B.rows() != A.rows()) {
        throw DimensionError("is_stabilizable: dimension mismatch");
    }
    return pbh_unstable_modes_reachable(A, B, tol);
}

bool is_detectable(const Matrix& A, const Matrix& C, double tol) {
    if (A.rows() != A.cols() || C.cols() != A.rows()) {
        throw DimensionError("is_detectable: dimension mismatch");
    }
    return pbh_unstable_modes_reachable(A.transpose(), C.transpose(), tol);
}

LipschitzBounds estimate_lipschitz_bounds(const SemilinearPlant& plant, double rho,
                                          int samples, unsigned seed) {
    if (!(rho > 0.0)) {
        throw PreconditionError("estimate_lipschitz_bounds: rho must be positive");
    }
    if (samples < 1) {
        throw PreconditionError("estimate_lipschitz_bounds: need at least one sample");
    }
    const Index n = plant.linear.n();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Gauss-direction, radius-stratified samples filling the ball.
    Vector norms(samples), growth(samples);
    for (int i = 0; i < samples; ++i) {
        Vector dir(n);
        for (Index j = 0; j < n; ++j) dir(j) = gauss(rng);
        double len = dir.norm();
        if (len == 0.0) {
            dir.setOnes();
            len = dir.norm();
        }
        const double r = rho * std::pow(unit(rng), 1.0 / static_cast<double>(n));
        const Vector v = dir * (r / len);
        norms(i) = v.norm();
        growth(i) = eval_nonlinearity(plant, v).norm();
    }

    // Least-squares affine fit g ~ a s + b, clamped to the nonnegative
    // quadrant, then shifted up until the envelope covers every sample.
    const double sbar = norms.mean();
    const double gbar = growth.mean();
    const double svar = (norms.array() - sbar).square().sum();
    double a = svar > 1e-12 * rho * rho * samples
                   ? ((norms.array() - sbar) * (growth.array() - gbar)).sum() / svar
                   : 0.0;
    a = std::max(a, 0.0);
    double b = std::max(gbar - a * sbar, 0.0);
    const double deficit = (growth - (a * norms).eval() - Vector::Constant(samples, b)).maxCoeff();
    if (deficit > 0.0) b += deficit;

    LipschitzBounds out;
    out.rho = rho;
    out.nu1 = 1.1 * a;
    out.nu2 = 1.1 * b;
    return out;
}

}  // namespace dyadic
