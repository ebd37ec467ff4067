#include "dyadic/riccati.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <vector>

namespace dyadic {

namespace {

using Complex = std::complex<double>;

// Swap the diagonal entries of the adjacent 1x1 Schur blocks (k, k+1) of the
// upper-triangular T with a unitary similarity, updating Q accordingly.
void swap_schur_entries(ComplexMatrix& T, ComplexMatrix& Q, Index k) {
    const Complex a = T(k, k);
    const Complex b = T(k, k + 1);
    const Complex d = T(k + 1, k + 1);
    if (std::abs(a - d) == 0.0) return;  // equal eigenvalues, nothing to move

    // Unitary G whose first column is the eigenvector of [[a, b], [0, d]]
    // associated with d; then G^H [[a,b],[0,d]] G has d in position (1,1).
    Complex x1 = -b;
    Complex x2 = a - d;
    const double len = std::sqrt(std::norm(x1) + std::norm(x2));
    x1 /= len;
    x2 /= len;
    Eigen::Matrix2cd G;
    G << x1, -std::conj(x2), x2, std::conj(x1);

    const Index n = T.rows();
    T.block(0, k, n, 2) = T.block(0, k, n, 2) * G;
    T.block(k, 0, 2, n) = G.adjoint() * T.block(k, 0, 2, n);
    Q.block(0, k, n, 2) = Q.block(0, k, n, 2) * G;
    T(k + 1, k) = Complex(0.0, 0.0);
}

// Reorder the complex Schur form so that all eigenvalues with Re < 0 occupy
// the leading diagonal positions. Returns the number of stable eigenvalues.
Index reorder_stable_first(ComplexMatrix& T, ComplexMatrix& Q) {
    const Index n = T.rows();
    Index front = 0;
    for (Index i = 0; i < n; ++i) {
        if (T(i, i).real() >= 0.0) continue;
        for (Index j = i; j > front; --j) swap_schur_entries(T, Q, j - 1);
        ++front;
    }
    return front;
}

}  // namespace

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
    if (A.rows() != A.cols() || Q.rows() != A.rows() || Q.cols() != A.cols()) {
        throw DimensionError("solve_lyapunov: dimension mismatch");
    }
    const Index n = A.rows();
    Eigen::ComplexSchur<Matrix> schur(A);
    if (schur.info() != Eigen::Success) {
        throw ConditioningError("solve_lyapunov: Schur decomposition failed");
    }
    const ComplexMatrix T = schur.matrixT();
    const ComplexMatrix& U = schur.matrixU();

    // A = U T U^H turns A'X + XA + Q = 0 into T^H Y + Y T + F = 0 with
    // Y = U^H X U. Column k couples only to earlier columns because T is
    // upper triangular, so forward substitution over columns suffices.
    const ComplexMatrix F = U.adjoint() * Q * U;
    ComplexMatrix Y = ComplexMatrix::Zero(n, n);
    const ComplexMatrix Th = T.adjoint();
    for (Index k = 0; k < n; ++k) {
        ComplexVector rhs = -F.col(k);
        if (k > 0) rhs.noalias() -= Y.leftCols(k) * T.topRows(k).col(k);
        ComplexMatrix lhs = Th;
        lhs.diagonal().array() += T(k, k);
        Y.col(k) = lhs.triangularView<Eigen::Lower>().solve(rhs);
    }
    Matrix X = (U * Y * U.adjoint()).real();
    return 0.5 * (X + X.transpose());
}

RiccatiSolution solve_care(const StateSpaceSystem& sys, const Matrix& R) {
    const Index n = sys.n();
    const Index m = sys.m();
    if (R.rows() != m || R.cols() != m) {
        throw DimensionError("solve_care: R must be m x m");
    }
    Eigen::LLT<Matrix> llt(R);
    if (llt.info() != Eigen::Success) {
        throw PreconditionError("solve_care: R must be positive definite");
    }
    if (!is_stabilizable(sys.A, sys.B)) {
        throw SynthesisError("solve_care: (A, B) is not stabilizable");
    }
    if (!is_detectable(sys.A, sys.C)) {
        throw SynthesisError("solve_care: (A, C) is not detectable");
    }

    const Matrix RinvBt = llt.solve(sys.B.transpose());
    Matrix H(2 * n, 2 * n);
    H << sys.A, -sys.B * RinvBt, -sys.C.transpose() * sys.C, -sys.A.transpose();

    Eigen::ComplexSchur<Matrix> schur(H);
    if (schur.info() != Eigen::Success) {
        throw ConditioningError("solve_care: Schur decomposition failed");
    }
    ComplexMatrix T = schur.matrixT();
    ComplexMatrix Q = schur.matrixU();
    const Index stable = reorder_stable_first(T, Q);
    if (stable != n) {
        throw ConditioningError(
            "solve_care: Hamiltonian does not split into n stable / n antistable "
            "eigenvalues (eigenvalues on the imaginary axis)");
    }

    const ComplexMatrix X1 = Q.topLeftCorner(n, n);
    const ComplexMatrix X2 = Q.bottomLeftCorner(n, n);
    Eigen::JacobiSVD<ComplexMatrix> svd(X1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(n - 1);
    const double smax = svd.singularValues()(0);
    if (smin <= 0.0 || smax / smin > 1e12) {
        throw ConditioningError("solve_care: stable-subspace basis is ill-conditioned");
    }

    RiccatiSolution sol;
    Matrix Pi = (X2 * svd.solve(ComplexMatrix::Identity(n, n))).real();
    Pi = 0.5 * (Pi + Pi.transpose()).eval();

    const Matrix cost_Q = sys.C.transpose() * sys.C;
    auto care_residual = [&](const Matrix& P) -> Matrix {
        return sys.A.transpose() * P + P * sys.A + cost_Q -
               P * sys.B * llt.solve(sys.B.transpose() * P);
    };

    // Newton (Kleinman) defect correction: quadratic cleanup of the Schur
    // solution; each step is one Lyapunov solve with the closed loop of the
    // current iterate.
    Matrix residual = care_residual(Pi);
    for (int iter = 0; iter < 5; ++iter) {
        if (residual.norm() <= 0.01 * 1e-8 * (1.0 + Pi.norm())) break;
        const Matrix A_m = sys.A - sys.B * llt.solve(sys.B.transpose() * Pi);
        if (!is_hurwitz(A_m)) break;
        const Matrix delta = solve_lyapunov(A_m, residual);
        const Matrix candidate = 0.5 * ((Pi + delta) + (Pi + delta).transpose());
        const Matrix candidate_residual = care_residual(candidate);
        if (candidate_residual.norm() >= residual.norm()) break;
        Pi = candidate;
        residual = candidate_residual;
    }

    sol.Pi = Pi;
    sol.B = sys.B;
    sol.C = sys.C;
    sol.R = R;
    sol.Rinv = llt.solve(Matrix::Identity(m, m));
    sol.K = llt.solve(sys.B.transpose() * sol.Pi);
    sol.A_m = sys.A - sys.B * sol.K;
    sol.residual_norm = residual.norm();
    if (sol.residual_norm > 1e-8 * (1.0 + sol.Pi.norm())) {
        throw ConditioningError("solve_care: residual exceeds tolerance");
    }
    if (!is_hurwitz(sol.A_m)) {
        throw SynthesisError("solve_care: closed-loop generator is not Hurwitz");
    }
    return sol;
}

Matrix closed_loop_generator(const RiccatiSolution& sol) {
    return sol.A_m;
}

GramianResult observability_gramian(const Matrix& A_m, const Matrix& C) {
    require_hurwitz(A_m, "observability_gramian");
    if (C.cols() != A_m.rows()) {
        throw DimensionError("observability_gramian: C column count must match A_m");
    }
    GramianResult out;
    out.W = solve_lyapunov(A_m, C.transpose() * C);
    out.residual_norm =
        (A_m.transpose() * out.W + out.W * A_m + C.transpose() * C).norm();
    return out;
}

LyapunovCertificate lyapunov_certificate(const Matrix& A_m) {
    require_hurwitz(A_m, "lyapunov_certificate");
    LyapunovCertificate cert;
    cert.P = solve_lyapunov(A_m, Matrix::Identity(A_m.rows(), A_m.cols()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(cert.P);
    const double pmin = es.eigenvalues().minCoeff();
    const double pmax = es.eigenvalues().maxCoeff();
    if (pmin <= 0.0) {
        throw ConditioningError("lyapunov_certificate: P is not positive definite");
    }
    // A_m'P + PA_m = -I <= -(1/lambda_max(P)) P
    cert.lambda_P = 1.0 / pmax;
    return cert;
}

double propagator_norm(const Matrix& A, double t) {
    const Matrix E = (A * t).exp();
    Eigen::JacobiSVD<Matrix> svd(E);
    return svd.singularValues()(0);
}

DecayCertificate decay_certificate(const Matrix& A_m) {
    require_hurwitz(A_m, "decay_certificate");
    DecayCertificate cert;
    cert.beta = 0.95 * std::abs(spectral_abscissa(A_m));

    constexpr int kGridPoints = 200;
    const double t_lo = 1e-3;
    const double t_hi = 1e2;
    double sup = 1.0;  // t -> 0 limit of the envelope ratio
    for (int i = 0; i < kGridPoints; ++i) {
        const double t =
            t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (kGridPoints - 1));
        sup = std::max(sup, propagator_norm(A_m, t) * std::exp(cert.beta * t));
    }
    cert.M = 1.05 * sup;
    return cert;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol) {
    struct Simpson {
        const std::function<double(double)>& f;
        double operator()(double lo, double hi, double flo, double fmid, double fhi,
                          double whole, double tol, int depth) const {
            const double mid = 0.5 * (lo + hi);
            const double lmid = 0.5 * (lo + mid);
            const double rmid = 0.5 * (mid + hi);
            const double flmid = f(lmid);
            const double frmid = f(rmid);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flmid + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frmid + fhi);
            if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
                return left + right + (left + right - whole) / 15.0;
            }
            return (*this)(lo, mid, flo, flmid, fmid, left, 0.5 * tol, depth - 1) +
                   (*this)(mid, hi, fmid, frmid, fhi, right, 0.5 * tol, depth - 1);
        }
    };
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Simpson{f}(a, b, fa, fm, fb, whole, tol, 40);
}

Matrix integrate_riccati_backward(const StateSpaceSystem& sys, const Matrix& R,
                                  double T, double dt) {
    if (!(dt > 0.0) || !(T > 0.0)) {
        throw PreconditionError("integrate_riccati_backward: T and dt must be positive");
    }
    const Matrix Q = sys.C.transpose() * sys.C;
    const Matrix G = sys.B * R.llt().solve(sys.B.transpose());
    // in reversed time tau = T - t the equation runs forward from Pi = 0
    auto rhs = [&](const Matrix& P) -> Matrix {
        return sys.A.transpose() * P + P * sys.A + Q - P * G * P;
    };
    const auto steps = static_cast<Index>(std::ceil(T / dt));
    const double h = T / static_cast<double>(steps);
    Matrix P = Matrix::Zero(sys.n(), sys.n());
    for (Index i = 0; i < steps; ++i) {
        const Matrix k1 = rhs(P);
        const Matrix k2 = rhs(P + 0.5 * h * k1);
        const Matrix k3 = rhs(P + 0.5 * h * k2);
        const Matrix k4 = rhs(P + h * k3);
        P += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return 0.5 * (P + P.transpose());
}

double convolution_operator_norm(const Matrix& A_m) {
    require_hurwitz(A_m, "convolution_operator_norm");
    const DecayCertificate cert = decay_certificate(A_m);
    // truncate where the certificate envelope drops below 1e-12
    const double t_star = std::log(cert.M / 1e-12) / cert.beta;
    const double body = integrate_adaptive(
        [&](double t) { return propagator_norm(A_m, t); }, 0.0, t_star, 1e-9);
    const double tail = cert.M * std::exp(-cert.beta * t_star) / cert.beta;
    return body + tail;
}

}  // namespace dyadic
