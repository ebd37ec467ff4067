#include "dyadic/nehari.hpp"

#include "dyadic/riccati.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace dyadic {

namespace {

constexpr std::complex<double> kImag(0.0, 1.0);

// Symmetric PSD square root via eigendecomposition, clipping tiny negatives.
Matrix psd_sqrt(const Matrix& W) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(W);
    Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

ComplexMatrix frequency_response(const StateSpaceSystem& sys, double omega) {
    const Index n = sys.n();
    ComplexMatrix M = -sys.A.cast<std::complex<double>>();
    M.diagonal().array() += kImag * omega;
    return sys.C.cast<std::complex<double>>() *
           M.partialPivLu().solve(sys.B.cast<std::complex<double>>());
}

ComplexMatrix NehariApproximant::frequency_response(double omega) const {
    ComplexMatrix M = -H_A.cast<std::complex<double>>();
    M.diagonal().array() += kImag * omega;
    ComplexMatrix X = H_C.cast<std::complex<double>>() *
                      M.partialPivLu().solve(H_B.cast<std::complex<double>>());
    if (has_feedthrough()) X += D_H.cast<std::complex<double>>();
    return X;
}

Matrix NehariApproximant::dc_gain() const {
    Matrix X = -H_C * H_A.partialPivLu().solve(H_B);
    if (has_feedthrough()) X += D_H;
    return X;
}

BalancedRealization balance(const StateSpaceSystem& sys) {
    require_hurwitz(sys.A, "balance");
    const Index n = sys.n();

    const Matrix Wc = solve_lyapunov(sys.A.transpose(), sys.B * sys.B.transpose());
    const Matrix Wo = solve_lyapunov(sys.A, sys.C.transpose() * sys.C);

    // square-root balancing: factor both Gramians, SVD the cross product
    const Matrix Zc = psd_sqrt(Wc);
    const Matrix Zo = psd_sqrt(Wo);
    Eigen::JacobiSVD<Matrix> svd(Zo * Zc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector sv = svd.singularValues();

    const double floor = 1e-10 * sv(0);
    Index r = 0;
    while (r < n && sv(r) > floor) ++r;
    if (r == 0 || !(sv(0) > 0.0)) {
        throw DegenerateRealizationError(
            "balance: realization has no reachable-observable part");
    }

    const Matrix Sih = sv.head(r).cwiseSqrt().cwiseInverse().asDiagonal();
    const Matrix T = Zc * svd.matrixV().leftCols(r) * Sih;     // n x r
    const Matrix Ti = Sih * svd.matrixU().leftCols(r).transpose() * Zo;  // r x n

    BalancedRealization bal;
    bal.A_b = Ti * sys.A * T;
    bal.B_b = Ti * sys.B;
    bal.C_b = sys.C * T;
    bal.hsv = sv.head(r);
    return bal;
}

double hinf_norm(const StateSpaceSystem& sys) {
    require_hurwitz(sys.A, "hinf_norm");
    const double scale = std::abs(spectral_abscissa(sys.A));
    const double w_lo = 1e-3 * scale;
    const double w_hi = 1e3 * scale;
    constexpr int kGrid = 400;

    auto gain = [&](double w) {
        Eigen::JacobiSVD<ComplexMatrix> svd(frequency_response(sys, w));
        return svd.singularValues()(0);
    };

    double best_w = 0.0;
    double best = gain(0.0);
    for (int i = 0; i < kGrid; ++i) {
        const double w = w_lo * std::pow(w_hi / w_lo, static_cast<double>(i) / (kGrid - 1));
        const double g = gain(w);
        if (g > best) {
            best = g;
            best_w = w;
        }
    }

    // golden-section refinement around the grid maximum
    const double ratio = std::pow(w_hi / w_lo, 1.0 / (kGrid - 1));
    double lo = best_w > 0.0 ? best_w / ratio : 0.0;
    double hi = best_w > 0.0 ? best_w * ratio : w_lo;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = gain(x1);
    double f2 = gain(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = gain(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = gain(x1);
        }
    }
    return std::max(best, std::max(f1, f2));
}

double adjoint_approximation_error(const StateSpaceSystem& G_m,
                                   const NehariApproximant& X) {
    const double scale = std::abs(spectral_abscissa(G_m.A));
    const double w_lo = 1e-3 * scale;
    const double w_hi = 1e3 * scale;
    constexpr int kGrid = 400;

    auto err = [&](double w) {
        const ComplexMatrix E =
            frequency_response(G_m, w).adjoint() - X.frequency_response(w);
        Eigen::JacobiSVD<ComplexMatrix> svd(E);
        return svd.singularValues()(0);
    };

    double best = err(0.0);
    double best_w = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        const double w = w_lo * std::pow(w_hi / w_lo, static_cast<double>(i) / (kGrid - 1));
        const double g = err(w);
        if (g > best) {
            best = g;
            best_w = w;
        }
    }
    const double ratio = std::pow(w_hi / w_lo, 1.0 / (kGrid - 1));
    double lo = best_w > 0.0 ? best_w / ratio : 0.0;
    double hi = best_w > 0.0 ? best_w * ratio : w_lo;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80; ++it) {
        const double x1 = hi - gr * (hi - lo);
        const double x2 = lo + gr * (hi - lo);
        if (err(x1) < err(x2)) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    best = std::max(best, err(0.5 * (lo + hi)));
    return best;
}

namespace {

// Completes the rank-one constraint C2' U = -B2 to an orthogonal U (square
// case) or the minimal-norm contraction (rectangular case).
Matrix unitary_from_constraint(const Vector& c2, const Eigen::RowVectorXd& b2) {
    const Index p = c2.size();
    const Index m = b2.size();
    const double nc = c2.norm();
    const double nb = b2.norm();
    if (nc <= 0.0 || nb <= 0.0) {
        throw DegenerateRealizationError(
            "solve_nehari: vanishing coupling in the all-pass construction");
    }
    const Vector c = c2 / nc;
    const Vector b = b2.transpose() / nb;
    Matrix U = -c * b.transpose();  // satisfies C2' U = -B2 since |B2| = |C2|
    if (p == m) {
        // complete with a map between the orthogonal complements
        Eigen::HouseholderQR<Matrix> qc(c);
        Eigen::HouseholderQR<Matrix> qb(b);
        const Matrix Qc = qc.householderQ() * Matrix::Identity(p, p);
        const Matrix Qb = qb.householderQ() * Matrix::Identity(m, m);
        U += Qc.rightCols(p - 1) * Qb.rightCols(m - 1).transpose();
    }
    return U;
}

}  // namespace

NehariApproximant solve_nehari(const StateSpaceSystem& G_m, const Matrix& R,
                               bool enforce_strictly_proper,
                               std::optional<Index> compensator_order) {
    require_hurwitz(G_m.A, "solve_nehari");
    if (R.rows() != G_m.m() || R.cols() != G_m.m()) {
        throw DimensionError("solve_nehari: R must match the input dimension");
    }
    const Index m = G_m.m();
    const Index p = G_m.p();

    NehariApproximant out;

    // Hankel spectrum of the closed-loop map. A vanishing map is its own
    // best causal approximation (distance zero).
    BalancedRealization bal;
    try {
        bal = balance(G_m);
    } catch (const DegenerateRealizationError&) {
        out.H_A = Matrix::Zero(0, 0);
        out.H_B = Matrix::Zero(0, p);
        out.H_C = Matrix::Zero(m, 0);
        out.D_H = Matrix::Zero(m, p);
        out.achieved_error = adjoint_approximation_error(G_m, out);
        return out;
    }
    const Index n = bal.hsv.size();
    out.hsv = bal.hsv;
    const double sigma1 = bal.hsv(0);
    out.optimal_error = sigma1;

    if (n > 1 && sigma1 - bal.hsv(1) < 1e-10 * sigma1) {
        throw DegenerateRealizationError(
            "solve_nehari: repeated leading Hankel singular value; reduce the "
            "requested order or perturb the plant");
    }

    // Reorder the balanced states so the sigma_1 state is last, partition
    // conformally with Sigma = diag(Sigma_1, sigma_1).
    std::vector<Index> perm(n);
    for (Index i = 0; i < n; ++i) perm[i] = (i + 1) % n;
    Matrix A(n, n), B(n, m), C(p, n);
    Vector s1(n - 1);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) A(i, j) = bal.A_b(perm[i], perm[j]);
        B.row(i) = bal.B_b.row(perm[i]);
        C.col(i) = bal.C_b.col(perm[i]);
        if (i < n - 1) s1(i) = bal.hsv(perm[i]);
    }

    // All-pass embedding at level sigma_1: the error G_m - Y is sigma_1-all-pass
    // and Y has only antistable dynamics; its para-conjugate transpose is the
    // stable compensator approximating the anticausal adjoint.
    const Matrix A11 = A.topLeftCorner(n - 1, n - 1);
    const Matrix B1 = B.topRows(n - 1);
    const Matrix C1 = C.leftCols(n - 1);
    const Eigen::RowVectorXd B2 = B.row(n - 1);
    const Vector C2 = C.col(n - 1);
    const Matrix U = unitary_from_constraint(C2, B2);

    Matrix Ahat, Bhat, Chat;
    if (n > 1) {
        const Matrix S1 = s1.asDiagonal();
        Matrix Gamma = S1 * S1;
        Gamma.diagonal().array() -= sigma1 * sigma1;
        const auto lu = Gamma.partialPivLu();
        Ahat = lu.solve(sigma1 * sigma1 * A11.transpose() + S1 * A11 * S1 -
                        sigma1 * C1.transpose() * U * B1.transpose());
        Bhat = lu.solve(S1 * B1 + sigma1 * C1.transpose() * U);
        Chat = C1 * S1 + sigma1 * U * B1.transpose();
        if (spectral_abscissa(-Ahat.transpose()) >= 0.0) {
            throw DegenerateRealizationError(
                "solve_nehari: all-pass construction produced a non-Hurwitz "
                "compensator");
        }
    } else {
        Ahat = Matrix::Zero(0, 0);
        Bhat = Matrix::Zero(0, m);
        Chat = Matrix::Zero(p, 0);
    }
    const Matrix Dhat = -sigma1 * U;

    // para-conjugate transpose: X(s) = Y(-s)' is stable
    out.H_A = -Ahat.transpose();
    out.H_B = Chat.transpose();
    out.H_C = -Bhat.transpose();
    out.D_H = Dhat.transpose();

    if (compensator_order && *compensator_order < out.order()) {
        if (*compensator_order < 0) {
            throw PreconditionError("solve_nehari: compensator order must be >= 0");
        }
        // balanced truncation of the stable dynamic part
        const BalancedRealization xb =
            balance(StateSpaceSystem(out.H_A, out.H_B, out.H_C));
        const Index k = std::min<Index>(*compensator_order, xb.hsv.size());
        out.H_A = xb.A_b.topLeftCorner(k, k);
        out.H_B = xb.B_b.topRows(k);
        out.H_C = xb.C_b.leftCols(k);
    }

    if (enforce_strictly_proper && out.D_H.norm() > 0.0) {
        // fold the feedthrough through a fast real pole
        const double w_f = 1e3 * G_m.A.eigenvalues().cwiseAbs().maxCoeff();
        const Index q = out.H_A.rows();
        Matrix HA = Matrix::Zero(q + p, q + p);
        HA.topLeftCorner(q, q) = out.H_A;
        HA.bottomRightCorner(p, p) = -w_f * Matrix::Identity(p, p);
        Matrix HB(q + p, p);
        HB.topRows(q) = out.H_B;
        HB.bottomRows(p) = w_f * Matrix::Identity(p, p);
        Matrix HC(m, q + p);
        HC.leftCols(q) = out.H_C;
        HC.rightCols(p) = out.D_H;
        out.H_A = std::move(HA);
        out.H_B = std::move(HB);
        out.H_C = std::move(HC);
        out.D_H = Matrix();
    }

    out.achieved_error = adjoint_approximation_error(G_m, out);
    return out;
}

NehariApproximant solve_constrained_nehari(const StateSpaceSystem& G_m,
                                           const Matrix& R) {
    NehariApproximant out = solve_nehari(G_m, R);
    const Index p = G_m.p();

    // G_m(0) = -C A_m^-1 B must have full row rank for the interpolation
    const Matrix G0 = -G_m.C * G_m.A.partialPivLu().solve(G_m.B);
    const Matrix Mdc = G0 * R.inverse();  // p x m
    if (p > G_m.m()) {
        throw ConstraintError("solve_constrained_nehari: more outputs than inputs");
    }
    {
        Eigen::JacobiSVD<Matrix> svd(Mdc);
        if (svd.singularValues()(p - 1) <= 1e-12 * std::max(1.0, svd.singularValues()(0))) {
            throw ConstraintError(
                "solve_constrained_nehari: DC gain is row-rank deficient");
        }
    }
    const Matrix E = Matrix::Identity(p, p) - Mdc * out.dc_gain();
    if (E.norm() > 1e-14 * (1.0 + out.dc_gain().norm())) {
        // minimal-norm DC correction Delta with Mdc * Delta = E, folded
        // through a slow pole well inside the closed-loop bandwidth
        const Matrix Delta =
            Mdc.transpose() * (Mdc * Mdc.transpose()).ldlt().solve(E);
        const double w_c = 0.95 * std::abs(spectral_abscissa(G_m.A)) / 5.0;

        const Index q = out.H_A.rows();
        Matrix HA = Matrix::Zero(q + p, q + p);
        HA.topLeftCorner(q, q) = out.H_A;
        HA.bottomRightCorner(p, p) = -w_c * Matrix::Identity(p, p);
        Matrix HB(q + p, p);
        HB.topRows(q) = out.H_B;
        HB.bottomRows(p) = w_c * Matrix::Identity(p, p);
        Matrix HC(G_m.m(), q + p);
        HC.leftCols(q) = out.H_C;
        HC.rightCols(p) = Delta;
        out.H_A = std::move(HA);
        out.H_B = std::move(HB);
        out.H_C = std::move(HC);
    }
    out.achieved_error = adjoint_approximation_error(G_m, out);
    return out;
}

SuboptimalityBound suboptimality_constant(const StateSpaceSystem& G_m,
                                          const Matrix& R) {
    require_hurwitz(G_m.A, "suboptimality_constant");
    SuboptimalityBound bound;
    bound.g_inf_norm = hinf_norm(G_m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(R);
    const double rmin = es.eigenvalues().minCoeff();
    if (rmin <= 0.0) {
        throw PreconditionError("suboptimality_constant: R must be positive definite");
    }
    bound.r_inv_sqrt_norm = 1.0 / std::sqrt(rmin);
    bound.hankel_norm = balance(G_m).hsv(0);
    bound.S = (bound.g_inf_norm + bound.r_inv_sqrt_norm) * bound.hankel_norm;
    return bound;
}

}  // namespace dyadic
