#pragma once

#include "dyadic/linsys.hpp"
#include "dyadic/riccati.hpp"

#include <Eigen/Dense>

#include <random>

namespace dyadic::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) M(i, j) = gauss(rng);
    }
    return M;
}

inline Vector random_vector(std::mt19937_64& rng, Index n) {
    return Vector(random_matrix(rng, n, 1).col(0));
}

/// Random (A, B, C) with (A, B) stabilizable and (A, C) detectable; A may be
/// unstable.
inline StateSpaceSystem random_care_system(std::mt19937_64& rng, Index n, Index m = 1,
                                           Index p = 1) {
    for (;;) {
        Matrix A = random_matrix(rng, n, n);
        A *= 1.0 / std::sqrt(static_cast<double>(n));
        const Matrix B = random_matrix(rng, n, m);
        const Matrix C = random_matrix(rng, p, n);
        if (is_stabilizable(A, B) && is_detectable(A, C)) {
            return StateSpaceSystem(A, B, C);
        }
    }
}

/// Random Hurwitz (A, B, C); spectral abscissa pushed below -margin.
inline StateSpaceSystem random_hurwitz_system(std::mt19937_64& rng, Index n, Index m = 1,
                                              Index p = 1, double margin = 0.3) {
    for (;;) {
        Matrix A = random_matrix(rng, n, n);
        A *= 1.0 / std::sqrt(static_cast<double>(n));
        A -= (spectral_abscissa(A) + margin) * Matrix::Identity(n, n);
        const Matrix B = random_matrix(rng, n, m);
        const Matrix C = random_matrix(rng, p, n);
        if (!is_hurwitz(A)) continue;
        if (!is_stabilizable(A, B) || !is_detectable(A, C)) continue;
        return StateSpaceSystem(A, B, C);
    }
}

inline Matrix random_orthogonal(std::mt19937_64& rng, Index n) {
    const Matrix G = random_matrix(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(G);
    return qr.householderQ() * Matrix::Identity(n, n);
}

/// Well-conditioned random similarity transform.
inline Matrix random_similarity(std::mt19937_64& rng, Index n) {
    std::uniform_real_distribution<double> scale(0.5, 2.0);
    Vector d(n);
    for (Index i = 0; i < n; ++i) d(i) = scale(rng);
    return random_orthogonal(rng, n) * d.asDiagonal();
}

/// Composite Simpson quadrature, independent of the library's adaptive rule.
template <typename F>
double simpson(F&& f, double a, double b, int panels) {
    const double h = (b - a) / (2 * panels);
    double acc = f(a) + f(b);
    for (int i = 1; i < 2 * panels; ++i) {
        acc += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
    }
    return acc * h / 3.0;
}

inline SemilinearPlant scalar_plant(BasisFunction phi, double alpha, double nu_alpha,
                                    double rho0 = 1.0) {
    Matrix A(1, 1), B(1, 1), C(1, 1);
    A << 1.0;
    B << 1.0;
    C << 1.0;
    Vector al(1);
    al << alpha;
    return SemilinearPlant(StateSpaceSystem(A, B, C), std::move(phi), al, nu_alpha, rho0);
}

}  // namespace dyadic::testing
