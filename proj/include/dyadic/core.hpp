#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace dyadic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Violated argument domain (nonpositive step, N < 2, rho <= 0, ...).
struct PreconditionError : Error {
    using Error::Error;
};

/// Inconsistent matrix/vector dimensions when composing objects.
struct DimensionError : Error {
    using Error::Error;
};

/// Stabilizability/detectability failure or no stabilizing solution.
struct SynthesisError : Error {
    using Error::Error;
};

/// Ill-conditioned invariant-subspace basis or failed decomposition.
struct ConditioningError : Error {
    using Error::Error;
};

/// Operation requires a Hurwitz generator and the input is not.
struct GeneratorError : Error {
    using Error::Error;
};

/// Realization collapsed (all states truncated, repeated leading Hankel value).
struct DegenerateRealizationError : Error {
    using Error::Error;
};

/// Interpolation constraint cannot be met (rank-deficient DC gain).
struct ConstraintError : Error {
    using Error::Error;
};

/// Signal evaluated outside its sample domain.
struct DomainError : Error {
    using Error::Error;
};

/// Simulated state became non-finite.
struct DivergenceError : Error {
    DivergenceError(const std::string& what, double t) : Error(what), first_bad_time(t) {}
    double first_bad_time;
};

/// Projection invariant violated on entry; the integrator step is too large.
struct StepSizeError : Error {
    using Error::Error;
};

/// Config file could not be parsed or is missing required fields.
struct ConfigError : Error {
    using Error::Error;
};

/// Spectral abscissa max_i Re(lambda_i(A)).
double spectral_abscissa(const Matrix& A);

/// True when every eigenvalue of A has real part < 0.
bool is_hurwitz(const Matrix& A);

inline void require_hurwitz(const Matrix& A, const char* who) {
    if (!is_hurwitz(A)) {
        throw GeneratorError(std::string(who) + ": generator is not Hurwitz");
    }
}

}  // namespace dyadic
