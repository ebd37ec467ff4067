#include "dyadic/adaptive.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>

namespace dyadic {

void AdaptationConfig::validate() const {
    if (gamma < 0.0 || !std::isfinite(gamma)) {
        throw PreconditionError("AdaptationConfig: gamma must be nonnegative");
    }
    if (!(epsilon > 0.0) || epsilon > 0.1) {
        throw PreconditionError("AdaptationConfig: epsilon must lie in (0, 0.1]");
    }
    if (P.rows() != P.cols() || P.rows() == 0) {
        throw DimensionError("AdaptationConfig: P must be square");
    }
}

double project(double alpha_hat_j, double y_j, double nu_alpha, double epsilon) {
    const double outer = nu_alpha * (1.0 + epsilon);
    const double mag = std::abs(alpha_hat_j);
    if (mag > outer * (1.0 + 1e-12) + 1e-300) {
        throw StepSizeError(
            "project: parameter estimate left the projection set; reduce the "
            "integrator step");
    }
    if (mag <= nu_alpha) return y_j;                  // interior
    if (y_j * alpha_hat_j <= 0.0) return y_j;         // pointing inward
    const double taper = 1.0 - (mag - nu_alpha) / (nu_alpha * epsilon);
    return y_j * std::max(taper, 0.0);
}

namespace {

struct ObserverDerivative {
    Vector dvp;
    Vector dvh;
    Vector dalpha;
};

ObserverDerivative observer_rhs(const ObserverState& s, const Vector& v,
                                const Vector& u_R, const AdaptationConfig& cfg,
                                const RiccatiSolution& sol, double phi_v,
                                double nu_alpha) {
    ObserverDerivative d;
    d.dvp = sol.A_m * s.v_hat_p + s.alpha_hat * phi_v;
    d.dvh = sol.A_m * s.v_hat_h + sol.B * u_R;
    const Vector vtilde = s.v_hat_p + s.v_hat_h - v;
    const Vector Pv = cfg.P * vtilde;
    d.dalpha.resize(s.alpha_hat.size());
    for (Index j = 0; j < s.alpha_hat.size(); ++j) {
        // y_j = -<P vtilde, phi(v) e_j>
        d.dalpha(j) =
            cfg.gamma * project(s.alpha_hat(j), -Pv(j) * phi_v, nu_alpha, cfg.epsilon);
    }
    return d;
}

ObserverState advance(const ObserverState& s, const ObserverDerivative& d, double h) {
    ObserverState out;
    out.v_hat_p = s.v_hat_p + h * d.dvp;
    out.v_hat_h = s.v_hat_h + h * d.dvh;
    out.alpha_hat = s.alpha_hat + h * d.dalpha;
    return out;
}

}  // namespace

ObserverState observer_step(const ObserverState& state, const Vector& v,
                            const Vector& u_R, const AdaptationConfig& cfg,
                            const RiccatiSolution& sol, const BasisFunction& phi,
                            double nu_alpha, double dt) {
    if (!(dt > 0.0)) {
        throw PreconditionError("observer_step: dt must be positive");
    }
    cfg.validate();
    const double phi_v = phi(v);
    if (!std::isfinite(phi_v)) {
        throw Error("observer_step: phi(v) is not finite");
    }

    const ObserverDerivative k1 = observer_rhs(state, v, u_R, cfg, sol, phi_v, nu_alpha);
    const ObserverState s2 = advance(state, k1, 0.5 * dt);
    const ObserverDerivative k2 = observer_rhs(s2, v, u_R, cfg, sol, phi_v, nu_alpha);
    const ObserverState s3 = advance(state, k2, 0.5 * dt);
    const ObserverDerivative k3 = observer_rhs(s3, v, u_R, cfg, sol, phi_v, nu_alpha);
    const ObserverState s4 = advance(state, k3, dt);
    const ObserverDerivative k4 = observer_rhs(s4, v, u_R, cfg, sol, phi_v, nu_alpha);

    ObserverState out;
    out.v_hat_p = state.v_hat_p + (dt / 6.0) * (k1.dvp + 2.0 * k2.dvp + 2.0 * k3.dvp + k4.dvp);
    out.v_hat_h = state.v_hat_h + (dt / 6.0) * (k1.dvh + 2.0 * k2.dvh + 2.0 * k3.dvh + k4.dvh);
    out.alpha_hat =
        state.alpha_hat +
        (dt / 6.0) * (k1.dalpha + 2.0 * k2.dalpha + 2.0 * k3.dalpha + k4.dalpha);

    const double outer = nu_alpha * (1.0 + cfg.epsilon);
    if (out.alpha_hat.cwiseAbs().maxCoeff() > outer + 1e-9) {
        throw StepSizeError(
            "observer_step: projection invariant violated after the step; reduce dt");
    }
    return out;
}

DeltaConstants delta_constants(const NehariApproximant& H, const RiccatiSolution& sol,
                               const SemilinearPlant& plant, double rho_w,
                               double epsilon, int lipschitz_samples) {
    if (H.order() > 0) require_hurwitz(H.H_A, "delta_constants");
    if (!(rho_w > 0.0)) {
        throw PreconditionError("delta_constants: rho_w must be positive");
    }

    DeltaConstants out;
    // L-infinity induced gain of the compensator path
    if (H.order() > 0) {
        const DecayCertificate cert = decay_certificate(H.H_A);
        const double t_star = std::log(cert.M / 1e-12) / cert.beta;
        out.g_H = integrate_adaptive(
            [&](double t) {
                const Matrix E = (H.H_A * t).exp();
                return (H.H_C * E * H.H_B).norm();
            },
            0.0, t_star, 1e-9);
        out.g_H += cert.M * std::exp(-cert.beta * t_star) / cert.beta *
                   H.H_C.norm() * H.H_B.norm();
    }
    if (H.has_feedthrough()) {
        Eigen::JacobiSVD<Matrix> svd(H.D_H);
        out.g_H += svd.singularValues()(0);
    }

    out.bounds = estimate_lipschitz_bounds(plant, rho_w, lipschitz_samples);

    Eigen::JacobiSVD<Matrix> rsvd(sol.Rinv);
    const double r_inv = rsvd.singularValues()(0);
    Eigen::JacobiSVD<Matrix> csvd(sol.C);
    const double c_norm = csvd.singularValues()(0);
    const double c_p = convolution_operator_norm(sol.A_m);
    const double alpha_ball = plant.nu_alpha * (1.0 + epsilon);

    out.delta_0r = r_inv * out.g_H;
    out.delta_0w = r_inv * out.g_H * c_norm * c_p * alpha_ball * out.bounds.nu1;
    out.delta_0u = r_inv * out.g_H * c_norm * c_p * alpha_ball * out.bounds.nu2;
    return out;
}

SmallGainReport small_gain_check(double M, double rho0, double conv_norm, double nu1,
                                 double nu2, double delta_0w, double delta_0r,
                                 double delta_0u, double r_inf, double norm_B,
                                 double rho_w, double epsilon_s) {
    for (double c : {M, rho0, conv_norm, nu1, nu2, delta_0w, delta_0r, delta_0u, r_inf,
                     norm_B}) {
        if (c < 0.0 || !std::isfinite(c)) {
            throw PreconditionError("small_gain_check: constants must be nonnegative");
        }
    }
    if (!(rho_w > 0.0)) {
        throw PreconditionError("small_gain_check: rho_w must be positive");
    }

    SmallGainReport rep;
    rep.M = M;
    rep.rho0 = rho0;
    rep.conv_norm = conv_norm;
    rep.nu1 = nu1;
    rep.nu2 = nu2;
    rep.delta_0w = delta_0w;
    rep.delta_0r = delta_0r;
    rep.delta_0u = delta_0u;
    rep.r_inf = r_inf;
    rep.norm_B = norm_B;
    rep.rho_w = rho_w;
    rep.epsilon_s = epsilon_s;

    const double denom = 1.0 - conv_norm * (nu1 + norm_B * delta_0w);
    if (denom <= 0.0) {
        rep.lhs = std::numeric_limits<double>::infinity();
        rep.margin = -std::numeric_limits<double>::infinity();
        rep.satisfied = false;
        return rep;
    }
    rep.lhs = (M * rho0 + conv_norm * (nu2 + delta_0r * r_inf + delta_0u)) / denom;
    rep.margin = (rho_w - epsilon_s) - rep.lhs;
    rep.satisfied = rep.margin >= 0.0;
    return rep;
}

}  // namespace dyadic
