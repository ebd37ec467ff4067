#include "dyadic/laws.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace dyadic {

const char* law_kind_name(LawKind kind) {
    switch (kind) {
        case LawKind::Lqr: return "LQR";
        case LawKind::Lqt: return "LQT";
        case LawKind::PureFormRegulator: return "PureFormRegulator";
        case LawKind::PureFormTracker: return "PureFormTracker";
        case LawKind::Sdre: return "SDRE";
        case LawKind::OracleTracker: return "OracleTracker";
        case LawKind::DynamicCompensator: return "DynamicCompensator";
    }
    return "unknown";
}

Vector ControlLaw::evaluate(double t, const Vector& v_h, const Vector& v_p) const {
    if (v_h.size() != K.cols() || v_p.size() != K.cols()) {
        throw DimensionError("ControlLaw: state dimension mismatch");
    }
    Vector u = -K * (v_h + v_p);
    if (Gp.size() > 0) u.noalias() += Gp * v_p;
    if (ff.size() > 0) u += ff;
    if (Mf.size() > 0 && f) u.noalias() += Mf * f(v_h + v_p);
    if (ff_timeline) u += ff_timeline->eval(t);
    return u;
}

Vector ControlLaw::evaluate_split_form(const Vector& v_h, const Vector& v_p) const {
    if (kind != LawKind::PureFormRegulator && kind != LawKind::PureFormTracker) {
        throw PreconditionError("ControlLaw: split form is defined for pure-form laws");
    }
    // -K v_h - R^-1 B' W_o v_p (+ constant part); R^-1 B' W_o = K - Gp
    Vector u = -K * v_h - (K - Gp) * v_p;
    if (ff.size() > 0) u += ff;
    return u;
}

ControlLaw lqr_law(const RiccatiSolution& sol) {
    ControlLaw law;
    law.kind = LawKind::Lqr;
    law.K = sol.K;
    return law;
}

namespace {

Vector tracking_feedforward(const RiccatiSolution& sol, const Vector& r) {
    if (r.size() != sol.C.rows()) {
        throw DimensionError("tracking feedforward: reference dimension mismatch");
    }
    // -R^-1 B' (A_m')^-1 C' r
    const Vector w = sol.A_m.transpose().partialPivLu().solve(sol.C.transpose() * r);
    return -sol.Rinv * (sol.B.transpose() * w);
}

}  // namespace

ControlLaw lqt_law(const RiccatiSolution& sol, const Vector& r) {
    require_hurwitz(sol.A_m, "lqt_law");
    ControlLaw law;
    law.kind = LawKind::Lqt;
    law.K = sol.K;
    law.ff = tracking_feedforward(sol, r);
    return law;
}

ControlLaw pure_form_regulator(const RiccatiSolution& sol, const GramianResult& W_o) {
    if (W_o.W.rows() != sol.A_m.rows()) {
        throw DimensionError("pure_form_regulator: Gramian dimension mismatch");
    }
    ControlLaw law;
    law.kind = LawKind::PureFormRegulator;
    law.K = sol.K;
    law.Gp = sol.Rinv * sol.B.transpose() * (sol.Pi - W_o.W);
    return law;
}

ControlLaw pure_form_tracker(const RiccatiSolution& sol, const GramianResult& W_o,
                             const Vector& r) {
    ControlLaw law = pure_form_regulator(sol, W_o);
    law.kind = LawKind::PureFormTracker;
    law.ff = tracking_feedforward(sol, r);
    return law;
}

ControlLaw sdre_law(const RiccatiSolution& sol, const SemilinearPlant& plant,
                    const Vector& r) {
    require_hurwitz(sol.A_m, "sdre_law");
    if (plant.linear.n() != sol.A_m.rows()) {
        throw DimensionError("sdre_law: plant dimension mismatch");
    }
    ControlLaw law;
    law.kind = LawKind::Sdre;
    law.K = sol.K;
    law.ff = tracking_feedforward(sol, r);
    // + R^-1 B' (A_m')^-1 Pi f(v)
    const Matrix W = sol.A_m.transpose().partialPivLu().solve(sol.Pi);
    law.Mf = sol.Rinv * sol.B.transpose() * W;
    law.f = [plant](const Vector& v) { return eval_nonlinearity(plant, v); };
    return law;
}

ControlLaw oracle_tracker(const RiccatiSolution& sol, const SignalTimeline& u_R) {
    if (u_R.dim() != sol.B.cols()) {
        throw DimensionError("oracle_tracker: feedforward dimension mismatch");
    }
    ControlLaw law;
    law.kind = LawKind::OracleTracker;
    law.K = sol.K;
    law.Gp = sol.K;  // cancels the v_p part: u = -K v_h + u_R(t)
    law.ff_timeline = u_R;
    return law;
}

SignalTimeline solve_q_backward(const RiccatiSolution& sol, const SignalTimeline& sigma,
                                double T) {
    const Index n = sol.A_m.rows();
    if (sigma.dim() != sol.C.rows()) {
        throw DimensionError("solve_q_backward: sigma dimension mismatch");
    }
    const double slack = 1e-9 * (1.0 + T);
    if (sigma.horizon() < T - slack) {
        throw DomainError("solve_q_backward: sigma grid does not cover [0, T]");
    }

    // last grid index inside [0, T]
    Index iT = sigma.samples() - 1;
    while (iT > 0 && sigma.times(iT) > T + slack) --iT;

    const Matrix At = sol.A_m.transpose();
    const Matrix Ct = sol.C.transpose();
    auto rhs = [&](double t, const Vector& q) -> Vector {
        return -At * q + Ct * sigma.eval(t);
    };

    Matrix q_samples = Matrix::Zero(n, sigma.samples());
    Vector q = Vector::Zero(n);
    for (Index i = iT; i > 0; --i) {
        const double t1 = sigma.times(i);
        const double t0 = sigma.times(i - 1);
        const double h = t0 - t1;  // negative: backward step
        const Vector k1 = rhs(t1, q);
        const Vector k2 = rhs(t1 + 0.5 * h, q + 0.5 * h * k1);
        const Vector k3 = rhs(t1 + 0.5 * h, q + 0.5 * h * k2);
        const Vector k4 = rhs(t0, q + h * k3);
        q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        q_samples.col(i - 1) = q;
    }
    return SignalTimeline(sigma.times, std::move(q_samples));
}

SignalTimeline tracking_input_from_adjoint(const RiccatiSolution& sol,
                                           const SignalTimeline& q) {
    const Matrix G = -sol.Rinv * sol.B.transpose();
    return SignalTimeline(q.times, G * q.values);
}

LawGapReport law_gap(const ControlLaw& law1, const ControlLaw& law2,
                     const Vector& times, const Matrix& v_h_samples,
                     const Matrix& v_p_samples) {
    const Index k = times.size();
    if (v_h_samples.cols() != k || v_p_samples.cols() != k) {
        throw DimensionError("law_gap: one state column per sample instant required");
    }
    LawGapReport report;
    report.times = times;
    report.gap.resize(k);
    for (Index i = 0; i < k; ++i) {
        const Vector u1 = law1.evaluate(times(i), v_h_samples.col(i), v_p_samples.col(i));
        const Vector u2 = law2.evaluate(times(i), v_h_samples.col(i), v_p_samples.col(i));
        report.gap(i) = (u1 - u2).norm();
    }
    report.sup_gap = report.gap.maxCoeff();

    // least squares on log gap over [0.1 T, 0.9 T], floored at 1e-12
    const double T = times(k - 1);
    double st = 0, st2 = 0, sy = 0, sty = 0;
    Index count = 0;
    for (Index i = 0; i < k; ++i) {
        if (times(i) < 0.1 * T || times(i) > 0.9 * T) continue;
        if (report.gap(i) <= 1e-12) continue;
        const double y = std::log(report.gap(i));
        st += times(i);
        st2 += times(i) * times(i);
        sy += y;
        sty += times(i) * y;
        ++count;
    }
    report.fit_samples = count;
    if (count >= 2) {
        const double denom = count * st2 - st * st;
        if (denom > 0.0) report.fitted_decay_rate = -(count * sty - st * sy) / denom;
    }
    return report;
}

Matrix quadrature_inverse(const Matrix& A) {
    require_hurwitz(A, "quadrature_inverse");
    const DecayCertificate cert = decay_certificate(A);
    const double t_star = std::log(cert.M / 1e-12) / cert.beta;

    // composite Simpson of exp(A t) on [0, t_star] via propagator recurrence
    const int panels = 4096;
    const double h = t_star / (2 * panels);
    const Matrix P = (A * h).exp();
    Matrix E = Matrix::Identity(A.rows(), A.cols());
    Matrix sum = E;
    for (int i = 1; i < 2 * panels; ++i) {
        E = E * P;
        sum += (i % 2 == 1 ? 4.0 : 2.0) * E;
    }
    E = E * P;
    sum += E;
    return -(h / 3.0) * sum;
}

Vector sdre_gap_asymptote(const RiccatiSolution& sol, const Vector& f_value) {
    require_hurwitz(sol.A_m, "sdre_gap_asymptote");
    if (f_value.size() != sol.A_m.rows()) {
        throw DimensionError("sdre_gap_asymptote: f dimension mismatch");
    }
    // steady state of Gamma*_{A_m} C'C Gamma_{A_m} f for constant f, with both
    // convolution tails evaluated by quadrature
    const Matrix Ji = quadrature_inverse(sol.A_m);             // = A_m^-1
    const Matrix Jit = quadrature_inverse(sol.A_m.transpose());
    const Vector Lf = Jit * (sol.C.transpose() * (sol.C * (Ji * f_value)));
    const Vector Pf = sol.A_m.transpose().partialPivLu().solve(sol.Pi * f_value);
    return -sol.Rinv * (sol.B.transpose() * (Lf + Pf));
}

}  // namespace dyadic
