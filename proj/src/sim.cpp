#include "dyadic/sim.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace dyadic {

void SimulationConfig::validate() const {
    if (!(dt > 0.0)) throw PreconditionError("SimulationConfig: dt must be positive");
    if (!(T >= 10.0 * dt)) {
        throw PreconditionError("SimulationConfig: T must be at least 10 dt");
    }
    const double slack = 1e-9 * (1.0 + T);
    if (reference.horizon() < T - slack) {
        throw PreconditionError("SimulationConfig: reference must cover [0, T]");
    }
    if (reference.dim() != plant.linear.p()) {
        throw DimensionError("SimulationConfig: reference dimension mismatch");
    }
    if (v0.size() != plant.linear.n()) {
        throw DimensionError("SimulationConfig: v0 dimension mismatch");
    }
    if (mode == SimulationMode::LawClosedLoop && !law) {
        throw PreconditionError("SimulationConfig: law mode requires a control law");
    }
    if (mode == SimulationMode::CompensatorClosedLoop && !compensator) {
        throw PreconditionError(
            "SimulationConfig: compensator mode requires an approximant");
    }
    if (adaptation) adaptation->validate();
}

double trapezoid_inner(const Vector& times, const Matrix& a, const Matrix& b) {
    double acc = 0.0;
    for (Index i = 0; i + 1 < times.size(); ++i) {
        const double f0 = a.col(i).dot(b.col(i));
        const double f1 = a.col(i + 1).dot(b.col(i + 1));
        acc += 0.5 * (times(i + 1) - times(i)) * (f0 + f1);
    }
    return acc;
}

Matrix simulate_linear(const Matrix& A, const Matrix& B, const SignalTimeline& w,
                       const Vector& x0) {
    if (B.cols() != w.dim() || A.rows() != x0.size()) {
        throw DimensionError("simulate_linear: dimension mismatch");
    }
    Matrix xs(x0.size(), w.samples());
    Vector x = x0;
    xs.col(0) = x;
    auto rhs = [&](double t, const Vector& z) -> Vector { return A * z + B * w.eval(t); };
    for (Index i = 0; i + 1 < w.samples(); ++i) {
        const double t0 = w.times(i);
        const double h = w.times(i + 1) - t0;
        const Vector k1 = rhs(t0, x);
        const Vector k2 = rhs(t0 + 0.5 * h, x + 0.5 * h * k1);
        const Vector k3 = rhs(t0 + 0.5 * h, x + 0.5 * h * k2);
        const Vector k4 = rhs(t0 + h, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        xs.col(i + 1) = x;
    }
    return xs;
}

namespace {

Vector padded(const Vector& v, Index n, const char* who) {
    if (v.size() == 0) return Vector::Zero(n);
    if (v.size() != n) throw DimensionError(std::string(who) + ": dimension mismatch");
    return v;
}

struct LoopState {
    Vector v;
    Vector vp;      // particular half / its observer
    Vector vh;      // homogeneous half / its observer
    Vector alpha;   // parameter estimate (constant truth in law mode)
    Vector p;       // compensator state
};

LoopState axpy(const LoopState& s, double h, const LoopState& d) {
    return {s.v + h * d.v, s.vp + h * d.vp, s.vh + h * d.vh, s.alpha + h * d.alpha,
            s.p + h * d.p};
}

}  // namespace

Trajectory integrate_closed_loop(const SimulationConfig& cfg) {
    cfg.validate();
    const Index n = cfg.plant.linear.n();
    const Index m = cfg.plant.linear.m();
    const Index py = cfg.plant.linear.p();
    const Matrix& A = cfg.plant.linear.A;
    const Matrix& B = cfg.plant.linear.B;
    const Matrix& C = cfg.plant.linear.C;
    const Matrix& A_m = cfg.sol.A_m;
    const Matrix& K = cfg.sol.K;

    const bool law_mode = cfg.mode == SimulationMode::LawClosedLoop;
    const Index np = law_mode ? 0 : cfg.compensator->order();

    const auto steps = static_cast<Index>(std::llround(cfg.T / cfg.dt));
    if (steps < 1) throw PreconditionError("integrate_closed_loop: empty horizon");

    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.v.resize(n, steps + 1);
    traj.v_hat_p.resize(n, steps + 1);
    traj.v_hat_h.resize(n, steps + 1);
    traj.alpha_hat.resize(n, steps + 1);
    traj.u.resize(m, steps + 1);
    traj.u_R.resize(m, steps + 1);
    traj.y.resize(py, steps + 1);
    traj.y_hat_p.resize(py, steps + 1);
    traj.y_hat_h.resize(py, steps + 1);
    traj.sigma.resize(py, steps + 1);
    traj.p.resize(np, steps + 1);

    LoopState s;
    s.v = cfg.v0;
    s.alpha = law_mode ? cfg.plant.alpha
                       : padded(cfg.alpha_hat0, n, "SimulationConfig::alpha_hat0");
    s.p = Vector::Zero(np);
    if (law_mode) {
        s.vp = padded(cfg.v_p0, n, "SimulationConfig::v_p0");
        s.vh = cfg.v0 - s.vp;
    } else {
        s.vp = padded(cfg.v_hat_p0, n, "SimulationConfig::v_hat_p0");
        s.vh = padded(cfg.v_hat_h0, n, "SimulationConfig::v_hat_h0");
    }

    const double nu_alpha = cfg.plant.nu_alpha;
    const double eps = cfg.adaptation ? cfg.adaptation->epsilon : 0.0;

    // instantaneous control and compensator drive for the current state
    auto control = [&](double t, const LoopState& z, Vector& u, Vector& u_R,
                       Vector& sigma_out) {
        if (law_mode) {
            u = cfg.law->evaluate(t, z.vh, z.vp);
            u_R = u + K * z.v;
            sigma_out = cfg.reference.eval(t) - C * z.vp;
        } else {
            sigma_out = cfg.reference.eval(t) - C * z.vp;
            Vector hc = Vector::Zero(m);
            if (np > 0) hc = cfg.compensator->H_C * z.p;
            if (cfg.compensator->has_feedthrough()) hc += cfg.compensator->D_H * sigma_out;
            u_R = cfg.sol.Rinv * hc;
            u = -K * z.v + u_R;
        }
    };

    auto derivative = [&](double t, const LoopState& z) -> LoopState {
        if (!z.v.allFinite() || !z.vp.allFinite() || !z.vh.allFinite() ||
            !z.alpha.allFinite() || !z.p.allFinite()) {
            throw DivergenceError("integrate_closed_loop: non-finite state", t);
        }
        LoopState d;
        Vector u, u_R, sig;
        control(t, z, u, u_R, sig);
        const Vector f = eval_nonlinearity(cfg.plant, z.v);
        d.v = A * z.v + B * u + f;
        if (law_mode) {
            d.vp = A_m * z.vp + f;
            d.vh = A * z.vh + B * u + B * (K * z.vp);
            d.alpha = Vector::Zero(n);
            d.p = Vector::Zero(0);
        } else {
            const double phi_v = cfg.plant.phi(z.v);
            d.vp = A_m * z.vp + z.alpha * phi_v;
            d.vh = A_m * z.vh + B * u_R;
            d.alpha = Vector::Zero(n);
            if (cfg.adaptation) {
                const Vector vtilde = z.vp + z.vh - z.v;
                const Vector Pv = cfg.adaptation->P * vtilde;
                for (Index j = 0; j < n; ++j) {
                    d.alpha(j) = cfg.adaptation->gamma *
                                 project(z.alpha(j), -Pv(j) * phi_v, nu_alpha, eps);
                }
            }
            d.p = np > 0 ? (cfg.compensator->H_A * z.p + cfg.compensator->H_B * sig).eval()
                         : Vector::Zero(0);
        }
        return d;
    };

    auto record = [&](Index i, double t, const LoopState& z) {
        Vector u, u_R, sig;
        control(t, z, u, u_R, sig);
        traj.times(i) = t;
        traj.v.col(i) = z.v;
        traj.v_hat_p.col(i) = z.vp;
        traj.v_hat_h.col(i) = z.vh;
        traj.alpha_hat.col(i) = z.alpha;
        traj.u.col(i) = u;
        traj.u_R.col(i) = u_R;
        traj.y.col(i) = C * z.v;
        traj.y_hat_p.col(i) = C * z.vp;
        traj.y_hat_h.col(i) = C * z.vh;
        traj.sigma.col(i) = sig;
        if (np > 0) traj.p.col(i) = z.p;
        if (!traj.v.col(i).allFinite() || !traj.v_hat_p.col(i).allFinite() ||
            !traj.v_hat_h.col(i).allFinite() || !u.allFinite()) {
            throw DivergenceError("integrate_closed_loop: non-finite state", t);
        }
    };

    record(0, 0.0, s);
    for (Index i = 0; i < steps; ++i) {
        const double t0 = i * cfg.dt;
        const double h = std::min(cfg.dt, cfg.T - t0);
        LoopState k1, k2, k3, k4;
        try {
            k1 = derivative(t0, s);
            k2 = derivative(t0 + 0.5 * h, axpy(s, 0.5 * h, k1));
            k3 = derivative(t0 + 0.5 * h, axpy(s, 0.5 * h, k2));
            k4 = derivative(t0 + h, axpy(s, h, k3));
        } catch (const DivergenceError&) {
            throw;
        } catch (const StepSizeError&) {
            throw;
        } catch (const Error& e) {
            // overflow inside a stage evaluation (phi or the law hook)
            if (i == 0) throw;  // structural errors surface on the first step
            throw DivergenceError(std::string("integrate_closed_loop: ") + e.what(), t0);
        }
        s.v += (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
        s.vp += (h / 6.0) * (k1.vp + 2.0 * k2.vp + 2.0 * k3.vp + k4.vp);
        s.vh += (h / 6.0) * (k1.vh + 2.0 * k2.vh + 2.0 * k3.vh + k4.vh);
        s.alpha += (h / 6.0) * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha);
        if (np > 0) s.p += (h / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
        if (cfg.adaptation &&
            s.alpha.cwiseAbs().maxCoeff() > nu_alpha * (1.0 + eps) + 1e-9) {
            throw StepSizeError(
                "integrate_closed_loop: projection invariant violated; reduce dt");
        }
        record(i + 1, t0 + h, s);
    }
    return traj;
}

CostReport evaluate_cost(const Trajectory& traj, const Matrix& R) {
    if (!traj.u.allFinite()) {
        throw PreconditionError("evaluate_cost: trajectory must be finite");
    }
    CostReport rep;
    const Matrix err = traj.y_hat_h - traj.sigma;
    rep.tracking_term = trapezoid_inner(traj.times, err, err);
    rep.control_term = trapezoid_inner(traj.times, traj.u, R * traj.u);
    rep.J = rep.tracking_term + rep.control_term;
    rep.sigma_l2 = std::sqrt(std::max(0.0, trapezoid_inner(traj.times, traj.sigma, traj.sigma)));
    return rep;
}

Matrix apply_closed_loop_projector(const RiccatiSolution& sol,
                                   const SignalTimeline& sigma) {
    const SignalTimeline q = solve_q_backward(sol, sigma, sigma.horizon());
    const SignalTimeline u_R = tracking_input_from_adjoint(sol, q);
    const Matrix x = simulate_linear(sol.A_m, sol.B, u_R, Vector::Zero(sol.A_m.rows()));
    return sol.C * x;
}

CostIdentityReport verify_cost_identity(const RiccatiSolution& sol,
                                        const SignalTimeline& sigma,
                                        const Vector& v_h0) {
    const Index n = sol.A_m.rows();
    if (v_h0.size() != n) {
        throw DimensionError("verify_cost_identity: v_h0 dimension mismatch");
    }

    const SignalTimeline q = solve_q_backward(sol, sigma, sigma.horizon());
    const SignalTimeline u_R = tracking_input_from_adjoint(sol, q);

    // lhs: simulated cost of the homogeneous half driven by the oracle input
    const Matrix vh = simulate_linear(sol.A_m, sol.B, u_R, v_h0);
    const Matrix yh = sol.C * vh;
    const Matrix err = yh - sigma.values;
    CostIdentityReport rep;
    rep.lhs = trapezoid_inner(sigma.times, err, err) +
              trapezoid_inner(sigma.times, u_R.values, sol.R * u_R.values);

    // rhs: operator decomposition with P sigma = y_h at zero initial state
    const SignalTimeline no_input(sigma.times, Matrix::Zero(1, sigma.samples()));
    const Matrix g = sol.C * simulate_linear(sol.A_m, Matrix::Zero(n, 1), no_input, v_h0);
    const Matrix Ps = yh - g;  // P sigma
    const Matrix one_minus_P = sigma.values - Ps;
    const GramianResult Wo = observability_gramian(sol.A_m, sol.C);
    rep.rhs = trapezoid_inner(sigma.times, Ps, Ps) +
              trapezoid_inner(sigma.times, sigma.values, sigma.values) -
              trapezoid_inner(sigma.times, sigma.values, Ps) +
              v_h0.dot(Wo.W * v_h0) -
              2.0 * trapezoid_inner(sigma.times, g, one_minus_P);
    rep.diff = std::abs(rep.lhs - rep.rhs);
    return rep;
}

CostGapReport cost_gap_check(const RiccatiSolution& sol, const NehariApproximant& comp,
                             const SuboptimalityBound& S, const SignalTimeline& sigma,
                             const Vector& v_h0) {
    CostGapReport rep;
    rep.sigma_l2 =
        std::sqrt(std::max(0.0, trapezoid_inner(sigma.times, sigma.values, sigma.values)));
    rep.bound = S.S * rep.sigma_l2;

    auto cost = [&](const SignalTimeline& u_R) {
        const Matrix vh = simulate_linear(sol.A_m, sol.B, u_R, v_h0);
        const Matrix yh = sol.C * vh;
        const Matrix err = yh - sigma.values;
        const Matrix u = u_R.values - sol.K * vh;
        const double track = std::sqrt(std::max(0.0, trapezoid_inner(sigma.times, err, err)));
        const double ctrl =
            std::sqrt(std::max(0.0, trapezoid_inner(sigma.times, u, sol.R * u)));
        return track + ctrl;
    };

    // J1: non-causal oracle
    const SignalTimeline q = solve_q_backward(sol, sigma, sigma.horizon());
    rep.J1 = cost(tracking_input_from_adjoint(sol, q));

    // J2: causal compensator driven by the same exogenous sigma
    Matrix uR2(sol.B.cols(), sigma.samples());
    if (comp.order() > 0) {
        const Matrix p = simulate_linear(comp.H_A, comp.H_B, sigma,
                                         Vector::Zero(comp.order()));
        uR2 = comp.H_C * p;
    } else {
        uR2.setZero();
    }
    if (comp.has_feedthrough()) uR2 += comp.D_H * sigma.values;
    rep.J2 = cost(SignalTimeline(sigma.times, sol.Rinv * uR2));

    rep.gap = std::abs(rep.J2 - rep.J1);
    rep.within_bound = rep.gap <= rep.bound + 1e-6 * (1.0 + rep.bound);
    return rep;
}

SignalTimeline random_l2_signal(double T, double dt, Index dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> freq(0.1, 2.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> damp(0.05, 0.5);

    constexpr int kModes = 6;
    struct Mode {
        double a, w, ph, mu;
    };
    std::vector<std::vector<Mode>> modes(dim);
    for (Index d = 0; d < dim; ++d) {
        for (int k = 0; k < kModes; ++k) {
            modes[d].push_back({amp(rng), freq(rng), phase(rng), damp(rng)});
        }
    }
    return SignalTimeline::sample(T, dt, [&](double t) {
        Vector out(dim);
        for (Index d = 0; d < dim; ++d) {
            double s = 0.0;
            for (const Mode& mk : modes[d]) {
                s += mk.a * std::sin(mk.w * t + mk.ph) * std::exp(-mk.mu * t);
            }
            out(d) = s;
        }
        return out;
    });
}

}  // namespace dyadic
