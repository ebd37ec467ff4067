#include "dyadic/sim.hpp"

#include "support.hpp"

#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace dyadic;
using namespace dyadic::testing;

namespace {

const Matrix kR1 = Matrix::Identity(1, 1);

RiccatiSolution scalar_sol() {
    Matrix A(1, 1), B(1, 1), C(1, 1);
    A << 1.0;
    B << 1.0;
    C << 1.0;
    return solve_care(StateSpaceSystem(A, B, C), kR1);
}

Vector vec1(double x) {
    Vector v(1);
    v << x;
    return v;
}

SimulationConfig scalar_lqr_config(double T, double dt, double v0) {
    SimulationConfig cfg;
    cfg.T = T;
    cfg.dt = dt;
    cfg.plant = scalar_plant([](const Vector&) { return 0.0; }, 0.0, 1.0);
    cfg.sol = scalar_sol();
    cfg.mode = SimulationMode::LawClosedLoop;
    cfg.law = lqr_law(cfg.sol);
    cfg.reference = SignalTimeline::zero(T, dt, 1);
    cfg.v0 = vec1(v0);
    cfg.v_p0 = vec1(0.0);
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("sim");

TEST_CASE("equilibrium stays at zero") {
    const Trajectory traj = integrate_closed_loop(scalar_lqr_config(5.0, 1e-3, 0.0));
    CHECK(traj.v.cwiseAbs().maxCoeff() == 0.0);
    CHECK(traj.u.cwiseAbs().maxCoeff() == 0.0);
    CHECK(traj.y.cwiseAbs().maxCoeff() == 0.0);
    CHECK(traj.sigma.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear closed loop obeys the decay certificate") {
    std::mt19937_64 rng(21);
    const StateSpaceSystem sys = random_care_system(rng, 4);
    const RiccatiSolution sol = solve_care(sys, kR1);
    const DecayCertificate cert = decay_certificate(sol.A_m);

    SimulationConfig cfg;
    cfg.T = 8.0;
    cfg.dt = 1e-3;
    cfg.plant = SemilinearPlant(sys, [](const Vector&) { return 0.0; }, Vector::Zero(4),
                                1.0, 2.0);
    cfg.sol = sol;
    cfg.mode = SimulationMode::LawClosedLoop;
    cfg.law = lqr_law(sol);
    cfg.reference = SignalTimeline::zero(8.0, 1e-3, 1);
    cfg.v0 = random_vector(rng, 4);
    const Trajectory traj = integrate_closed_loop(cfg);
    const double v0n = cfg.v0.norm();
    for (Index i = 0; i < traj.samples(); i += 50) {
        CHECK(traj.v.col(i).norm() <=
              cert.M * std::exp(-cert.beta * traj.times(i)) * v0n * (1.0 + 1e-6));
    }
}

TEST_CASE("integrator shows fourth-order convergence") {
    // pure linear benchmark: error against the exact propagator
    std::mt19937_64 rng(33);
    const StateSpaceSystem sys = random_care_system(rng, 3);
    const RiccatiSolution sol = solve_care(sys, kR1);
    const Vector v0 = random_vector(rng, 3);
    const Matrix exact = (sol.A_m * 1.0).exp();

    auto terminal_error = [&](double dt) {
        SimulationConfig cfg;
        cfg.T = 1.0;
        cfg.dt = dt;
        cfg.plant = SemilinearPlant(sys, [](const Vector&) { return 0.0; },
                                    Vector::Zero(3), 1.0, 2.0);
        cfg.sol = sol;
        cfg.mode = SimulationMode::LawClosedLoop;
        cfg.law = lqr_law(sol);
        cfg.reference = SignalTimeline::zero(1.0, dt, 1);
        cfg.v0 = v0;
        const Trajectory traj = integrate_closed_loop(cfg);
        return (traj.v.col(traj.samples() - 1) - exact * v0).norm();
    };

    const double e1 = terminal_error(1e-2);
    const double e2 = terminal_error(5e-3);
    const double e3 = terminal_error(2.5e-3);
    const double order12 = std::log2(e1 / e2);
    const double order23 = std::log2(e2 / e3);
    CHECK(order12 >= 3.7);
    CHECK(order23 >= 3.7);
}

TEST_CASE("trapezoidal cost accumulation") {
    SUBCASE("all-zero trajectory has zero cost") {
        const Trajectory traj = integrate_closed_loop(scalar_lqr_config(2.0, 1e-2, 0.0));
        const CostReport rep = evaluate_cost(traj, kR1);
        CHECK(rep.J == 0.0);
        CHECK(rep.tracking_term == 0.0);
        CHECK(rep.control_term == 0.0);
    }
    SUBCASE("constant integrand: u = 1, y_h = sigma, R = 2, T = 3 gives J = 6") {
        Trajectory traj;
        const Index k = 31;
        traj.times = Vector::LinSpaced(k, 0.0, 3.0);
        traj.u = Matrix::Ones(1, k);
        traj.y_hat_h = Matrix::Constant(1, k, 0.7);
        traj.sigma = traj.y_hat_h;
        traj.v = Matrix::Zero(1, k);
        Matrix R2(1, 1);
        R2 << 2.0;
        const CostReport rep = evaluate_cost(traj, R2);
        CHECK(rep.J == doctest::Approx(6.0).epsilon(1e-12));
        CHECK(rep.tracking_term == doctest::Approx(0.0));
    }
    SUBCASE("scalar LQR run reproduces the optimal cost v0' Pi v0") {
        const SimulationConfig cfg = scalar_lqr_config(30.0, 1e-3, 1.0);
        const Trajectory traj = integrate_closed_loop(cfg);
        const CostReport rep = evaluate_cost(traj, kR1);
        CHECK(rep.J == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-4));
        CHECK(rep.J == doctest::Approx(rep.tracking_term + rep.control_term).epsilon(1e-10));
    }
}

TEST_CASE("cost identity") {
    const RiccatiSolution sol = scalar_sol();
    const double T = 35.0;
    const double dt = 1e-3;

    SUBCASE("zero data gives zero on both sides") {
        const SignalTimeline sigma = SignalTimeline::zero(T, dt, 1);
        const CostIdentityReport rep = verify_cost_identity(sol, sigma, vec1(0.0));
        CHECK(rep.lhs == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(rep.rhs == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("pure transient reduces to the Gramian quadratic form") {
        const SignalTimeline sigma = SignalTimeline::zero(T, dt, 1);
        const CostIdentityReport rep = verify_cost_identity(sol, sigma, vec1(0.8));
        const GramianResult Wo = observability_gramian(sol.A_m, sol.C);
        CHECK(rep.rhs == doctest::Approx(0.64 * Wo.W(0, 0)).epsilon(1e-9));
        CHECK(rep.diff <= 1e-4 * (1.0 + rep.lhs));
    }
    SUBCASE("exponential sigma with zero initial state") {
        const SignalTimeline sigma = SignalTimeline::sample(
            T, dt, [](double t) { return vec1(std::exp(-t)); });
        const CostIdentityReport rep = verify_cost_identity(sol, sigma, vec1(0.0));
        CHECK(rep.diff <= 1e-4 * (1.0 + rep.lhs));
    }
    SUBCASE("mixed sigma and initial state exercises the cross term") {
        const SignalTimeline sigma = SignalTimeline::sample(
            T, dt, [](double t) { return vec1(std::exp(-0.5 * t) * std::cos(t)); });
        const CostIdentityReport rep = verify_cost_identity(sol, sigma, vec1(-0.6));
        CHECK(rep.diff <= 1e-4 * (1.0 + rep.lhs));
    }
}

TEST_CASE("cost gap against the analytic bound") {
    const RiccatiSolution sol = scalar_sol();
    const StateSpaceSystem G_m(sol.A_m, sol.B, sol.C);
    const NehariApproximant comp = solve_nehari(G_m, kR1);
    const SuboptimalityBound S = suboptimality_constant(G_m, kR1);
    const double T = 30.0;
    const double dt = 1e-3;

    SUBCASE("zero sigma gives equal costs") {
        const SignalTimeline sigma = SignalTimeline::zero(T, dt, 1);
        const CostGapReport rep = cost_gap_check(sol, comp, S, sigma, vec1(0.7));
        CHECK(rep.gap <= 1e-9);
        CHECK(rep.within_bound);
    }
    SUBCASE("bound holds over seeded draws and scales with sigma") {
        int ok = 0;
        for (int draw = 0; draw < 25; ++draw) {
            const SignalTimeline sigma = random_l2_signal(T, dt, 1, 900 + draw);
            const CostGapReport rep = cost_gap_check(sol, comp, S, sigma, vec1(0.2));
            if (rep.within_bound) ++ok;
        }
        CHECK(ok == 25);

        const SignalTimeline sigma = random_l2_signal(T, dt, 1, 1234);
        const CostGapReport one = cost_gap_check(sol, comp, S, sigma, vec1(0.0));
        const SignalTimeline ten(sigma.times, 10.0 * sigma.values);
        const CostGapReport big = cost_gap_check(sol, comp, S, ten, vec1(0.0));
        CHECK(big.bound == doctest::Approx(10.0 * one.bound).epsilon(1e-9));
        CHECK(big.within_bound);
    }
}

TEST_CASE("optimal cost is bounded iff sigma is square integrable") {
    const RiccatiSolution sol = scalar_sol();
    auto oracle_cost = [&](double T, bool decaying) {
        const SignalTimeline sigma = SignalTimeline::sample(T, 1e-3, [&](double t) {
            return vec1(decaying ? std::exp(-t) : 1.0);
        });
        return verify_cost_identity(sol, sigma, vec1(0.0)).lhs;
    };
    // decaying sigma: cost converges with the horizon
    const double j10 = oracle_cost(10.0, true);
    const double j40 = oracle_cost(40.0, true);
    CHECK(std::abs(j40 - j10) <= 1e-4 * (1.0 + j40));
    // non-decaying sigma: strict monotone growth
    const double g10 = oracle_cost(10.0, false);
    const double g20 = oracle_cost(20.0, false);
    const double g40 = oracle_cost(40.0, false);
    CHECK(g20 > g10 * 1.5);
    CHECK(g40 > g20 * 1.5);
}

TEST_CASE("identical configurations produce bit-identical trajectories") {
    const SimulationConfig cfg = scalar_lqr_config(5.0, 1e-3, 0.9);
    const Trajectory a = integrate_closed_loop(cfg);
    const Trajectory b = integrate_closed_loop(cfg);
    CHECK((a.v - b.v).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.u - b.u).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.times - b.times).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("LQR gain is a local cost minimum") {
    std::mt19937_64 rng(55);
    const StateSpaceSystem sys = random_care_system(rng, 3);
    const RiccatiSolution sol = solve_care(sys, kR1);
    const double beta = decay_certificate(sol.A_m).beta;
    const double T = 50.0 / beta;
    const Vector v0 = random_vector(rng, 3);

    auto simulated_cost = [&](const Matrix& K) {
        SimulationConfig cfg;
        cfg.T = T;
        cfg.dt = 2e-3;
        cfg.plant = SemilinearPlant(sys, [](const Vector&) { return 0.0; },
                                    Vector::Zero(3), 1.0, 2.0);
        cfg.sol = sol;
        cfg.mode = SimulationMode::LawClosedLoop;
        ControlLaw law = lqr_law(sol);
        law.K = K;
        cfg.law = law;
        cfg.reference = SignalTimeline::zero(T, 2e-3, 1);
        cfg.v0 = v0;
        return evaluate_cost(integrate_closed_loop(cfg), kR1).J;
    };

    const double j_star = simulated_cost(sol.K);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix dK = random_matrix(rng, 1, 3);
        const Matrix K = sol.K + 0.01 * sol.K.norm() * dK / dK.norm();
        if (spectral_abscissa(sys.A - sys.B * K) >= 0.0) continue;
        CHECK(simulated_cost(K) >= j_star - 1e-8 * (1.0 + j_star));
    }
}

TEST_CASE("divergence reports the first bad sample") {
    // RK4 destabilized by an oversized step on a stiff plant
    Matrix A(1, 1), B(1, 1), C(1, 1);
    A << 1.0;
    B << 1.0;
    C << 1.0;
    const RiccatiSolution sol = solve_care(StateSpaceSystem(A, B, C), kR1);
    SimulationConfig cfg;
    cfg.T = 400.0;
    cfg.dt = 4.0;  // way beyond the stability region
    cfg.plant = scalar_plant([](const Vector& v) { return v.squaredNorm(); }, 0.9, 1.0);
    cfg.sol = sol;
    cfg.mode = SimulationMode::LawClosedLoop;
    cfg.law = lqr_law(sol);
    cfg.reference = SignalTimeline::zero(400.0, 4.0, 1);
    cfg.v0 = vec1(1.5);
    CHECK_THROWS_AS(integrate_closed_loop(cfg), DivergenceError);
    try {
        integrate_closed_loop(cfg);
    } catch (const DivergenceError& e) {
        CHECK(e.first_bad_time > 0.0);
        CHECK(e.first_bad_time <= 400.0);
    }
}

TEST_SUITE_END();
