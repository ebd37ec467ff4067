#include "dyadic/adaptive.hpp"

#include "dyadic/sim.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace dyadic;
using namespace dyadic::testing;

namespace {

const Matrix kR1 = Matrix::Identity(1, 1);

/// Heat-plant adaptive benchmark: N = 5, norm basis, constant reference.
struct Benchmark {
    SemilinearPlant plant;
    RiccatiSolution sol;
    NehariApproximant comp;

    Benchmark() {
        StateSpaceSystem sys = build_heat_plant(5, 1.0, 0.1);
        Vector alpha(5);
        alpha << 0.0, 0.2, 0.3, 0.1, 0.0;
        plant = SemilinearPlant(sys, [](const Vector& v) { return v.norm(); }, alpha,
                                0.5, 1.0);
        sol = solve_care(sys, kR1);
        comp = solve_constrained_nehari(StateSpaceSystem(sol.A_m, sol.B, sol.C), kR1);
    }

    SimulationConfig sim(double gamma, double T, double dt = 1e-3) const {
        SimulationConfig cfg;
        cfg.T = T;
        cfg.dt = dt;
        cfg.plant = plant;
        cfg.sol = sol;
        cfg.mode = SimulationMode::CompensatorClosedLoop;
        cfg.compensator = comp;
        AdaptationConfig ad;
        ad.gamma = gamma;
        ad.epsilon = 0.05;
        ad.P = lyapunov_certificate(sol.A_m).P;
        cfg.adaptation = ad;
        cfg.reference = SignalTimeline::constant(T, dt, Vector::Constant(1, 0.5));
        cfg.v0 = Vector::Zero(5);
        return cfg;
    }
};

double sup_vtilde(const Trajectory& traj, double t_lo, double t_hi) {
    double sup = 0.0;
    for (Index i = 0; i < traj.samples(); ++i) {
        if (traj.times(i) < t_lo || traj.times(i) > t_hi) continue;
        sup = std::max(sup,
                       (traj.v_hat_p.col(i) + traj.v_hat_h.col(i) - traj.v.col(i)).norm());
    }
    return sup;
}

}  // namespace

TEST_SUITE_BEGIN("adaptive");

TEST_CASE("projection operator") {
    const double nu = 2.0;
    const double eps = 0.1;
    SUBCASE("interior points pass through") {
        CHECK(project(0.0, 3.7, nu, eps) == 3.7);
        CHECK(project(1.9, -5.0, nu, eps) == -5.0);
        CHECK(project(-2.0, 1.0, nu, eps) == 1.0);
    }
    SUBCASE("outer boundary clamps an outward rate to zero") {
        CHECK(project(nu * (1.0 + eps), 1.0, nu, eps) == 0.0);
        CHECK(project(-nu * (1.0 + eps), -1.0, nu, eps) == 0.0);
    }
    SUBCASE("mid-layer tapers linearly") {
        CHECK(project(nu * (1.0 + eps / 2.0), 4.0, nu, eps) == doctest::Approx(2.0));
        CHECK(project(-nu * (1.0 + eps / 2.0), -4.0, nu, eps) == doctest::Approx(-2.0));
    }
    SUBCASE("inward rates pass through in the layer") {
        CHECK(project(nu * (1.0 + eps), -1.0, nu, eps) == -1.0);
    }
    SUBCASE("violated invariant on entry raises a step-size error") {
        CHECK_THROWS_AS(project(nu * (1.0 + eps) * 1.01, 1.0, nu, eps), StepSizeError);
    }
}

TEST_CASE("observer step") {
    Benchmark bench;
    const Index n = 5;
    AdaptationConfig cfg;
    cfg.gamma = 10.0;
    cfg.epsilon = 0.05;
    cfg.P = lyapunov_certificate(bench.sol.A_m).P;

    SUBCASE("perfect knowledge at a plant equilibrium is a fixed point") {
        // scalar plant held at v with A_m v + alpha phi + B u_R = 0: the
        // frozen-input observer step then keeps vtilde = 0 through all
        // stages and the adaptation rate stays identically zero
        Matrix A(1, 1), B(1, 1), C(1, 1);
        A << 1.0;
        B << 1.0;
        C << 1.0;
        const RiccatiSolution ssol = solve_care(StateSpaceSystem(A, B, C),
                                                Matrix::Identity(1, 1));
        const double alpha = 0.3;
        const Vector v = Vector::Constant(1, 0.5);
        const Vector u_R =
            Vector::Constant(1, -(ssol.A_m(0, 0) * 0.5 + alpha));
        AdaptationConfig scfg;
        scfg.gamma = 50.0;
        scfg.epsilon = 0.05;
        scfg.P = lyapunov_certificate(ssol.A_m).P;
        ObserverState s;
        s.v_hat_p = Vector::Constant(1, 0.2);
        s.v_hat_h = Vector::Constant(1, 0.3);  // exact split: vtilde = 0
        s.alpha_hat = Vector::Constant(1, alpha);
        const ObserverState next =
            observer_step(s, v, u_R, scfg, ssol, [](const Vector&) { return 1.0; },
                          1.0, 1e-3);
        CHECK((next.alpha_hat - s.alpha_hat).norm() <= 1e-14);
        CHECK(std::abs(next.v_hat_p(0) + next.v_hat_h(0) - 0.5) <= 1e-14);
        CHECK(std::abs(next.v_hat_p(0) - 0.2) > 0.0);  // observers still move
    }
    SUBCASE("zero gain freezes the estimate") {
        AdaptationConfig frozen = cfg;
        frozen.gamma = 0.0;
        ObserverState s;
        s.v_hat_p = Vector::Zero(n);
        s.v_hat_h = Vector::Zero(n);
        s.alpha_hat = Vector::Constant(n, 0.1);
        const Vector v = Vector::Constant(n, 0.3);
        const ObserverState next = observer_step(s, v, Vector::Zero(1), frozen,
                                                 bench.sol, bench.plant.phi,
                                                 bench.plant.nu_alpha, 1e-3);
        CHECK((next.alpha_hat - s.alpha_hat).norm() == 0.0);
        CHECK((next.v_hat_p - s.v_hat_p).norm() > 0.0);  // observer still moves
    }
    SUBCASE("invalid configs are rejected") {
        AdaptationConfig bad = cfg;
        bad.gamma = -1.0;
        ObserverState s;
        s.v_hat_p = Vector::Zero(n);
        s.v_hat_h = Vector::Zero(n);
        s.alpha_hat = Vector::Zero(n);
        CHECK_THROWS_AS(observer_step(s, Vector::Zero(n), Vector::Zero(1), bad,
                                      bench.sol, bench.plant.phi, 0.5, 1e-3),
                        PreconditionError);
        bad.gamma = 1.0;
        bad.epsilon = 0.5;
        CHECK_THROWS_AS(observer_step(s, Vector::Zero(n), Vector::Zero(1), bad,
                                      bench.sol, bench.plant.phi, 0.5, 1e-3),
                        PreconditionError);
    }
}

TEST_CASE("observer error shrinks with the adaptation gain") {
    Benchmark bench;
    double previous = 1e300;
    for (double gamma : {1.0, 10.0, 100.0}) {
        const Trajectory traj = integrate_closed_loop(bench.sim(gamma, 5.0));
        const double sup = sup_vtilde(traj, 2.0, 5.0);
        CHECK(sup <= previous * (1.0 + 1e-9));
        previous = sup;
    }
}

TEST_CASE("projection invariant holds along the benchmark trajectory") {
    Benchmark bench;
    const Trajectory traj = integrate_closed_loop(bench.sim(100.0, 5.0));
    const double outer = bench.plant.nu_alpha * 1.05 + 1e-9;
    CHECK(traj.alpha_hat.cwiseAbs().maxCoeff() <= outer);
}

TEST_CASE("dyadic identity: exact initialization reconstructs the plant") {
    Benchmark bench;
    SimulationConfig cfg = bench.sim(1.0, 5.0);
    std::mt19937_64 rng(77);
    cfg.v0 = 0.05 * random_vector(rng, 5);
    cfg.v_hat_h0 = cfg.v0;  // v_hat_p(0) + v_hat_h(0) = v(0)
    cfg.alpha_hat0 = bench.plant.alpha;
    const Trajectory traj = integrate_closed_loop(cfg);
    CHECK(sup_vtilde(traj, 0.0, 5.0) <= 1e-9);
}

TEST_CASE("delta constants") {
    Benchmark bench;
    SUBCASE("first-order compensator has unit L-infinity gain") {
        NehariApproximant H;
        H.H_A = Matrix::Constant(1, 1, -1.0);
        H.H_B = Matrix::Constant(1, 1, 1.0);
        H.H_C = Matrix::Constant(1, 1, 1.0);
        const DeltaConstants dc = delta_constants(H, bench.sol, bench.plant, 1.0, 0.05);
        CHECK(dc.g_H == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(dc.delta_0r == doctest::Approx(dc.g_H).epsilon(1e-12));
    }
    SUBCASE("zero nonlinearity kills the state-dependent paths") {
        SemilinearPlant silent(bench.plant.linear, [](const Vector&) { return 0.0; },
                               Vector::Zero(5), 0.5, 1.0);
        const DeltaConstants dc =
            delta_constants(bench.comp, bench.sol, silent, 1.0, 0.05);
        CHECK(dc.delta_0w == 0.0);
        CHECK(dc.delta_0u == 0.0);
        CHECK(dc.delta_0r > 0.0);
    }
    SUBCASE("doubling nu_alpha doubles the state-path constants") {
        SemilinearPlant twice(bench.plant.linear, bench.plant.phi, bench.plant.alpha,
                              2.0 * bench.plant.nu_alpha, bench.plant.rho0);
        const DeltaConstants a =
            delta_constants(bench.comp, bench.sol, bench.plant, 1.0, 0.05);
        const DeltaConstants b = delta_constants(bench.comp, bench.sol, twice, 1.0, 0.05);
        CHECK(b.delta_0w == doctest::Approx(2.0 * a.delta_0w).epsilon(1e-12));
        CHECK(b.delta_0u == doctest::Approx(2.0 * a.delta_0u).epsilon(1e-12));
        CHECK(b.delta_0r == doctest::Approx(a.delta_0r).epsilon(1e-12));
    }
}

TEST_CASE("small-gain checker") {
    SUBCASE("disturbance-free case reduces to M rho0") {
        const SmallGainReport rep =
            small_gain_check(1.05, 0.5, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.01);
        CHECK(rep.lhs == doctest::Approx(1.05 * 0.5).epsilon(1e-15));
        CHECK(rep.satisfied == (1.05 * 0.5 <= 2.0 - 0.01));
        CHECK(rep.margin == doctest::Approx((2.0 - 0.01) - 0.525).epsilon(1e-12));
    }
    SUBCASE("loop gain at one breaks the denominator") {
        const SmallGainReport rep =
            small_gain_check(1.0, 0.1, 2.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 5.0, 0.01);
        CHECK_FALSE(rep.satisfied);
        CHECK(std::isinf(rep.margin));
        CHECK(rep.margin < 0.0);
    }
    SUBCASE("bit-identical reports across repeated evaluation") {
        const SmallGainReport a = small_gain_check(1.2, 0.3, 0.7, 0.05, 0.1, 0.02, 0.4,
                                                   0.03, 1.0, 1.5, 3.0, 0.01);
        const SmallGainReport b = small_gain_check(1.2, 0.3, 0.7, 0.05, 0.1, 0.02, 0.4,
                                                   0.03, 1.0, 1.5, 3.0, 0.01);
        CHECK(a.lhs == b.lhs);
        CHECK(a.margin == b.margin);
        CHECK(a.satisfied == b.satisfied);
    }
    SUBCASE("negative constants are rejected") {
        CHECK_THROWS_AS(small_gain_check(-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                                         0.0, 1.0, 0.0),
                        PreconditionError);
    }
}

TEST_CASE("oversized integrator steps are caught") {
    Benchmark bench;
    // dt far beyond the RK4 stability region of the stiff heat modes
    SimulationConfig cfg = bench.sim(100.0, 10.0, 0.25);
    CHECK_THROWS_AS(integrate_closed_loop(cfg), Error);
}

TEST_SUITE_END();
