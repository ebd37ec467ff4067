#include "dyadic/cli.hpp"

#include "dyadic/laws.hpp"
#include "dyadic/report.hpp"
#include "dyadic/sim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

namespace dyadic::cli {

namespace {

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::filesystem::path out_path(const Options& opt, const std::string& file) {
    return std::filesystem::path(opt.out_dir) / file;
}

void finish_manifest(RunManifest& manifest, const Options& opt) {
    manifest.finished = timestamp();
    write_file_atomic(out_path(opt, "manifest.txt").string(),
                      render_manifest(manifest));
}

struct Synthesis {
    RiccatiSolution sol;
    GramianResult gramian;
    DecayCertificate decay;
    StateSpaceSystem G_m;
    NehariApproximant unconstrained;
    NehariApproximant constrained;
    SuboptimalityBound bound;
};

Synthesis synthesize_all(const Scenario& sc) {
    if (!is_stabilizable(sc.plant.linear.A, sc.plant.linear.B)) {
        throw SynthesisError("plant violates the stabilizability assumption");
    }
    Synthesis sy;
    sy.sol = solve_care(sc.plant.linear, sc.R);
    sy.gramian = observability_gramian(sy.sol.A_m, sy.sol.C);
    sy.decay = decay_certificate(sy.sol.A_m);
    sy.G_m = StateSpaceSystem(sy.sol.A_m, sy.sol.B, sy.sol.C);
    sy.unconstrained =
        solve_nehari(sy.G_m, sc.R, sc.strictly_proper, sc.compensator_order);
    sy.constrained = solve_constrained_nehari(sy.G_m, sc.R);
    sy.bound = suboptimality_constant(sy.G_m, sc.R);
    return sy;
}

double resolve_horizon(const Scenario& sc, const DecayCertificate& decay) {
    return sc.horizon_auto ? 50.0 / decay.beta : sc.T;
}

SignalTimeline make_reference(const Scenario& sc, double T) {
    if (sc.reference_kind == "constant") {
        return SignalTimeline::constant(T, sc.dt, sc.reference_value);
    }
    return SignalTimeline::zero(T, sc.dt, sc.plant.linear.p());
}

ControlLaw law_by_name(const std::string& name, const Synthesis& sy, const Scenario& sc,
                       const Vector& r) {
    if (name == "LQR") return lqr_law(sy.sol);
    if (name == "LQT") return lqt_law(sy.sol, r);
    if (name == "PureForm") {
        return sc.reference_kind == "constant"
                   ? pure_form_tracker(sy.sol, sy.gramian, r)
                   : pure_form_regulator(sy.sol, sy.gramian);
    }
    if (name == "SDRE") return sdre_law(sy.sol, sc.plant, r);
    throw ConfigError("unknown law '" + name +
                      "' (expected LQR|LQT|PureForm|SDRE|Compensator)");
}

SimulationConfig base_sim_config(const Scenario& sc, const Synthesis& sy, double T,
                                 const Options& opt) {
    SimulationConfig sim;
    sim.T = T;
    sim.dt = sc.dt;
    sim.plant = sc.plant;
    sim.sol = sy.sol;
    sim.reference = make_reference(sc, T);
    sim.v0 = sc.v0;
    sim.v_p0 = sc.v_p0;
    sim.seed = opt.seed.value_or(sc.seed);
    return sim;
}

SimulationConfig compensator_sim_config(const Scenario& sc, const Synthesis& sy,
                                        double T, const Options& opt) {
    SimulationConfig sim = base_sim_config(sc, sy, T, opt);
    sim.mode = SimulationMode::CompensatorClosedLoop;
    sim.compensator = sc.constrained ? sy.constrained : sy.unconstrained;
    if (sc.adaptation_enabled) {
        AdaptationConfig ad;
        ad.gamma = sc.gamma;
        ad.epsilon = sc.epsilon;
        ad.P = lyapunov_certificate(sy.sol.A_m).P;
        sim.adaptation = ad;
        sim.alpha_hat0 = sc.alpha_hat0;
    } else {
        sim.alpha_hat0 = sc.alpha_hat0;
    }
    return sim;
}

}  // namespace

int cmd_synthesize(const Config& cfg, const Options& opt) {
    const Scenario sc = load_scenario(cfg);
    const std::string hash = fnv1a_hex(cfg.text());
    RunManifest manifest{hash, kToolVersion, "synthesize", timestamp(), "", {}};

    const Synthesis sy = synthesize_all(sc);

    const struct {
        const char* file;
        std::string bytes;
    } artifacts[] = {
        {"riccati.txt", render_riccati(sy.sol, hash)},
        {"gramian.txt", render_gramian(sy.gramian, hash)},
        {"decay.txt", render_decay(sy.decay, hash)},
        {"nehari_unconstrained.txt", render_nehari(sy.unconstrained, hash, "compensator")},
        {"nehari_constrained.txt", render_nehari(sy.constrained, hash, "compensator")},
        {"suboptimality.txt", render_suboptimality(sy.bound, hash)},
    };
    for (const auto& a : artifacts) {
        write_file_atomic(out_path(opt, a.file).string(), a.bytes);
        manifest.outputs.push_back(a.file);
    }
    finish_manifest(manifest, opt);

    std::cout << "synthesize: n=" << sy.sol.A_m.rows()
              << " residual=" << num(sy.sol.residual_norm) << " beta=" << num(sy.decay.beta)
              << " sigma1=" << num(sy.bound.hankel_norm) << " S=" << num(sy.bound.S)
              << "\n";
    return kOk;
}

int cmd_simulate(const Config& cfg, const Options& opt) {
    const Scenario sc = load_scenario(cfg);
    const std::string hash = fnv1a_hex(cfg.text());
    RunManifest manifest{hash, kToolVersion, "simulate", timestamp(), "", {}};

    const Synthesis sy = synthesize_all(sc);
    const double T = resolve_horizon(sc, sy.decay);

    SimulationConfig sim;
    if (sc.law_name == "Compensator") {
        sim = compensator_sim_config(sc, sy, T, opt);
    } else {
        sim = base_sim_config(sc, sy, T, opt);
        sim.mode = SimulationMode::LawClosedLoop;
        sim.law = law_by_name(sc.law_name, sy, sc,
                              sc.reference_kind == "constant"
                                  ? sc.reference_value
                                  : Vector::Zero(sc.plant.linear.p()).eval());
    }

    Trajectory traj;
    try {
        traj = integrate_closed_loop(sim);
    } catch (const DivergenceError& e) {
        std::ostringstream rep;
        rep << artifact_header(hash) << "[divergence]\nfirst_bad_time = "
            << num(e.first_bad_time) << "\nmessage = " << e.what() << "\n";
        write_file_atomic(out_path(opt, "divergence.txt").string(), rep.str());
        manifest.outputs.push_back("divergence.txt");
        finish_manifest(manifest, opt);
        std::cerr << "simulate: divergence at t = " << e.first_bad_time << ": "
                  << e.what() << "\n";
        return kDivergence;
    }

    const CostReport cost = evaluate_cost(traj, sc.R);
    write_file_atomic(out_path(opt, "trajectory.csv").string(),
                      render_trajectory_csv(traj, hash));
    write_file_atomic(out_path(opt, "cost.txt").string(), render_cost(cost, hash));
    manifest.outputs.push_back("trajectory.csv");
    manifest.outputs.push_back("cost.txt");
    finish_manifest(manifest, opt);

    const Vector r_final = sim.reference.eval(T);
    const double tracking_error = (traj.y.col(traj.samples() - 1) - r_final).norm();
    std::cout << "simulate: T=" << num(T) << " J=" << num(cost.J)
              << " final_tracking_error=" << num(tracking_error) << "\n";

    if (cfg.has("simulation", "tracking_threshold")) {
        const double thr = cfg.get_scalar("simulation", "tracking_threshold");
        if (tracking_error > thr) {
            std::cerr << "simulate: tracking error " << num(tracking_error)
                      << " exceeds threshold " << num(thr) << "\n";
            return kPropertyFailure;
        }
    }
    return kOk;
}

namespace {

void parallel_for(int threads, int count, const std::function<void(int)>& body) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, count);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

std::string render_gap_csv(const LawGapReport& gap, const std::string& hash) {
    std::ostringstream out;
    out << artifact_header(hash) << "t,gap\n";
    for (Index i = 0; i < gap.times.size(); ++i) {
        out << num(gap.times(i)) << "," << num(gap.gap(i)) << "\n";
    }
    return out.str();
}

}  // namespace

int cmd_benchmark(const Config& cfg, const Options& opt) {
    const Scenario sc = load_scenario(cfg);
    if (sc.benchmark_laws.empty()) {
        throw ConfigError("benchmark: empty law set ([benchmark] laws)");
    }
    for (const std::string& name : sc.benchmark_laws) {
        if (name != "LQR" && name != "LQT" && name != "PureForm" && name != "SDRE" &&
            name != "Compensator") {
            throw ConfigError("unknown law '" + name +
                              "' (expected LQR|LQT|PureForm|SDRE|Compensator)");
        }
    }
    const std::string hash = fnv1a_hex(cfg.text());
    RunManifest manifest{hash, kToolVersion, "benchmark", timestamp(), "", {}};

    const Synthesis sy = synthesize_all(sc);
    const double T = resolve_horizon(sc, sy.decay);
    const Vector r = sc.reference_kind == "constant"
                         ? sc.reference_value
                         : Vector::Zero(sc.plant.linear.p()).eval();
    const double beta = sy.decay.beta;

    std::ostringstream rep;
    rep << artifact_header(hash);
    bool property_failure = false;

    // per-law closed-loop costs
    rep << "[costs]\n";
    for (const std::string& name : sc.benchmark_laws) {
        SimulationConfig sim;
        if (name == "Compensator") {
            sim = compensator_sim_config(sc, sy, T, opt);
        } else {
            sim = base_sim_config(sc, sy, T, opt);
            sim.law = law_by_name(name, sy, sc, r);
        }
        const Trajectory traj = integrate_closed_loop(sim);
        const CostReport cost = evaluate_cost(traj, sc.R);
        rep << name << "_J = " << num(cost.J) << "\n";
    }

    // shared trajectory for map comparisons: the pure-form closed loop
    const bool tracking = sc.reference_kind == "constant";
    SimulationConfig shared_sim = base_sim_config(sc, sy, T, opt);
    shared_sim.law = tracking ? pure_form_tracker(sy.sol, sy.gramian, r)
                              : pure_form_regulator(sy.sol, sy.gramian);
    const Trajectory shared = integrate_closed_loop(shared_sim);

    const auto has = [&](const char* name) {
        return std::find(sc.benchmark_laws.begin(), sc.benchmark_laws.end(), name) !=
               sc.benchmark_laws.end();
    };

    rep << "\n[law_gaps]\n";
    rep << "beta = " << num(beta) << "\n";
    if (has("PureForm") && has("LQR")) {
        const LawGapReport gap =
            law_gap(*shared_sim.law, lqr_law(sy.sol), shared.times, shared.v_hat_h,
                    shared.v_hat_p);
        rep << "pureform_vs_lqr_rate = " << num(gap.fitted_decay_rate) << "\n";
        rep << "pureform_vs_lqr_sup = " << num(gap.sup_gap) << "\n";
        write_file_atomic(out_path(opt, "gap_pureform_vs_lqr.csv").string(),
                          render_gap_csv(gap, hash));
        manifest.outputs.push_back("gap_pureform_vs_lqr.csv");
        if (gap.fit_samples >= 2 && gap.fitted_decay_rate < 0.9 * beta) {
            property_failure = true;
            rep << "pureform_vs_lqr_property = FAIL\n";
        }
    }
    if (has("PureForm") && has("LQT")) {
        const LawGapReport gap =
            law_gap(pure_form_tracker(sy.sol, sy.gramian, r), lqt_law(sy.sol, r),
                    shared.times, shared.v_hat_h, shared.v_hat_p);
        rep << "pureform_vs_lqt_rate = " << num(gap.fitted_decay_rate) << "\n";
        rep << "pureform_vs_lqt_sup = " << num(gap.sup_gap) << "\n";
        write_file_atomic(out_path(opt, "gap_pureform_vs_lqt.csv").string(),
                          render_gap_csv(gap, hash));
        manifest.outputs.push_back("gap_pureform_vs_lqt.csv");
        if (gap.fit_samples >= 2 && gap.fitted_decay_rate < 0.9 * beta) {
            property_failure = true;
            rep << "pureform_vs_lqt_property = FAIL\n";
        }
    }

    if (has("SDRE")) {
        // compare the tracking components: the non-causal oracle against the
        // SDRE feedforward, evaluated along the shared trajectory
        const SignalTimeline sigma(shared.times, shared.sigma);
        const SignalTimeline q = solve_q_backward(sy.sol, sigma, T);
        ControlLaw oracle_part = oracle_tracker(sy.sol, tracking_input_from_adjoint(sy.sol, q));
        oracle_part.K.setZero();
        oracle_part.Gp.setZero();
        ControlLaw sdre_part = sdre_law(sy.sol, sc.plant, r);
        sdre_part.K.setZero();
        const LawGapReport gap = law_gap(oracle_part, sdre_part, shared.times,
                                         shared.v_hat_h, shared.v_hat_p);
        write_file_atomic(out_path(opt, "gap_oracle_vs_sdre.csv").string(),
                          render_gap_csv(gap, hash));
        manifest.outputs.push_back("gap_oracle_vs_sdre.csv");

        const Vector f_tail = eval_nonlinearity(sc.plant, shared.v.col(shared.samples() - 1));
        const Vector asym = sdre_gap_asymptote(sy.sol, f_tail);
        Index i_tail = 0;
        for (Index i = 0; i < shared.times.size(); ++i) {
            if (shared.times(i) <= 0.7 * T) i_tail = i;
        }
        rep << "sdre_asymptote_norm = " << num(asym.norm()) << "\n";
        rep << "sdre_tail_gap = " << num(gap.gap(i_tail)) << "\n";
    }

    if (has("Compensator")) {
        const NehariApproximant& comp = sc.constrained ? sy.constrained : sy.unconstrained;
        const int draws = sc.sigma_draws;
        std::vector<CostGapReport> gaps(draws);
        const std::uint64_t seed0 = opt.seed.value_or(sc.seed);
        parallel_for(opt.threads, draws, [&](int i) {
            const SignalTimeline sigma = random_l2_signal(
                T, sc.dt, sc.plant.linear.p(), seed0 + static_cast<std::uint64_t>(i));
            gaps[i] = cost_gap_check(sy.sol, comp, sy.bound, sigma,
                                     Vector::Zero(sc.plant.linear.n()));
        });
        std::ostringstream csv;
        csv << artifact_header(hash) << "draw,J1,J2,gap,bound,ok\n";
        int ok_count = 0;
        for (int i = 0; i < draws; ++i) {
            csv << i << "," << num(gaps[i].J1) << "," << num(gaps[i].J2) << ","
                << num(gaps[i].gap) << "," << num(gaps[i].bound) << ","
                << (gaps[i].within_bound ? 1 : 0) << "\n";
            if (gaps[i].within_bound) ++ok_count;
        }
        write_file_atomic(out_path(opt, "theorem_gap.csv").string(), csv.str());
        manifest.outputs.push_back("theorem_gap.csv");
        rep << "\n[cost_gap]\n";
        rep << "S = " << num(sy.bound.S) << "\n";
        rep << "draws = " << draws << "\n";
        rep << "within_bound = " << ok_count << "\n";
        if (ok_count != draws) {
            property_failure = true;
            rep << "cost_gap_property = FAIL\n";
        }
    }

    write_file_atomic(out_path(opt, "benchmark.txt").string(), rep.str());
    manifest.outputs.push_back("benchmark.txt");
    finish_manifest(manifest, opt);
    std::cout << rep.str();
    return property_failure ? kPropertyFailure : kOk;
}

int cmd_nehari(const Config& cfg, const Options& opt) {
    const Scenario sc = load_scenario(cfg);
    const std::string hash = fnv1a_hex(cfg.text());
    RunManifest manifest{hash, kToolVersion, "nehari", timestamp(), "", {}};

    const Synthesis sy = synthesize_all(sc);
    const NehariApproximant& comp = sc.constrained ? sy.constrained : sy.unconstrained;
    write_file_atomic(out_path(opt, "compensator.txt").string(),
                      render_nehari(comp, hash, "compensator"));
    manifest.outputs.push_back("compensator.txt");
    finish_manifest(manifest, opt);
    std::cout << "nehari: order=" << comp.order()
              << " achieved=" << num(comp.achieved_error)
              << " optimal=" << num(comp.optimal_error) << "\n";
    return kOk;
}

int cmd_check_small_gain(const Config& cfg, const Options& opt) {
    const Scenario sc = load_scenario(cfg);
    const std::string hash = fnv1a_hex(cfg.text());
    RunManifest manifest{hash, kToolVersion, "check", timestamp(), "", {}};

    const std::string riccati_path = out_path(opt, "riccati.txt").string();
    const std::string decay_path = out_path(opt, "decay.txt").string();
    const std::string comp_path =
        out_path(opt, sc.constrained ? "nehari_constrained.txt" : "nehari_unconstrained.txt")
            .string();
    for (const std::string& p : {riccati_path, decay_path, comp_path}) {
        if (!std::filesystem::exists(p)) {
            std::cerr << "check: missing artifact '" << p
                      << "'; run the synthesize subcommand first\n";
            return kMissingDependency;
        }
    }

    RiccatiSolution sol;
    sol.Pi = read_artifact_matrix(riccati_path, "riccati", "Pi");
    sol.K = read_artifact_matrix(riccati_path, "riccati", "K");
    sol.A_m = read_artifact_matrix(riccati_path, "riccati", "A_m");
    sol.B = read_artifact_matrix(riccati_path, "riccati", "B");
    sol.C = read_artifact_matrix(riccati_path, "riccati", "C");
    sol.R = read_artifact_matrix(riccati_path, "riccati", "R");
    sol.Rinv = sol.R.inverse();
    DecayCertificate decay;
    decay.M = read_artifact_scalar(decay_path, "decay", "M");
    decay.beta = read_artifact_scalar(decay_path, "decay", "beta");
    const NehariApproximant comp = read_compensator(comp_path);

    const DeltaConstants dc =
        delta_constants(comp, sol, sc.plant, sc.rho_w, sc.epsilon, sc.lipschitz_samples);
    const double conv_norm = convolution_operator_norm(sol.A_m);
    Eigen::JacobiSVD<Matrix> bsvd(sol.B);
    const SmallGainReport report = small_gain_check(
        decay.M, sc.plant.rho0, conv_norm, dc.bounds.nu1, dc.bounds.nu2, dc.delta_0w,
        dc.delta_0r, dc.delta_0u, sc.r_inf, bsvd.singularValues()(0), sc.rho_w,
        sc.epsilon_s);

    const std::string rendered = render_small_gain(report, hash);
    write_file_atomic(out_path(opt, "smallgain.txt").string(), rendered);
    manifest.outputs.push_back("smallgain.txt");
    finish_manifest(manifest, opt);
    std::cout << rendered;
    std::cout << "verdict = " << (report.satisfied ? "satisfied" : "unsatisfied") << "\n";
    return kOk;
}

int run(int argc, const char* const* argv) {
    auto usage = [] {
        std::cerr
            << "usage: dyadic <synthesize|simulate|benchmark|nehari|check> "
               "--config <path> [--out <dir>] [--threads <n>] [--seed <int>]\n"
               "exit codes: 0 ok, 2 config error, 3 synthesis error, 4 divergence,\n"
               "            5 property failure, 6 missing dependency\n";
    };
    if (argc < 2) {
        usage();
        return kConfigFailure;
    }
    const std::string sub = argv[1];
    if (sub == "--help" || sub == "-h" || sub == "help") {
        usage();
        return kOk;
    }

    Options opt;
    for (int i = 2; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&](const char* what) -> std::string {
            if (i + 1 >= argc) {
                throw ConfigError(std::string("missing value for ") + what);
            }
            return argv[++i];
        };
        if (arg == "--config") {
            opt.config_path = next("--config");
        } else if (arg == "--out") {
            opt.out_dir = next("--out");
        } else if (arg == "--threads") {
            opt.threads = std::stoi(next("--threads"));
        } else if (arg == "--seed") {
            opt.seed = std::stoull(next("--seed"));
        } else {
            std::cerr << "unknown flag '" << arg << "'\n";
            usage();
            return kConfigFailure;
        }
    }

    try {
        if (opt.config_path.empty()) {
            throw ConfigError("--config is required");
        }
        const Config cfg = Config::parse_file(opt.config_path);
        if (sub == "synthesize") return cmd_synthesize(cfg, opt);
        if (sub == "simulate") return cmd_simulate(cfg, opt);
        if (sub == "benchmark") return cmd_benchmark(cfg, opt);
        if (sub == "nehari") return cmd_nehari(cfg, opt);
        if (sub == "check") return cmd_check_small_gain(cfg, opt);
        std::cerr << "unknown subcommand '" << sub << "'\n";
        usage();
        return kConfigFailure;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kDivergence;
    } catch (const StepSizeError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kDivergence;
    } catch (const Error& e) {
        std::cerr << "synthesis error: " << e.what() << "\n";
        return kSynthesisFailure;
    }
}

}  // namespace dyadic::cli
