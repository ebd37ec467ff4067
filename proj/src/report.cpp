#include "dyadic/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dyadic {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("write_file_atomic: cannot open " + tmp.string());
        out << bytes;
    }
    fs::rename(tmp, target);
}

std::string artifact_header(const std::string& config_hash) {
    return "# config_hash = " + config_hash + "\n";
}

std::string render_riccati(const RiccatiSolution& sol, const std::string& hash) {
    std::ostringstream out;
    out << artifact_header(hash);
    out << "[riccati]\n";
    out << "Pi = " << format_matrix(sol.Pi) << "\n";
    out << "K = " << format_matrix(sol.K) << "\n";
    out << "A_m = " << format_matrix(sol.A_m) << "\n";
    out << "B = " << format_matrix(sol.B) << "\n";
    out << "C = " << format_matrix(sol.C) << "\n";
    out << "R = " << format_matrix(sol.R) << "\n";
    out << "residual_norm = " << num(sol.residual_norm) << "\n";
    return out.str();
}

std::string render_gramian(const GramianResult& gram, const std::string& hash) {
    std::ostringstream out;
    out << artifact_header(hash);
    out << "[gramian]\n";
    out << "W = " << format_matrix(gram.W) << "\n";
    out << "residual_norm = " << num(gram.residual_norm) << "\n";
    return out.str();
}

std::string render_decay(const DecayCertificate& cert, const std::string& hash) {
    std::ostringstream out;
    out << artifact_header(hash);
    out << "[decay]\n";
    out << "M = " << num(cert.M) << "\n";
    out << "beta = " << num(cert.beta) << "\n";
    return out.str();
}

std::string render_nehari(const NehariApproximant& comp, const std::string& hash,
                          const std::string& label) {
    std::ostringstream out;
    out << artifact_header(hash);
    out << "[" << label << "]\n";
    out << "order = " << comp.order() << "\n";
    out << "inputs = " << comp.H_B.cols() << "\n";
    out << "outputs = " << comp.H_C.rows() << "\n";
    if (comp.order() > 0) {
        out << "H_A = " << format_matrix(comp.H_A) << "\n";
        out << "H_B = " << format_matrix(comp.H_B) << "\n";
        out << "H_C = " << format_matrix(comp.H_C) << "\n";
    }
    if (comp.has_feedthrough()) {
        out << "D_H = " << format_matrix(comp.D_H) << "\n";
    }
    out << "achieved_error = " << num(comp.achieved_error) << "\n";
    out << "optimal_error = " << num(comp.optimal_error) << "\n";
    if (comp.hsv.size() > 0) {
        out << "hsv = " << format_vector(comp.hsv) << "\n";
    }
    return out.str();
}

std::string render_suboptimality(const SuboptimalityBound& bound,
                                 const std::string& hash) {
    std::ostringstream out;
    out << artifact_header(hash);
    out << "[suboptimality]\n";
    out << "S = " << num(bound.S) << "\n";
    out << "g_inf_norm = " << num(bound.g_inf_norm) << "\n";
    out << "r_inv_sqrt_norm = " << num(bound.r_inv_sqrt_norm) << "\n";
    out << "hankel_norm = " << num(bound.hankel_norm) << "\n";
    return out.str();
}

std::string render_cost(const CostReport& cost, const std::string& hash) {
    std::ostringstream out;
    out << artifact_header(hash);
    out << "[cost]\n";
    out << "J = " << num(cost.J) << "\n";
    out << "tracking_term = " << num(cost.tracking_term) << "\n";
    out << "control_term = " << num(cost.control_term) << "\n";
    out << "sigma_l2 = " << num(cost.sigma_l2) << "\n";
    if (cost.bound) out << "bound = " << num(*cost.bound) << "\n";
    return out.str();
}

std::string render_small_gain(const SmallGainReport& rep, const std::string& hash) {
    std::ostringstream out;
    out << artifact_header(hash);
    out << "[small_gain]\n";
    out << "M = " << num(rep.M) << "\n";
    out << "rho0 = " << num(rep.rho0) << "\n";
    out << "conv_norm = " << num(rep.conv_norm) << "\n";
    out << "nu1 = " << num(rep.nu1) << "\n";
    out << "nu2 = " << num(rep.nu2) << "\n";
    out << "delta_0w = " << num(rep.delta_0w) << "\n";
    out << "delta_0r = " << num(rep.delta_0r) << "\n";
    out << "delta_0u = " << num(rep.delta_0u) << "\n";
    out << "r_inf = " << num(rep.r_inf) << "\n";
    out << "norm_B = " << num(rep.norm_B) << "\n";
    out << "rho_w = " << num(rep.rho_w) << "\n";
    out << "epsilon_s = " << num(rep.epsilon_s) << "\n";
    out << "lhs = " << num(rep.lhs) << "\n";
    out << "margin = " << num(rep.margin) << "\n";
    out << "satisfied = " << (rep.satisfied ? "true" : "false") << "\n";
    return out.str();
}

std::string render_manifest(const RunManifest& manifest) {
    std::ostringstream out;
    out << "[manifest]\n";
    out << "config_hash = " << manifest.config_hash << "\n";
    out << "tool_version = " << manifest.tool_version << "\n";
    out << "subcommand = " << manifest.subcommand << "\n";
    out << "started = " << manifest.started << "\n";
    out << "finished = " << manifest.finished << "\n";
    for (size_t i = 0; i < manifest.outputs.size(); ++i) {
        out << "output_" << i << " = " << manifest.outputs[i] << "\n";
    }
    return out.str();
}

namespace {

void csv_block(std::ostringstream& head, const char* name, Index rows) {
    for (Index r = 0; r < rows; ++r) head << "," << name << "_" << r;
}

}  // namespace

std::string render_trajectory_csv(const Trajectory& traj, const std::string& hash) {
    std::ostringstream out;
    out << artifact_header(hash);
    std::ostringstream head;
    head << "t";
    csv_block(head, "v", traj.v.rows());
    csv_block(head, "vp", traj.v_hat_p.rows());
    csv_block(head, "vh", traj.v_hat_h.rows());
    csv_block(head, "alpha_hat", traj.alpha_hat.rows());
    csv_block(head, "u", traj.u.rows());
    csv_block(head, "uR", traj.u_R.rows());
    csv_block(head, "y", traj.y.rows());
    csv_block(head, "yp", traj.y_hat_p.rows());
    csv_block(head, "yh", traj.y_hat_h.rows());
    csv_block(head, "sigma", traj.sigma.rows());
    csv_block(head, "p", traj.p.rows());
    out << head.str() << "\n";

    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), ",%.17g", v);
        out << buf;
    };
    for (Index i = 0; i < traj.samples(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", traj.times(i));
        out << buf;
        for (Index r = 0; r < traj.v.rows(); ++r) put(traj.v(r, i));
        for (Index r = 0; r < traj.v_hat_p.rows(); ++r) put(traj.v_hat_p(r, i));
        for (Index r = 0; r < traj.v_hat_h.rows(); ++r) put(traj.v_hat_h(r, i));
        for (Index r = 0; r < traj.alpha_hat.rows(); ++r) put(traj.alpha_hat(r, i));
        for (Index r = 0; r < traj.u.rows(); ++r) put(traj.u(r, i));
        for (Index r = 0; r < traj.u_R.rows(); ++r) put(traj.u_R(r, i));
        for (Index r = 0; r < traj.y.rows(); ++r) put(traj.y(r, i));
        for (Index r = 0; r < traj.y_hat_p.rows(); ++r) put(traj.y_hat_p(r, i));
        for (Index r = 0; r < traj.y_hat_h.rows(); ++r) put(traj.y_hat_h(r, i));
        for (Index r = 0; r < traj.sigma.rows(); ++r) put(traj.sigma(r, i));
        for (Index r = 0; r < traj.p.rows(); ++r) put(traj.p(r, i));
        out << "\n";
    }
    return out.str();
}

Matrix read_artifact_matrix(const std::string& path, const std::string& section,
                            const std::string& key) {
    const Config cfg = Config::parse_file(path);
    return cfg.get_matrix(section, key);
}

double read_artifact_scalar(const std::string& path, const std::string& section,
                            const std::string& key) {
    const Config cfg = Config::parse_file(path);
    return cfg.get_scalar(section, key);
}

NehariApproximant read_compensator(const std::string& path) {
    const Config cfg = Config::parse_file(path);
    std::string section;
    for (const std::string& s : cfg.sections()) {
        if (cfg.has(s, "order")) section = s;
    }
    if (section.empty()) {
        throw ConfigError("read_compensator: no compensator section in " + path);
    }
    NehariApproximant comp;
    const Index order = cfg.get_integer(section, "order");
    const Index inputs = cfg.get_integer(section, "inputs");
    const Index outputs = cfg.get_integer(section, "outputs");
    if (order > 0) {
        comp.H_A = cfg.get_matrix(section, "H_A");
        comp.H_B = cfg.get_matrix(section, "H_B");
        comp.H_C = cfg.get_matrix(section, "H_C");
    } else {
        comp.H_A = Matrix::Zero(0, 0);
        comp.H_B = Matrix::Zero(0, inputs);
        comp.H_C = Matrix::Zero(outputs, 0);
    }
    if (cfg.has(section, "D_H")) comp.D_H = cfg.get_matrix(section, "D_H");
    comp.achieved_error = cfg.get_scalar_or(section, "achieved_error", 0.0);
    comp.optimal_error = cfg.get_scalar_or(section, "optimal_error", 0.0);
    if (cfg.has(section, "hsv")) comp.hsv = cfg.get_vector(section, "hsv");
    return comp;
}

}  // namespace dyadic
