#include "dyadic/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dyadic {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0;
    size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
    const size_t pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& name) {
    Config cfg;
    cfg.text_ = text;
    cfg.name_ = name;

    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) {
                throw ConfigError(name + ":" + std::to_string(lineno) +
                                  ": malformed section header '" + s + "'");
            }
            section = trim(s.substr(1, s.size() - 2));
            cfg.sections_[section];
            continue;
        }
        const size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(name + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + s + "'");
        }
        if (section.empty()) {
            throw ConfigError(name + ":" + std::to_string(lineno) +
                              ": key outside of any [section]");
        }
        const std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
        }
        const int key_line = lineno;
        // bracketed values may continue over further lines
        if (!value.empty() && value.front() == '[') {
            while (value.find(']') == std::string::npos && std::getline(in, line)) {
                ++lineno;
                value += " " + trim(strip_comment(line));
            }
            if (value.find(']') == std::string::npos) {
                throw ConfigError(name + ":" + std::to_string(key_line) +
                                  ": unterminated '[' in value of '" + key + "'");
            }
        }
        cfg.sections_[section][key] = Entry{value, key_line};
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto sit = sections_.find(section);
    return sit != sections_.end() && sit->second.count(key) > 0;
}

std::vector<std::string> Config::sections() const {
    std::vector<std::string> out;
    for (const auto& kv : sections_) out.push_back(kv.first);
    return out;
}

const Config::Entry& Config::entry(const std::string& section,
                                   const std::string& key) const {
    const auto sit = sections_.find(section);
    if (sit == sections_.end()) {
        throw ConfigError(name_ + ": missing section [" + section + "]");
    }
    const auto kit = sit->second.find(key);
    if (kit == sit->second.end()) {
        throw ConfigError(name_ + ": missing field '" + key + "' in section [" +
                          section + "]");
    }
    return kit->second;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
    return entry(section, key).value;
}

double Config::get_scalar(const std::string& section, const std::string& key) const {
    const Entry& e = entry(section, key);
    try {
        size_t used = 0;
        const double v = std::stod(e.value, &used);
        if (trim(e.value.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(name_ + ":" + std::to_string(e.line) + ": field '" + key +
                      "' is not a number: '" + e.value + "'");
}

long Config::get_integer(const std::string& section, const std::string& key) const {
    const Entry& e = entry(section, key);
    try {
        size_t used = 0;
        const long v = std::stol(e.value, &used);
        if (trim(e.value.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(name_ + ":" + std::to_string(e.line) + ": field '" + key +
                      "' is not an integer: '" + e.value + "'");
}

bool Config::get_flag(const std::string& section, const std::string& key) const {
    const Entry& e = entry(section, key);
    if (e.value == "true" || e.value == "on" || e.value == "1") return true;
    if (e.value == "false" || e.value == "off" || e.value == "0") return false;
    throw ConfigError(name_ + ":" + std::to_string(e.line) + ": field '" + key +
                      "' is not a boolean: '" + e.value + "'");
}

Matrix Config::get_matrix(const std::string& section, const std::string& key) const {
    const Entry& e = entry(section, key);
    const std::string& v = e.value;
    const size_t open = v.find('[');
    const size_t close = v.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        throw ConfigError(name_ + ":" + std::to_string(e.line) + ": field '" + key +
                          "' is not a bracketed matrix");
    }
    const std::string body = v.substr(open + 1, close - open - 1);

    std::vector<std::vector<double>> rows;
    std::string row_text;
    std::istringstream rows_in(body);
    while (std::getline(rows_in, row_text, ';')) {
        std::vector<double> row;
        std::istringstream cells(row_text);
        std::string cell;
        while (cells >> cell) {
            if (!cell.empty() && cell.back() == ',') cell.pop_back();
            if (cell.empty()) continue;
            try {
                size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw ConfigError(name_ + ":" + std::to_string(e.line) + ": field '" +
                                  key + "' has a non-numeric entry '" + cell + "'");
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ConfigError(name_ + ":" + std::to_string(e.line) + ": field '" + key +
                          "' is an empty matrix");
    }
    const size_t cols = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != cols) {
            throw ConfigError(name_ + ":" + std::to_string(e.line) + ": field '" + key +
                              "' has ragged rows");
        }
    }
    Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = 0; j < cols; ++j) {
            M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
    }
    return M;
}

Vector Config::get_vector(const std::string& section, const std::string& key) const {
    const Matrix M = get_matrix(section, key);
    if (M.rows() != 1 && M.cols() != 1) {
        const Entry& e = entry(section, key);
        throw ConfigError(name_ + ":" + std::to_string(e.line) + ": field '" + key +
                          "' must be a vector");
    }
    return M.rows() == 1 ? Vector(M.transpose().col(0)) : Vector(M.col(0));
}

std::string Config::get_string_or(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_scalar_or(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? get_scalar(section, key) : fallback;
}

long Config::get_integer_or(const std::string& section, const std::string& key,
                            long fallback) const {
    return has(section, key) ? get_integer(section, key) : fallback;
}

bool Config::get_flag_or(const std::string& section, const std::string& key,
                         bool fallback) const {
    return has(section, key) ? get_flag(section, key) : fallback;
}

std::string format_matrix(const Matrix& M) {
    std::string out = "[";
    char buf[64];
    for (Index i = 0; i < M.rows(); ++i) {
        if (i > 0) out += "; ";
        for (Index j = 0; j < M.cols(); ++j) {
            if (j > 0) out += " ";
            std::snprintf(buf, sizeof(buf), "%.17g", M(i, j));
            out += buf;
        }
    }
    out += "]";
    return out;
}

std::string format_vector(const Vector& v) {
    return format_matrix(Matrix(v));
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

BasisFunction make_basis(const std::string& kind, Index state_dim, Index index,
                         double scale) {
    if (index < 1 || index > state_dim) {
        throw ConfigError("basis: phi_index must lie in [1, n]");
    }
    const Index k = index - 1;
    if (kind == "zero") return [](const Vector&) { return 0.0; };
    if (kind == "constant") return [](const Vector&) { return 1.0; };
    if (kind == "norm") return [](const Vector& v) { return v.norm(); };
    if (kind == "sample") return [k, scale](const Vector& v) { return scale * v(k); };
    if (kind == "sin") {
        return [k, scale](const Vector& v) { return std::sin(scale * v(k)); };
    }
    throw ConfigError("basis: unknown phi kind '" + kind +
                      "' (expected zero|constant|norm|sample|sin)");
}

Scenario load_scenario(const Config& cfg) {
    Scenario sc;

    // [plant]
    const std::string builder = cfg.get_string_or("plant", "builder", "explicit");
    StateSpaceSystem sys;
    if (builder == "heat") {
        sys = build_heat_plant(static_cast<int>(cfg.get_integer("plant", "grid_points")),
                               cfg.get_scalar("plant", "length"),
                               cfg.get_scalar("plant", "diffusion"));
    } else if (builder == "explicit") {
        sys = StateSpaceSystem(cfg.get_matrix("plant", "A"), cfg.get_matrix("plant", "B"),
                               cfg.get_matrix("plant", "C"));
    } else {
        throw ConfigError("plant: unknown builder '" + builder +
                          "' (expected explicit|heat)");
    }
    const Index n = sys.n();

    const std::string phi_kind = cfg.get_string_or("plant", "phi", "zero");
    const Index phi_index = cfg.get_integer_or("plant", "phi_index", 1);
    const double phi_scale = cfg.get_scalar_or("plant", "phi_scale", 1.0);
    BasisFunction phi = make_basis(phi_kind, n, phi_index, phi_scale);

    Vector alpha = Vector::Zero(n);
    if (cfg.has("plant", "alpha")) alpha = cfg.get_vector("plant", "alpha");
    const double nu_alpha = cfg.get_scalar_or("plant", "nu_alpha", 1.0);
    const double rho0 = cfg.get_scalar_or("plant", "rho0", 1.0);
    sc.plant = SemilinearPlant(std::move(sys), std::move(phi), std::move(alpha), nu_alpha,
                               rho0);

    // [cost]
    sc.R = cfg.get_matrix("cost", "R");

    // [compensator]
    sc.constrained = cfg.get_flag_or("compensator", "constrained", true);
    sc.strictly_proper = cfg.get_flag_or("compensator", "enforce_strictly_proper", false);
    const long order = cfg.get_integer_or("compensator", "order", -1);
    if (order >= 0) sc.compensator_order = static_cast<Index>(order);

    // [simulation]
    const std::string horizon = cfg.get_string_or("simulation", "T", "auto");
    sc.horizon_auto = horizon == "auto";
    if (!sc.horizon_auto) sc.T = cfg.get_scalar("simulation", "T");
    sc.dt = cfg.get_scalar_or("simulation", "dt", 1e-3);
    sc.v0 = cfg.has("simulation", "v0") ? cfg.get_vector("simulation", "v0")
                                        : Vector(Vector::Zero(n));
    sc.v_p0 = cfg.has("simulation", "v_p0") ? cfg.get_vector("simulation", "v_p0")
                                            : Vector(Vector::Zero(n));
    sc.law_name = cfg.get_string_or("simulation", "law", "Compensator");
    sc.reference_kind = cfg.get_string_or("simulation", "reference", "zero");
    if (sc.reference_kind != "zero" && sc.reference_kind != "constant") {
        throw ConfigError("simulation: unknown reference '" + sc.reference_kind +
                          "' (expected zero|constant)");
    }
    sc.reference_value = cfg.has("simulation", "reference_value")
                             ? cfg.get_vector("simulation", "reference_value")
                             : Vector(Vector::Zero(sc.plant.linear.p()));
    sc.seed = static_cast<std::uint64_t>(cfg.get_integer_or("simulation", "seed", 1));

    // [adaptation]
    sc.adaptation_enabled = cfg.get_flag_or("adaptation", "enabled", false);
    sc.gamma = cfg.get_scalar_or("adaptation", "gamma", 1.0);
    sc.epsilon = cfg.get_scalar_or("adaptation", "epsilon", 0.05);
    sc.alpha_hat0 = cfg.has("adaptation", "alpha_hat0")
                        ? cfg.get_vector("adaptation", "alpha_hat0")
                        : Vector(Vector::Zero(n));

    // [small_gain]
    sc.rho_w = cfg.get_scalar_or("small_gain", "rho_w", 1.0);
    sc.epsilon_s = cfg.get_scalar_or("small_gain", "epsilon_s", 0.01);
    sc.r_inf = cfg.get_scalar_or("small_gain", "r_inf", 0.0);
    sc.lipschitz_samples =
        static_cast<int>(cfg.get_integer_or("small_gain", "lipschitz_samples", 256));

    // [benchmark]
    if (cfg.has("benchmark", "laws")) {
        std::istringstream in(cfg.get_string("benchmark", "laws"));
        std::string name;
        while (in >> name) sc.benchmark_laws.push_back(name);
    }
    sc.sigma_draws = static_cast<int>(cfg.get_integer_or("benchmark", "sigma_draws", 100));

    return sc;
}

}  // namespace dyadic
