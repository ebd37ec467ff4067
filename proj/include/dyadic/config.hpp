#pragma once

#include "dyadic/core.hpp"
#include "dyadic/linsys.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dyadic {

/// Sectioned key/value text config with bracketed row-major matrices.
///
///   [plant]
///   builder = heat
///   grid_points = 5
///   A = [0 1; -2 -3]          # explicit matrices, rows split by ';'
///
/// Values may span lines until the closing bracket. '#' starts a comment.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& name = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::vector<std::string> sections() const;

    std::string get_string(const std::string& section, const std::string& key) const;
    double get_scalar(const std::string& section, const std::string& key) const;
    long get_integer(const std::string& section, const std::string& key) const;
    bool get_flag(const std::string& section, const std::string& key) const;
    Matrix get_matrix(const std::string& section, const std::string& key) const;
    Vector get_vector(const std::string& section, const std::string& key) const;

    std::string get_string_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const;
    double get_scalar_or(const std::string& section, const std::string& key,
                         double fallback) const;
    long get_integer_or(const std::string& section, const std::string& key,
                        long fallback) const;
    bool get_flag_or(const std::string& section, const std::string& key,
                     bool fallback) const;

    /// Raw file bytes, hashed into every produced artifact.
    const std::string& text() const { return text_; }
    const std::string& name() const { return name_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    const Entry& entry(const std::string& section, const std::string& key) const;

    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::string text_;
    std::string name_;
};

/// Canonical single-line matrix rendering at 17 significant digits,
/// parseable by Config::get_matrix.
std::string format_matrix(const Matrix& M);
std::string format_vector(const Vector& v);

/// FNV-1a 64-bit hash, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Everything a scenario config describes, resolved into domain objects.
struct Scenario {
    SemilinearPlant plant;
    Matrix R;

    bool constrained = true;
    bool strictly_proper = false;
    std::optional<Index> compensator_order;

    bool horizon_auto = true;  ///< T = 50 / beta when set
    double T = 0.0;
    double dt = 1e-3;
    Vector v0;
    Vector v_p0;
    std::string law_name = "LQR";
    std::string reference_kind = "zero";  ///< zero | constant
    Vector reference_value;

    bool adaptation_enabled = false;
    double gamma = 1.0;
    double epsilon = 0.05;
    Vector alpha_hat0;

    double rho_w = 1.0;
    double epsilon_s = 0.01;
    double r_inf = 0.0;
    int lipschitz_samples = 256;

    std::vector<std::string> benchmark_laws;
    int sigma_draws = 100;
    std::uint64_t seed = 1;
};

/// Builds the scenario from a parsed config, reporting missing fields by
/// section and name.
Scenario load_scenario(const Config& cfg);

/// Named basis functions available to configs (zero, constant, norm, sample,
/// sin); index is 1-based.
BasisFunction make_basis(const std::string& kind, Index state_dim, Index index,
                         double scale);

}  // namespace dyadic
