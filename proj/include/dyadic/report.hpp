#pragma once

#include "dyadic/adaptive.hpp"
#include "dyadic/config.hpp"
#include "dyadic/nehari.hpp"
#include "dyadic/riccati.hpp"
#include "dyadic/sim.hpp"

#include <string>
#include <vector>

namespace dyadic {

/// Subcommand provenance record; every listed file carries the config hash.
struct RunManifest {
    std::string config_hash;
    std::string tool_version;
    std::string subcommand;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs;
};

inline constexpr const char* kToolVersion = "0.1.0";

/// Writes bytes to path via a temp file and rename; creates directories.
void write_file_atomic(const std::string& path, const std::string& bytes);

/// `# config_hash = <hex>` header line shared by all artifacts.
std::string artifact_header(const std::string& config_hash);

std::string render_riccati(const RiccatiSolution& sol, const std::string& hash);
std::string render_gramian(const GramianResult& gram, const std::string& hash);
std::string render_decay(const DecayCertificate& cert, const std::string& hash);
std::string render_nehari(const NehariApproximant& comp, const std::string& hash,
                          const std::string& label);
std::string render_suboptimality(const SuboptimalityBound& bound, const std::string& hash);
std::string render_cost(const CostReport& cost, const std::string& hash);
std::string render_small_gain(const SmallGainReport& rep, const std::string& hash);
std::string render_manifest(const RunManifest& manifest);

/// One column per signal component, header row naming signals, fixed
/// 17-significant-digit formatting.
std::string render_trajectory_csv(const Trajectory& traj, const std::string& hash);

/// Reads back matrices/scalars from an artifact produced by the renderers
/// (artifacts are themselves valid configs).
Matrix read_artifact_matrix(const std::string& path, const std::string& section,
                            const std::string& key);
double read_artifact_scalar(const std::string& path, const std::string& section,
                            const std::string& key);

/// Parses a compensator exported by render_nehari.
NehariApproximant read_compensator(const std::string& path);

}  // namespace dyadic
