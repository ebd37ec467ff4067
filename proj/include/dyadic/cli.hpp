#pragma once

#include "dyadic/config.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace dyadic::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigFailure = 2,
    kSynthesisFailure = 3,
    kDivergence = 4,
    kPropertyFailure = 5,
    kMissingDependency = 6,
};

struct Options {
    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    std::optional<std::uint64_t> seed;
};

/// Full command-line entry point (parses argv, maps errors to exit codes).
int run(int argc, const char* const* argv);

/// Subcommand drivers; throw toolkit errors, return ExitCode on soft
/// failures (property violations).
int cmd_synthesize(const Config& cfg, const Options& opt);
int cmd_simulate(const Config& cfg, const Options& opt);
int cmd_benchmark(const Config& cfg, const Options& opt);
int cmd_nehari(const Config& cfg, const Options& opt);
int cmd_check_small_gain(const Config& cfg, const Options& opt);

}  // namespace dyadic::cli
