#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace bernoulli::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 1, kNotConverged = 2 };

/// Solve, then write u.field, free_boundary.csv and manifest.json under
/// c.output. 0 when descent and polish converged, 2 otherwise.
int cmd_solve(const RunConfig& c);

/// Density profile and diagnostics summary for a field dump. 2 when no free
/// boundary vertex is near the requested centre.
int cmd_diagnose(const std::string& dump, const RunConfig& c);

/// Rescaled dumps blowup_<k>.field and blowup.csv.
int cmd_blowup(const std::string& dump, const RunConfig& c);

/// One solve per config, each into <output>/<config stem>/, run on up to jobs
/// threads, then <output>/sweep.csv. Returns the largest exit code.
int cmd_sweep(const std::vector<std::string>& configs, const std::string& output, int jobs);

/// Full command line entry point.
int run(int argc, char** argv);

}  // namespace bernoulli::cli
