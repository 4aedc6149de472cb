#pragma once

#include <string>
#include <vector>

#include "nlhjb/config.hpp"
#include "nlhjb/hjb.hpp"

namespace nlhjb {

/// Preset from the registry, or the custom problem described by the table paths.
ControlProblem make_problem(const RunConfig& config);

std::vector<std::string> subcommand_names();

struct RunOutcome {
  int status = 0;
  std::string message;
  /// Paths written, manifest last.
  std::vector<std::string> files;
};

/**
 * Runs one of operator-check, cell, effective, homogenize, rates, lp-verify,
 * bounds-check. Artifacts go to config.output_dir together with manifest.txt.
 * Errors are reported through the outcome, never thrown.
 */
RunOutcome run_subcommand(const std::string& name, const RunConfig& config);

}  // namespace nlhjb
