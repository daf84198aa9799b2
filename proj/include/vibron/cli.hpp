// Command-line front end: JSON run configurations, subcommand
// dispatch (estimate | sweep | rabi | parity | validate), CSV/JSON result
// writers, and the build-identity validation suite.
#pragma once

#include <string>
#include <vector>

namespace vibron {

// Process exit codes shared by every subcommand.
enum ExitCode : int {
  exit_ok = 0,
  exit_config_error = 2,
  exit_zone_violation = 3,
  exit_numerical_failure = 4,
};

// One identity check of the validation suite.
struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;  // measured quantity against its tolerance
};

// Runs the full identity suite: eigenstate Rabi law, Heisenberg readout
// identity, interaction-picture readout law, estimator bias bound with its
// quadratic scaling, matched-sideband construction, canonical equivalence,
// and the Lamb-Dicke reduction slope.
std::vector<ValidationCheck> run_validation_checks();

// Entry point of the command-line tool, callable in-process; returns the
// process exit code and never throws.
int cli_main(int argc, const char* const* argv);

}  // namespace vibron
