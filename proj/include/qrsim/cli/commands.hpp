// Subcommands theory | simulate | validate | optimize.
#pragma once

#include <ostream>

#include "qrsim/cli/manifest.hpp"
#include "qrsim/config.hpp"

namespace qrsim::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitValidationFailure = 2,
  kExitCensoredOnly = 3,
};

int cmd_theory(const RunManifest& m, const Config& cfg, std::ostream& out);
int cmd_simulate(const RunManifest& m, const Config& cfg, std::ostream& out);
// theory_cfg drives the analytic side, sim_cfg the simulator.
int cmd_validate(const RunManifest& m, const Config& theory_cfg, const Config& sim_cfg,
                 std::ostream& out);
int cmd_optimize(const RunManifest& m, const Config& cfg, std::ostream& out);

// Full command line entry; writes results to --out or `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qrsim::cli
