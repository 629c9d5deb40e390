// Exhaustive (m, b0, b1) search under a photon budget, and the repeaterless
// baseline it is compared against.
#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "qrsim/model_params.hpp"

namespace qrsim {

class EmptySearch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RgsCandidate {
  RgsParams rgs;
  double egr = 0.0;
};

// Strict "better than" under the deterministic tie-break: higher EGR, then
// fewer photons, then lexicographically smaller (m, b0, b1).
bool better_candidate(const RgsCandidate& a, const RgsCandidate& b);

// All shapes with photon_count <= budget, in (m, b0, b1) order.
std::vector<RgsParams> feasible_rgs(int photon_budget);

// Optimum for the chain as given (n from topology). workers <= 1 runs serially.
RgsCandidate optimize_rgs(const ApeParams& p, const ChainTopology& t, int photon_budget,
                          int workers = 1);

// One emitter at Q1 sends a photon over the whole chain; attempt period
// t_emit + L_c/c; normalized by the 1 + ceil(L_c/(c T_base)) memories in use.
double repeaterless_rate(const ApeParams& p, const ChainTopology& t);

struct FrontierPoint {
  int n_repeaters = 0;
  RgsParams best;
  double egr = 0.0;
};

struct OptimizationResult {
  RgsParams best;  // at the largest n of the frontier
  double egr = 0.0;
  std::vector<FrontierPoint> frontier;
  double baseline_egr = 0.0;
  std::optional<int> crossover_n;
};

OptimizationResult optimize_frontier(const ApeParams& p, const ChainTopology& t,
                                     int photon_budget, int n_min, int n_max,
                                     int workers = 1);

}  // namespace qrsim
