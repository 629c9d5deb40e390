// Protocol-level Monte Carlo of the all-photonic chain: RGS generation with
// gate-time dephasing, per-photon transmission loss, BSM-node logic with
// majority votes, and Pauli-frame resolution at the end nodes.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "qrsim/model_params.hpp"
#include "qrsim/sim/engine.hpp"
#include "qrsim/sim/rng.hpp"
#include "qrsim/sim/stats.hpp"
#include "qrsim/theory_ape.hpp"

namespace qrsim::sim {

enum class ArmSide { left, right };

// Photon slots of one RGS with their arrival offsets at the BSM node, relative
// to the start of generation. Left-arm branches (0..m-1) are held back by m
// branch periods so both arms of neighbouring repeaters line up; core photons
// are delayed by one branch period so each leaf arrives first.
struct PlannedPhoton {
  int branch = 0;      // 0..2m-1
  int arm_branch = 0;  // index within its arm, 0..m-1
  ArmSide arm = ArmSide::left;
  PhotonKind kind = PhotonKind::leaf;
  int subtree = -1;
  int child = -1;
  SimTime emission_ps = 0;
  SimTime arrival_ps = 0;  // includes fiber flight to the BSM node
};

struct RgsPhotonPlan {
  RgsParams rgs;
  SimTime branch_period_ps = 0;
  std::vector<PlannedPhoton> photons;  // emission order
  // Per arm: indices into photons sorted by (arrival, index).
  std::vector<int> left_arrivals;
  std::vector<int> right_arrivals;
  std::vector<SimTime> leaf_arrival_ps;  // per arm branch; same for both arms

  static RgsPhotonPlan build(const RgsSchedule& schedule, SimTime flight_ps);
};

// Errors injected during one RGS generation.
struct RgsTrialErrors {
  int b0 = 0;
  std::vector<std::uint8_t> vote_flip;  // [branch * b0 + subtree]
  std::vector<std::uint8_t> leaf_flip;  // [branch]

  bool empty() const;
};

// Walks the schedule and draws a Z error per gate interval inside the
// core-subtree and leaf windows.
RgsTrialErrors generate_rgs_errors(const RgsSchedule& schedule, const ApeParams& p,
                                   RngStream& rng);

// Outcome of one logical measurement on an encoded core qubit.
struct LogicalResult {
  bool valid = false;
  bool flipped = false;  // announced X_L outcome differs from the true one
  int votes = 0;
};

// X_L: a vote needs the level-1 photon and all its children; majority over
// obtained votes (a tie counts as wrong), then the leaf-phase flag flips the
// outcome. Masks are per subtree: level-1 arrived, children arrived count.
LogicalResult measure_logical_x(const std::vector<std::uint8_t>& level1_arrived,
                                const std::vector<int>& children_arrived, int b1,
                                const std::uint8_t* vote_flips, bool leaf_flip);
// Z_L: every subtree needs its level-1 photon or at least one child.
bool measure_logical_z(const std::vector<std::uint8_t>& level1_arrived,
                       const std::vector<int>& children_arrived);

// Whether an X_L flip on a core of repeater `repeater` (0-based) acts on the
// X1 Z_{2n+2} end-pair stabilizer (true) or on Z1 X_{2n+2} (false).
bool core_flip_hits_x_parity(int repeater, ArmSide side);

struct ApeSimOptions {
  bool gate_errors = true;
  bool memory_dephasing = true;
};

struct ApeTrialOutcome {
  bool success = false;
  SimTime duration_ps = 0;
  std::optional<double> fidelity;  // 1 or 0 per trial
  bool residual_x = false;  // parity of errors on the X1 Z_{2n+2} stabilizer
  bool residual_z = false;  // parity of errors on the Z1 X_{2n+2} stabilizer
  bool frame_x = false;     // announced Pauli frame at Q1
  bool frame_z = false;
  std::vector<int> selected_pair;  // per BSM node, -1 if none succeeded
  int failed_node = -1;
};

class ApeChainSimulator {
 public:
  ApeChainSimulator(const ApeParams& params, const ChainTopology& topology,
                    const RgsParams& rgs, std::uint64_t seed, ApeSimOptions options = {});
  ~ApeChainSimulator();
  ApeChainSimulator(const ApeChainSimulator&) = delete;
  ApeChainSimulator& operator=(const ApeChainSimulator&) = delete;

  ApeTrialOutcome run_iteration();
  const RgsPhotonPlan& plan() const;
  double hop_loss() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Runs until target_successes or max_iterations, whichever comes first; the
// result is censored if the budget ran out first.
SweepResult estimate_ape(const ApeParams& params, const ChainTopology& topology,
                         const RgsParams& rgs, std::uint64_t target_successes,
                         std::uint64_t max_iterations, std::uint64_t seed,
                         ApeSimOptions options = {}, const TrialSink& sink = {});

}  // namespace qrsim::sim
