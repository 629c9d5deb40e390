// Closed-form model of the all-photonic (APE) chain: success probability,
// RGS generation schedule, memory-qubit accounting, EGR and fidelity.
#pragma once

#include <stdexcept>
#include <vector>

#include "qrsim/model_params.hpp"
#include "qrsim/pair_state.hpp"

namespace qrsim {

struct IndirectProbs {
  double r0 = 0.0;
  double r1 = 0.0;
};

struct LogicalMeasProbs {
  double p_x = 0.0;
  double p_z = 0.0;
};

IndirectProbs indirect_probs(double mu, int b0, int b1);
LogicalMeasProbs logical_meas_probs(double mu, int b0, int b1);
double p_rgs(double mu, const RgsParams& rgs, int n_repeaters);

// Gate-by-gate RGS generation schedule for one emitter with two ancillas.
// Branch b (0-based, 2m of them): for each subtree, b1 level-2 photons, the
// level-1 photon, an emitter-ancilla CZ and an emitter measurement; then the
// leaf phase: CZ(e,A), CZ(e,B), leaf emission, emitter measurement. The
// ancilla measurement closing a branch overlaps the next branch.
enum class GateKind { emit, cz, measure_emitter, measure_ancilla };
enum class PhotonKind { leaf, level1, level2 };
enum class ErrorWindow { none, core, leaf };

struct ScheduledGate {
  GateKind kind;
  int branch;
  int subtree;  // -1 outside the core phase
  double start_s;
  double duration_s;
  ErrorWindow window;
  bool critical;  // on the emitter's timeline
};

struct PhotonSlot {
  int branch;
  PhotonKind kind;
  int subtree;  // -1 for the leaf
  int child;    // level-2 index within the subtree, -1 otherwise
  double emission_s;  // end of the emission gate
};

class RgsSchedule {
 public:
  static RgsSchedule build(const RgsParams& rgs, const ApeParams& ape);

  const std::vector<ScheduledGate>& gates() const { return gates_; }
  const std::vector<PhotonSlot>& photons() const { return photons_; }
  double total_s() const { return total_s_; }
  double branch_period_s() const { return branch_period_s_; }
  // Summed durations of the gates tagged with each error window in one
  // subtree (t_c) and one leaf phase (t_l).
  double core_window_s() const { return core_window_s_; }
  double leaf_window_s() const { return leaf_window_s_; }
  const RgsParams& rgs() const { return rgs_; }

 private:
  RgsParams rgs_;
  std::vector<ScheduledGate> gates_;
  std::vector<PhotonSlot> photons_;
  double total_s_ = 0.0;
  double branch_period_s_ = 0.0;
  double core_window_s_ = 0.0;
  double leaf_window_s_ = 0.0;
};

double t_rgs(const RgsParams& rgs, const ApeParams& ape);

// ceil(num/den) with ceil(0) = 0, robust to rounding in the quotient.
long long guarded_ceil_ratio(double num, double den);

int mq_e(const ChainTopology& t, double t_rgs_s, int m);

struct ApeRateBreakdown {
  double mu = 0.0;
  double p_bsm_photonic = 0.0;
  double p_x = 0.0;
  double p_z = 0.0;
  double r0 = 0.0;
  double r1 = 0.0;
  double p_rgs = 0.0;
  double t_rgs_s = 0.0;
  int mq_e = 0;
  double egr = 0.0;
};

double ape_hop_loss(const ApeParams& p, const ChainTopology& t);
ApeRateBreakdown egr_ape(const ApeParams& p, const ChainTopology& t, const RgsParams& rgs);

class UndefinedFidelity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ApeFidelityBreakdown {
  double p_z_gate = 0.0;  // emitter Z-flip probability over t_c
  double e_vote = 0.0;
  double s0 = 0.0;
  double e_x_c = 0.0;
  double e_x_l = 0.0;
  double e_x = 0.0;
  double e_z = 0.0;
  PauliErrorRates rates;
  double fbar = 0.0;
  // Same chain with independent core and leaf flips composed by parity,
  // e_c + e_l - 2 e_c e_l; this is what the simulator samples.
  double e_x_parity = 0.0;
  double fbar_parity = 0.0;
};

// Z-flip probability of a qubit idling/gating for t under dephasing time t2.
double p_z_error(double t_s, double t2_s);
double binomial(int n, int k);
// Probability that the majority of `votes` votes is wrong (ties count as wrong).
double majority_error(int votes, double e_vote);

ApeFidelityBreakdown fidelity_ape(const ApeParams& p, const ChainTopology& t,
                                  const RgsParams& rgs);

}  // namespace qrsim
