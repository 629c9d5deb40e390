// Closed-form rate and fidelity model for trapped-ion (1G) chains.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "qrsim/model_params.hpp"

namespace qrsim {

enum class Protocol { two_step, hop_by_hop };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

double p_bsm_photonic(double mu);
double attempt_pmf(double mu, int h);
double step_success_prob(double mu, int h_max, int k_links);

// Links are numbered 1..n+1; odd links run in the first step.
struct TwoStepSchedule {
  std::vector<int> odd_links;
  std::vector<int> even_links;

  static TwoStepSchedule for_chain(int n_repeaters);
};

struct IonTiming {
  double t_attempt_s = 0.0;
  double t_corr_s = 0.0;
  double t_dbsm_s = 0.0;
};

// T_attempt = t_init + L_seg/c (unless overridden); T_corr = L_seg/2c + t_1q;
// T_DBSM = t_ms + t_meas + (L_c - L_seg)/c + t_1q.
IonTiming ion_timing(const TrappedIonParams& p, const ChainTopology& t);

// Loss from a node to its BSM node.
double ion_hop_loss(const TrappedIonParams& p, const ChainTopology& t);

struct CycleTimeBreakdown {
  double t_success_term = 0.0;
  double t_fail_step1_term = 0.0;
  double t_fail_step2_term = 0.0;
  double t_exp_total = 0.0;
  double p_heg1 = 0.0;
  double p_heg2 = 0.0;
  double p_suc = 0.0;
};

// sum_{h=1}^{h_max} h (F(h)^k - F(h-1)^k): E[max of k attempt counts; all succeed].
double truncated_max_moment(double mu, int h_max, int k_links);

CycleTimeBreakdown expected_cycle_time(double mu, int h_max, int n_repeaters,
                                       const IonTiming& timing);
CycleTimeBreakdown expected_cycle_time(const TrappedIonParams& p, const ChainTopology& t);

struct HopByHopCycle {
  double t_exp_total = 0.0;
  double p_suc = 0.0;
};

HopByHopCycle expected_cycle_time_hop_by_hop(double mu, int h_max, int n_repeaters,
                                             const IonTiming& timing);

double egr_1g(const TrappedIonParams& p, const ChainTopology& t,
              Protocol protocol = Protocol::two_step);

enum class WaitModel {
  expected_schedule,  // one mean wait per step
  exact,              // exact average of the dephasing factor over attempt counts
};

// Mean waits per ion (2n+2 entries, ion order along the chain) under the
// expected-schedule model.
std::vector<double> expected_schedule_waits(const TrappedIonParams& p, const ChainTopology& t);

// E[F] for fixed per-ion waits.
double expected_fidelity_from_waits(const TrappedIonParams& p, int n_repeaters,
                                    std::span<const double> waits_s);

// E[exp(-sigma_tot^2/2)] conditioned on success, exact over attempt counts.
double exact_dephasing_factor(const TrappedIonParams& p, const ChainTopology& t,
                              Protocol protocol);

double expected_fidelity_1g(const TrappedIonParams& p, const ChainTopology& t,
                            WaitModel model = WaitModel::exact,
                            Protocol protocol = Protocol::two_step);

}  // namespace qrsim
