#include "qrsim/model_params.hpp"

#include <cmath>
#include <numbers>

namespace qrsim {
namespace {

void require_probability(const char* field, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameter(field, "must lie in [0,1]");
}

void require_positive(const char* field, double v) {
  if (!(v > 0.0)) throw InvalidParameter(field, "must be > 0");
}

void require_non_negative(const char* field, double v) {
  if (!(v >= 0.0)) throw InvalidParameter(field, "must be >= 0");
}

}  // namespace

double attenuation_length_from_db(double alpha_db_per_km) {
  if (!(alpha_db_per_km > 0.0))
    throw std::domain_error("attenuation must be > 0 dB/km to map to a finite length");
  return 10.0 / (alpha_db_per_km * std::numbers::ln10);
}

double db_per_km_from_attenuation_length(double l_att_km) {
  if (!(l_att_km > 0.0)) throw std::domain_error("attenuation length must be > 0");
  return 10.0 / (l_att_km * std::numbers::ln10);
}

double ChainTopology::segment_length_km() const {
  return chain_length_km / static_cast<double>(n_repeaters + 1);
}

double ChainTopology::attenuation_db_per_km() const {
  return db_per_km_from_attenuation_length(attenuation_length_km);
}

void ChainTopology::set_attenuation_db_per_km(double alpha) {
  attenuation_length_km = attenuation_length_from_db(alpha);
}

void ChainTopology::validate() const {
  if (n_repeaters < 0) throw InvalidParameter("n_repeaters", "must be >= 0");
  require_positive("chain_length_km", chain_length_km);
  require_positive("signal_speed_km_per_s", signal_speed_km_per_s);
  require_positive("attenuation_length_km", attenuation_length_km);
}

void TrappedIonParams::validate() const {
  require_probability("f_1q", f_1q);
  require_probability("f_2q", f_2q);
  require_probability("f_em_trap", f_em_trap);
  require_probability("eta_qfc", eta_qfc);
  require_probability("eta_det", eta_det);
  require_probability("eta_coll", eta_coll);
  require_positive("tau_coherence_s", tau_coherence_s);
  require_positive("t_1q_s", t_1q_s);
  require_positive("t_ms_s", t_ms_s);
  require_non_negative("t_meas_s", t_meas_s);
  require_non_negative("t_init_s", t_init_s);
  if (h_max < 1) throw InvalidParameter("h_max", "must be >= 1");
  if (t_attempt_s) require_positive("t_attempt_s", *t_attempt_s);
  if (p_ms) require_probability("p_ms", *p_ms);
  // w_em < 0 would leave the Werner family.
  if (f_em_trap < 0.25) throw InvalidParameter("f_em_trap", "must be >= 0.25");
}

void ApeParams::validate() const {
  require_positive("t_cz_s", t_cz_s);
  require_positive("t_meas_s", t_meas_s);
  require_positive("t_emit_s", t_emit_s);
  require_positive("t2_emitter_s", t2_emitter_s);
  require_positive("t2_memory_s", t2_memory_s);
  require_probability("eta_qfc", eta_qfc);
  require_probability("eta_det", eta_det);
  require_probability("eta_coll", eta_coll);
  require_probability("p_single_mode", p_single_mode);
  require_probability("eta_delay", eta_delay);
}

void RgsParams::validate() const {
  if (m < 1) throw InvalidParameter("m", "must be >= 1");
  if (b0 < 1) throw InvalidParameter("b0", "must be >= 1");
  if (b1 < 1) throw InvalidParameter("b1", "must be >= 1");
}

double LossBudget::total() const {
  return 1.0 - (1.0 - mu_coll) * (1.0 - mu_qfc) * (1.0 - mu_delay) * (1.0 - mu_ch) *
                   (1.0 - mu_d);
}

double channel_loss(double length_km, const ChainTopology& topology) {
  if (!(length_km >= 0.0)) throw std::domain_error("fiber length must be >= 0");
  return -std::expm1(-length_km / topology.attenuation_length_km);
}

LossBudget loss_budget_1g(const TrappedIonParams& p, double hop_length_km,
                          const ChainTopology& topology) {
  LossBudget b;
  b.mu_coll = 1.0 - p.eta_coll;
  b.mu_qfc = 1.0 - p.eta_qfc;
  b.mu_ch = channel_loss(hop_length_km, topology);
  b.mu_d = 1.0 - p.eta_det;
  return b;
}

LossBudget loss_budget_ape(const ApeParams& p, double hop_length_km,
                           const ChainTopology& topology) {
  LossBudget b;
  b.mu_coll = 1.0 - p.eta_coll * p.p_single_mode;
  b.mu_qfc = 1.0 - p.eta_qfc;
  b.mu_delay = 1.0 - p.eta_delay;
  b.mu_ch = channel_loss(hop_length_km, topology);
  b.mu_d = 1.0 - p.eta_det;
  return b;
}

double total_loss_1g(const TrappedIonParams& p, double hop_length_km,
                     const ChainTopology& topology) {
  return loss_budget_1g(p, hop_length_km, topology).total();
}

double total_loss_ape(const ApeParams& p, double hop_length_km,
                      const ChainTopology& topology) {
  return loss_budget_ape(p, hop_length_km, topology).total();
}

}  // namespace qrsim
