// Hardware and topology parameters for trapped-ion (1G) and all-photonic (APE)
// repeater chains, plus per-hop photon-loss budgets.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace qrsim {

// Thrown by validate(); field() names the offending member.
class InvalidParameter : public std::invalid_argument {
 public:
  InvalidParameter(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Converts between the two encodings of fiber attenuation.
double attenuation_length_from_db(double alpha_db_per_km);
double db_per_km_from_attenuation_length(double l_att_km);

// Linear chain Q1 - BSM - QR_1 - BSM - ... - QR_n - BSM - Q2 with equal
// segments. L_att is canonical; alpha is derived on demand.
struct ChainTopology {
  int n_repeaters = 0;
  double chain_length_km = 50.0;
  double signal_speed_km_per_s = 2.0e5;
  double attenuation_length_km = 22.0;

  double segment_length_km() const;
  double node_to_bsm_km() const { return segment_length_km() / 2.0; }
  double attenuation_db_per_km() const;
  void set_attenuation_db_per_km(double alpha);
  // Seconds for a signal to cover `km` of fiber.
  double flight_time_s(double km) const { return km / signal_speed_km_per_s; }

  void validate() const;
};

struct TrappedIonParams {
  double f_1q = 0.9999;
  double f_2q = 0.999;
  double tau_coherence_s = 60e-3;
  double f_em_trap = 0.96;
  double eta_qfc = 0.3;
  double eta_det = 0.75;
  double eta_coll = 0.69;
  double t_1q_s = 5e-6;
  double t_ms_s = 107e-6;
  double t_meas_s = 0.0;  // ion readout after the MS gate
  int h_max = 90;
  // Ion initialization + excitation per HEG attempt, added to the photon
  // round trip when t_attempt_s is not given.
  double t_init_s = 20e-6;
  std::optional<double> t_attempt_s;
  std::optional<double> p_ms;

  double p_ms_value() const { return p_ms ? *p_ms : 1.0 - f_2q; }
  double p_1q() const { return 1.0 - f_1q; }
  double w_em() const { return 1.0 - 4.0 / 3.0 * (1.0 - f_em_trap); }
  double w_ms() const { return 1.0 - p_ms_value(); }

  void validate() const;
};

struct ApeParams {
  double t_cz_s = 100e-9;
  double t_meas_s = 20e-9;
  double t_emit_s = 5e-9;
  double t2_emitter_s = 3e-6;
  double t2_memory_s = 20e-3;
  double eta_qfc = 0.95;
  double eta_det = 1.0;
  double eta_coll = 1.0;
  double p_single_mode = 0.997;
  double eta_delay = 1.0;

  void validate() const;
};

struct RgsParams {
  int m = 6;
  int b0 = 6;
  int b1 = 3;

  int photon_count() const { return 2 * m * (1 + b0 * (1 + b1)); }
  int photons_per_branch() const { return 1 + b0 * (1 + b1); }
  void validate() const;

  friend bool operator==(const RgsParams&, const RgsParams&) = default;
};

// Loss probabilities per stage; total() composes survivals.
struct LossBudget {
  double mu_coll = 0.0;
  double mu_qfc = 0.0;
  double mu_ch = 0.0;
  double mu_d = 0.0;
  double mu_delay = 0.0;

  double total() const;
};

double channel_loss(double length_km, const ChainTopology& topology);

LossBudget loss_budget_1g(const TrappedIonParams& p, double hop_length_km,
                          const ChainTopology& topology);
LossBudget loss_budget_ape(const ApeParams& p, double hop_length_km,
                           const ChainTopology& topology);

double total_loss_1g(const TrappedIonParams& p, double hop_length_km,
                     const ChainTopology& topology);
double total_loss_ape(const ApeParams& p, double hop_length_km,
                      const ChainTopology& topology);

}  // namespace qrsim
