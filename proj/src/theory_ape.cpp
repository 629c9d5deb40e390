#include "qrsim/theory_ape.hpp"

#include <cmath>

#include "qrsim/theory_1g.hpp"

namespace qrsim {

IndirectProbs indirect_probs(double mu, int b0, int b1) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::domain_error("mu must lie in [0,1]");
  const double subtree_complete = std::pow(1.0 - mu, b1 + 1);
  return {1.0 - std::pow(1.0 - subtree_complete, b0), 1.0 - std::pow(mu, b1)};
}

LogicalMeasProbs logical_meas_probs(double mu, int b0, int b1) {
  const auto r = indirect_probs(mu, b0, b1);
  return {r.r0, std::pow(1.0 - mu + mu * r.r1, b0)};
}

double p_rgs(double mu, const RgsParams& rgs, int n_repeaters) {
  if (n_repeaters < 0) throw std::invalid_argument("n_repeaters must be >= 0");
  const double pb = p_bsm_photonic(mu);
  const auto lm = logical_meas_probs(mu, rgs.b0, rgs.b1);
  const double any_bsm = 1.0 - std::pow(1.0 - pb, rgs.m);
  const double per_repeater = lm.p_x * lm.p_x * std::pow(lm.p_z, 2 * rgs.m - 2);
  return std::pow(any_bsm, n_repeaters + 1) * std::pow(per_repeater, n_repeaters);
}

RgsSchedule RgsSchedule::build(const RgsParams& rgs, const ApeParams& ape) {
  rgs.validate();
  RgsSchedule s;
  s.rgs_ = rgs;
  double now = 0.0;

  auto gate = [&](GateKind kind, int branch, int subtree, double dur, ErrorWindow win) {
    s.gates_.push_back({kind, branch, subtree, now, dur, win, true});
    now += dur;
  };
  auto emit = [&](int branch, PhotonKind kind, int subtree, int child, ErrorWindow win) {
    gate(GateKind::emit, branch, subtree, ape.t_emit_s, win);
    s.photons_.push_back({branch, kind, subtree, child, now});
  };

  for (int b = 0; b < 2 * rgs.m; ++b) {
    for (int st = 0; st < rgs.b0; ++st) {
      for (int c = 0; c < rgs.b1; ++c) emit(b, PhotonKind::level2, st, c, ErrorWindow::core);
      emit(b, PhotonKind::level1, st, -1, ErrorWindow::core);
      gate(GateKind::cz, b, st, ape.t_cz_s, ErrorWindow::core);
      gate(GateKind::measure_emitter, b, st, ape.t_meas_s, ErrorWindow::none);
    }
    gate(GateKind::cz, b, -1, ape.t_cz_s, ErrorWindow::leaf);
    gate(GateKind::cz, b, -1, ape.t_cz_s, ErrorWindow::leaf);
    emit(b, PhotonKind::leaf, -1, -1, ErrorWindow::leaf);
    gate(GateKind::measure_emitter, b, -1, ape.t_meas_s, ErrorWindow::none);
    s.gates_.push_back({GateKind::measure_ancilla, b, -1, now, ape.t_meas_s,
                        ErrorWindow::none, false});
    if (b == 0) s.branch_period_s_ = now;
  }
  s.total_s_ = now;

  for (const auto& g : s.gates_) {
    if (g.branch != 0) break;
    if (g.window == ErrorWindow::core && g.subtree == 0) s.core_window_s_ += g.duration_s;
    if (g.window == ErrorWindow::leaf) s.leaf_window_s_ += g.duration_s;
  }
  return s;
}

double t_rgs(const RgsParams& rgs, const ApeParams& ape) {
  return RgsSchedule::build(rgs, ape).total_s();
}

long long guarded_ceil_ratio(double num, double den) {
  if (!(den > 0.0)) throw std::domain_error("denominator must be > 0");
  if (!(num >= 0.0)) throw std::domain_error("numerator must be >= 0");
  if (num == 0.0) return 0;
  const double x = num / den;
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, r)) return static_cast<long long>(r);
  return static_cast<long long>(std::ceil(x));
}

int mq_e(const ChainTopology& t, double t_rgs_s, int m) {
  if (!(t_rgs_s > 0.0)) throw std::domain_error("T_RGS must be > 0");
  const double reach = t.signal_speed_km_per_s * t_rgs_s;
  const double seg = t.segment_length_km();
  const double rest = t.n_repeaters == 0 ? 0.0 : t.chain_length_km - seg;
  return static_cast<int>(m + guarded_ceil_ratio(seg, reach) * m +
                          guarded_ceil_ratio(rest, reach));
}

double ape_hop_loss(const ApeParams& p, const ChainTopology& t) {
  return total_loss_ape(p, t.node_to_bsm_km(), t);
}

ApeRateBreakdown egr_ape(const ApeParams& p, const ChainTopology& t, const RgsParams& rgs) {
  ApeRateBreakdown b;
  b.mu = ape_hop_loss(p, t);
  b.p_bsm_photonic = p_bsm_photonic(b.mu);
  const auto ind = indirect_probs(b.mu, rgs.b0, rgs.b1);
  const auto lm = logical_meas_probs(b.mu, rgs.b0, rgs.b1);
  b.r0 = ind.r0;
  b.r1 = ind.r1;
  b.p_x = lm.p_x;
  b.p_z = lm.p_z;
  b.p_rgs = p_rgs(b.mu, rgs, t.n_repeaters);
  b.t_rgs_s = t_rgs(rgs, p);
  b.mq_e = mq_e(t, b.t_rgs_s, rgs.m);
  b.egr = b.p_rgs / (b.t_rgs_s * b.mq_e);
  return b;
}

double p_z_error(double t_s, double t2_s) {
  if (!(t2_s > 0.0)) throw std::domain_error("T2 must be > 0");
  return -std::expm1(-t_s / t2_s) / 2.0;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (n > 30) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
  }
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

double majority_error(int votes, double e_vote) {
  if (votes < 1) throw std::domain_error("majority needs at least one vote");
  double e = 0.0;
  for (int j = (votes + 1) / 2; j <= votes; ++j)
    e += binomial(votes, j) * std::pow(e_vote, j) * std::pow(1.0 - e_vote, votes - j);
  return e;
}

ApeFidelityBreakdown fidelity_ape(const ApeParams& p, const ChainTopology& t,
                                  const RgsParams& rgs) {
  const auto sched = RgsSchedule::build(rgs, p);
  const double mu = ape_hop_loss(p, t);
  if (!(mu < 1.0)) throw UndefinedFidelity("no vote obtainable: photon loss is 1");

  ApeFidelityBreakdown f;
  f.p_z_gate = p_z_error(sched.core_window_s(), p.t2_emitter_s);
  f.e_vote = f.p_z_gate;
  f.s0 = std::pow(1.0 - mu, rgs.b1 + 1);
  const double r = 1.0 - std::pow(1.0 - f.s0, rgs.b0);
  if (!(r > 0.0)) throw UndefinedFidelity("no vote obtainable: R = 0");
  double acc = 0.0;
  for (int mv = 1; mv <= rgs.b0; ++mv) {
    const double t0 = binomial(rgs.b0, mv) * std::pow(f.s0, mv) *
                      std::pow(1.0 - f.s0, rgs.b0 - mv);
    acc += t0 * majority_error(mv, f.e_vote);
  }
  f.e_x_c = acc / r;
  f.e_x_l = p_z_error(sched.leaf_window_s(), p.t2_emitter_s);
  f.e_x = f.e_x_c + f.e_x_l;
  f.e_z = 0.0;
  f.rates = compose_pauli_errors(std::min(f.e_x, 0.5), t.n_repeaters);
  f.fbar = f.rates.fidelity();
  f.e_x_parity = f.e_x_c + f.e_x_l - 2.0 * f.e_x_c * f.e_x_l;
  f.fbar_parity = compose_pauli_errors(std::min(f.e_x_parity, 0.5), t.n_repeaters).fidelity();
  return f;
}

}  // namespace qrsim
