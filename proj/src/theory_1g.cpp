#include "qrsim/theory_1g.hpp"

#include <cmath>
#include <stdexcept>

#include "qrsim/pair_state.hpp"

namespace qrsim {

std::string to_string(Protocol p) {
  return p == Protocol::two_step ? "two_step" : "hop_by_hop";
}

Protocol protocol_from_string(const std::string& s) {
  if (s == "two_step") return Protocol::two_step;
  if (s == "hop_by_hop") return Protocol::hop_by_hop;
  throw std::invalid_argument("unknown protocol: " + s);
}

double p_bsm_photonic(double mu) { return (1.0 - mu) * (1.0 - mu) / 2.0; }

double attempt_pmf(double mu, int h) {
  if (h < 1) throw std::domain_error("attempt index must be >= 1");
  const double p = p_bsm_photonic(mu);
  return std::pow(1.0 - p, h - 1) * p;
}

double step_success_prob(double mu, int h_max, int k_links) {
  if (k_links < 0) throw std::domain_error("k_links must be >= 0");
  const double q = 1.0 - std::pow(1.0 - p_bsm_photonic(mu), h_max);
  return std::pow(q, k_links);
}

TwoStepSchedule TwoStepSchedule::for_chain(int n_repeaters) {
  if (n_repeaters < 0) throw std::invalid_argument("n_repeaters must be >= 0");
  TwoStepSchedule s;
  for (int link = 1; link <= n_repeaters + 1; ++link)
    (link % 2 == 1 ? s.odd_links : s.even_links).push_back(link);
  return s;
}

IonTiming ion_timing(const TrappedIonParams& p, const ChainTopology& t) {
  const double seg = t.segment_length_km();
  IonTiming timing;
  timing.t_attempt_s = p.t_attempt_s ? *p.t_attempt_s : p.t_init_s + t.flight_time_s(seg);
  timing.t_corr_s = t.flight_time_s(seg / 2.0) + p.t_1q_s;
  timing.t_dbsm_s =
      p.t_ms_s + p.t_meas_s + t.flight_time_s(t.chain_length_km - seg) + p.t_1q_s;
  return timing;
}

double ion_hop_loss(const TrappedIonParams& p, const ChainTopology& t) {
  return total_loss_1g(p, t.node_to_bsm_km(), t);
}

double truncated_max_moment(double mu, int h_max, int k_links) {
  if (k_links == 0) return 0.0;
  const double fail = 1.0 - p_bsm_photonic(mu);
  double e = 0.0;
  double prev = 0.0;  // F(h-1)^k
  double fail_pow = 1.0;
  for (int h = 1; h <= h_max; ++h) {
    fail_pow *= fail;
    const double cur = std::pow(1.0 - fail_pow, k_links);
    e += h * (cur - prev);
    prev = cur;
  }
  return e;
}

CycleTimeBreakdown expected_cycle_time(double mu, int h_max, int n_repeaters,
                                       const IonTiming& timing) {
  if (h_max < 1) throw std::domain_error("h_max must be >= 1");
  const auto sched = TwoStepSchedule::for_chain(n_repeaters);
  const int n_o = static_cast<int>(sched.odd_links.size());
  const int n_e = static_cast<int>(sched.even_links.size());
  const double ta = timing.t_attempt_s;
  const double tc = timing.t_corr_s;

  CycleTimeBreakdown b;
  b.p_heg1 = step_success_prob(mu, h_max, n_o);
  b.p_heg2 = step_success_prob(mu, h_max, n_e);
  b.p_suc = b.p_heg1 * b.p_heg2;
  const double e_o = truncated_max_moment(mu, h_max, n_o);
  const double e_e = truncated_max_moment(mu, h_max, n_e);

  if (n_repeaters == 0) {
    // Single link: herald + correction, no swap.
    b.t_success_term = ta * e_o + tc * b.p_heg1;
    b.t_fail_step1_term = (1.0 - b.p_heg1) * ta * h_max;
  } else {
    b.t_success_term =
        ta * (e_o * b.p_heg2 + b.p_heg1 * e_e) + (2.0 * tc + timing.t_dbsm_s) * b.p_suc;
    b.t_fail_step1_term = (1.0 - b.p_heg1) * ta * h_max;
    b.t_fail_step2_term = (1.0 - b.p_heg2) * (ta * (e_o + h_max * b.p_heg1) + tc * b.p_heg1);
  }
  b.t_exp_total = b.t_success_term + b.t_fail_step1_term + b.t_fail_step2_term;
  return b;
}

CycleTimeBreakdown expected_cycle_time(const TrappedIonParams& p, const ChainTopology& t) {
  return expected_cycle_time(ion_hop_loss(p, t), p.h_max, t.n_repeaters, ion_timing(p, t));
}

HopByHopCycle expected_cycle_time_hop_by_hop(double mu, int h_max, int n_repeaters,
                                             const IonTiming& timing) {
  const double q = step_success_prob(mu, h_max, 1);
  const double g = truncated_max_moment(mu, h_max, 1);
  const double ta = timing.t_attempt_s;
  // Cost of one link, whatever its outcome; reached only if all earlier links succeeded.
  const double per_link = g * ta + q * timing.t_corr_s + (1.0 - q) * h_max * ta;
  HopByHopCycle c;
  double reach = 1.0;
  for (int k = 0; k <= n_repeaters; ++k) {
    c.t_exp_total += reach * per_link;
    reach *= q;
  }
  c.p_suc = reach;
  if (n_repeaters > 0) c.t_exp_total += reach * timing.t_dbsm_s;
  return c;
}

double egr_1g(const TrappedIonParams& p, const ChainTopology& t, Protocol protocol) {
  const double mu = ion_hop_loss(p, t);
  const IonTiming timing = ion_timing(p, t);
  if (protocol == Protocol::hop_by_hop) {
    const auto c = expected_cycle_time_hop_by_hop(mu, p.h_max, t.n_repeaters, timing);
    return c.p_suc / c.t_exp_total;
  }
  const auto b = expected_cycle_time(mu, p.h_max, t.n_repeaters, timing);
  return b.p_suc / b.t_exp_total;
}

namespace {

struct StaticFidelity {
  double x = 0.0;
  double y = 0.0;
};

StaticFidelity static_part(const TrappedIonParams& p, int n) {
  const double w = std::pow(p.w_em(), 2 * n + 2) * std::pow(1.0 - p.p_1q(), 2);
  const double lam = std::pow(p.w_ms(), n);
  return {w * lam * lam / 4.0, w * lam / 2.0};
}

// Per-ion phase-variance weight: sigma^2/2 = kappa * dt^2.
double kappa(const TrappedIonParams& p) {
  return 2.0 / (p.tau_coherence_s * p.tau_coherence_s);
}

// Conditional pmf of the attempt index given success within h_max.
std::vector<double> conditional_pmf(double mu, int h_max) {
  std::vector<double> pmf(h_max + 1, 0.0);
  const double q = step_success_prob(mu, h_max, 1);
  for (int h = 1; h <= h_max; ++h) pmf[h] = attempt_pmf(mu, h) / q;
  return pmf;
}

double two_step_exact(const TrappedIonParams& p, const ChainTopology& t) {
  const int n = t.n_repeaters;
  const int h_max = p.h_max;
  const double mu = ion_hop_loss(p, t);
  const IonTiming tm = ion_timing(p, t);
  const double k = kappa(p);
  const auto pmf = conditional_pmf(mu, h_max);
  const auto sched = TwoStepSchedule::for_chain(n);

  // Dephasing factor of one link's ion pair for base wait w; end ions wait T_DBSM longer.
  auto link_factor = [&](int link, double w) {
    const bool left_end = link == 1;
    const bool right_end = link == n + 1;
    const double wl = left_end ? w + tm.t_dbsm_s : w;
    const double wr = right_end ? w + tm.t_dbsm_s : w;
    return std::exp(-k * (wl * wl + wr * wr));
  };

  // Even links: factor depends only on their own max l.
  std::vector<double> even_mass(h_max + 1, 0.0);
  for (int l = 1; l <= h_max; ++l) {
    double all_le = 1.0, all_lt = 1.0;
    for (int link : sched.even_links) {
      double le = 0.0, lt = 0.0;
      for (int h = 1; h <= l; ++h) {
        const double v = pmf[h] * link_factor(link, tm.t_attempt_s * (l - h) + tm.t_corr_s);
        le += v;
        if (h < l) lt += v;
      }
      all_le *= le;
      all_lt *= lt;
    }
    even_mass[l] = all_le - all_lt;
  }

  double total = 0.0;
  for (int kk = 1; kk <= h_max; ++kk) {
    for (int l = 1; l <= h_max; ++l) {
      if (even_mass[l] == 0.0) continue;
      double all_le = 1.0, all_lt = 1.0;
      for (int link : sched.odd_links) {
        double le = 0.0, lt = 0.0;
        for (int h = 1; h <= kk; ++h) {
          const double w = tm.t_attempt_s * (kk - h + l) + 2.0 * tm.t_corr_s;
          const double v = pmf[h] * link_factor(link, w);
          le += v;
          if (h < kk) lt += v;
        }
        all_le *= le;
        all_lt *= lt;
      }
      total += (all_le - all_lt) * even_mass[l];
    }
  }
  return total;
}

double hop_by_hop_exact(const TrappedIonParams& p, const ChainTopology& t) {
  const int n = t.n_repeaters;
  const int h_max = p.h_max;
  const double mu = ion_hop_loss(p, t);
  const IonTiming tm = ion_timing(p, t);
  const double k = kappa(p);
  const auto pmf = conditional_pmf(mu, h_max);

  // weight[s]: mass over later links' attempt totals s, times their dephasing factors.
  std::vector<double> weight(1, 1.0);
  for (int link = n + 1; link >= 1; --link) {
    const int later = n + 1 - link;
    for (std::size_t s = 0; s < weight.size(); ++s) {
      const double w = tm.t_corr_s * (later + 1) + tm.t_attempt_s * static_cast<double>(s);
      const double wl = link == 1 ? w + tm.t_dbsm_s : w;
      const double wr = link == n + 1 ? w + tm.t_dbsm_s : w;
      weight[s] *= std::exp(-k * (wl * wl + wr * wr));
    }
    if (link == 1) break;
    std::vector<double> next(weight.size() + h_max, 0.0);
    for (std::size_t s = 0; s < weight.size(); ++s) {
      if (weight[s] == 0.0) continue;
      for (int h = 1; h <= h_max; ++h) next[s + h] += weight[s] * pmf[h];
    }
    weight = std::move(next);
  }
  double total = 0.0;
  for (double v : weight) total += v;
  return total;
}

}  // namespace

std::vector<double> expected_schedule_waits(const TrappedIonParams& p, const ChainTopology& t) {
  const int n = t.n_repeaters;
  const double mu = ion_hop_loss(p, t);
  const IonTiming tm = ion_timing(p, t);
  std::vector<double> waits(2 * n + 2, 0.0);
  if (n == 0) {
    waits[0] = waits[1] = tm.t_corr_s;
    return waits;
  }
  const auto sched = TwoStepSchedule::for_chain(n);
  const int n_e = static_cast<int>(sched.even_links.size());
  const double mean_max_e =
      truncated_max_moment(mu, p.h_max, n_e) / step_success_prob(mu, p.h_max, n_e);
  for (int link = 1; link <= n + 1; ++link) {
    const double w =
        link % 2 == 1 ? mean_max_e * tm.t_attempt_s + tm.t_dbsm_s : tm.t_dbsm_s;
    waits[2 * link - 2] = w;
    waits[2 * link - 1] = w;
  }
  return waits;
}

double expected_fidelity_from_waits(const TrappedIonParams& p, int n_repeaters,
                                    std::span<const double> waits_s) {
  if (!(p.tau_coherence_s > 0.0)) throw std::domain_error("tau must be > 0");
  if (waits_s.size() != static_cast<std::size_t>(2 * n_repeaters + 2))
    throw std::invalid_argument("need one wait per ion");
  double sum_sq = 0.0;
  for (double dt : waits_s) sum_sq += dt * dt;
  const auto sp = static_part(p, n_repeaters);
  return 0.25 + sp.x + sp.y * std::exp(-kappa(p) * sum_sq);
}

double exact_dephasing_factor(const TrappedIonParams& p, const ChainTopology& t,
                              Protocol protocol) {
  if (!(p.tau_coherence_s > 0.0)) throw std::domain_error("tau must be > 0");
  if (t.n_repeaters == 0) {
    const double tc = ion_timing(p, t).t_corr_s;
    return std::exp(-kappa(p) * 2.0 * tc * tc);
  }
  return protocol == Protocol::two_step ? two_step_exact(p, t) : hop_by_hop_exact(p, t);
}

double expected_fidelity_1g(const TrappedIonParams& p, const ChainTopology& t,
                            WaitModel model, Protocol protocol) {
  if (!(p.tau_coherence_s > 0.0)) throw std::domain_error("tau must be > 0");
  if (model == WaitModel::exact) {
    const auto sp = static_part(p, t.n_repeaters);
    return 0.25 + sp.x + sp.y * exact_dephasing_factor(p, t, protocol);
  }
  std::vector<double> waits;
  if (protocol == Protocol::two_step) {
    waits = expected_schedule_waits(p, t);
  } else {
    const int n = t.n_repeaters;
    const double mu = ion_hop_loss(p, t);
    const IonTiming tm = ion_timing(p, t);
    const double mean_h =
        truncated_max_moment(mu, p.h_max, 1) / step_success_prob(mu, p.h_max, 1);
    waits.assign(2 * n + 2, 0.0);
    for (int link = 1; link <= n + 1; ++link) {
      const int later = n + 1 - link;
      const double w = n == 0 ? tm.t_corr_s
                              : later * (mean_h * tm.t_attempt_s + tm.t_corr_s) + tm.t_dbsm_s;
      waits[2 * link - 2] = waits[2 * link - 1] = w;
    }
  }
  return expected_fidelity_from_waits(p, t.n_repeaters, waits);
}

}  // namespace qrsim
