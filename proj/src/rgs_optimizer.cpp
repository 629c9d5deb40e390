#include "qrsim/rgs_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <tuple>

#include "qrsim/theory_ape.hpp"

namespace qrsim {

bool better_candidate(const RgsCandidate& a, const RgsCandidate& b) {
  if (a.egr != b.egr) return a.egr > b.egr;
  const int pa = a.rgs.photon_count(), pb = b.rgs.photon_count();
  if (pa != pb) return pa < pb;
  return std::tie(a.rgs.m, a.rgs.b0, a.rgs.b1) < std::tie(b.rgs.m, b.rgs.b0, b.rgs.b1);
}

std::vector<RgsParams> feasible_rgs(int photon_budget) {
  std::vector<RgsParams> out;
  for (int m = 1; 2 * m * 3 <= photon_budget; ++m)
    for (int b0 = 1; 2 * m * (1 + 2 * b0) <= photon_budget; ++b0)
      for (int b1 = 1; RgsParams{m, b0, b1}.photon_count() <= photon_budget; ++b1)
        out.push_back({m, b0, b1});
  return out;
}

RgsCandidate optimize_rgs(const ApeParams& p, const ChainTopology& t, int photon_budget,
                          int workers) {
  if (photon_budget < 6) throw EmptySearch("photon budget below the smallest RGS (6 photons)");
  const auto cands = feasible_rgs(photon_budget);
  const std::size_t n_workers =
      std::clamp<std::size_t>(workers < 1 ? 1 : workers, 1, cands.size());

  // Strided partition; each worker keeps its local best, merged by the same order.
  std::vector<RgsCandidate> local(n_workers);
  std::vector<char> seen(n_workers, 0);
  auto scan = [&](std::size_t w) {
    for (std::size_t i = w; i < cands.size(); i += n_workers) {
      RgsCandidate c{cands[i], egr_ape(p, t, cands[i]).egr};
      if (!seen[w] || better_candidate(c, local[w])) {
        local[w] = c;
        seen[w] = 1;
      }
    }
  };
  if (n_workers == 1) {
    scan(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(scan, w);
    for (auto& th : pool) th.join();
  }
  RgsCandidate best = local[0];
  for (std::size_t w = 1; w < n_workers; ++w)
    if (seen[w] && better_candidate(local[w], best)) best = local[w];
  return best;
}

double repeaterless_rate(const ApeParams& p, const ChainTopology& t) {
  const double l = t.chain_length_km;
  const double success = p.eta_coll * p.p_single_mode * p.eta_qfc *
                         std::exp(-l / t.attenuation_length_km) * p.eta_det;
  const double period = p.t_emit_s + t.flight_time_s(l);
  const double memories =
      1.0 + static_cast<double>(guarded_ceil_ratio(l, t.signal_speed_km_per_s * period));
  return success / (period * memories);
}

OptimizationResult optimize_frontier(const ApeParams& p, const ChainTopology& t,
                                     int photon_budget, int n_min, int n_max, int workers) {
  if (n_min < 0 || n_max < n_min) throw std::invalid_argument("invalid repeater range");
  OptimizationResult r;
  r.baseline_egr = repeaterless_rate(p, t);
  for (int n = n_min; n <= n_max; ++n) {
    ChainTopology tn = t;
    tn.n_repeaters = n;
    const auto best = optimize_rgs(p, tn, photon_budget, workers);
    r.frontier.push_back({n, best.rgs, best.egr});
    if (!r.crossover_n && best.egr > r.baseline_egr) r.crossover_n = n;
  }
  r.best = r.frontier.back().best;
  r.egr = r.frontier.back().egr;
  return r;
}

}  // namespace qrsim
