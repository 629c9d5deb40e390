#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>

#include "qrsim/sim/sim_ape.hpp"

using namespace qrsim;
using namespace qrsim::sim;

namespace {

ChainTopology chain(int n, double km) {
  ChainTopology t;
  t.n_repeaters = n;
  t.chain_length_km = km;
  return t;
}

ApeParams lossless() {
  ApeParams a;
  a.eta_qfc = a.eta_det = a.eta_coll = a.p_single_mode = a.eta_delay = 1.0;
  return a;
}

ChainTopology lossless_chain(int n) {
  auto t = chain(n, 10.0);
  t.attenuation_length_km = 1e300;
  return t;
}

// Real state vector over N qubits; qubit i is bit i of the index.
struct StateVector {
  int qubits;
  std::vector<double> amp;

  explicit StateVector(int n) : qubits(n), amp(std::size_t(1) << n, std::pow(2.0, -n / 2.0)) {}

  void h(int q) {
    const std::size_t bit = std::size_t(1) << q;
    for (std::size_t i = 0; i < amp.size(); ++i) {
      if (i & bit) continue;
      const double a = amp[i], b = amp[i | bit];
      amp[i] = (a + b) / std::sqrt(2.0);
      amp[i | bit] = (a - b) / std::sqrt(2.0);
    }
  }
  void cz(int a, int b) {
    const std::size_t m = (std::size_t(1) << a) | (std::size_t(1) << b);
    for (std::size_t i = 0; i < amp.size(); ++i)
      if ((i & m) == m) amp[i] = -amp[i];
  }
  void cnot(int c, int t) {
    const std::size_t cb = std::size_t(1) << c, tb = std::size_t(1) << t;
    for (std::size_t i = 0; i < amp.size(); ++i)
      if ((i & cb) && !(i & tb)) std::swap(amp[i], amp[i | tb]);
  }
  void project(int q, int outcome) {
    const std::size_t bit = std::size_t(1) << q;
    for (std::size_t i = 0; i < amp.size(); ++i)
      if (((i & bit) != 0) != (outcome != 0)) amp[i] = 0.0;
  }
};

struct ChainLayout {
  int n;
  int q1() const { return 0; }
  int p1() const { return 1; }
  int left_leaf(int r) const { return 2 + 4 * r; }
  int left_core(int r) const { return 3 + 4 * r; }
  int right_core(int r) const { return 4 + 4 * r; }
  int right_leaf(int r) const { return 5 + 4 * r; }
  int p2() const { return 4 * n + 2; }
  int q2() const { return 4 * n + 3; }
  int qubits() const { return 4 * n + 4; }
};

// End-pair state of an m = 1 chain at the logical level: end memories hold
// graph-state edges to their photons, each repeater is the graph
// leaf - core - core - leaf; every photon pair meets in a Bell measurement
// and both cores are measured in X. `flip` selects a core whose X outcome is
// inverted (-1 for none). Returns amplitudes over (q1, q2).
std::array<double, 4> end_pair(int n, const std::vector<int>& outcomes, int flip_core) {
  const ChainLayout L{n};
  StateVector s(L.qubits());
  s.cz(L.q1(), L.p1());
  for (int r = 0; r < n; ++r) {
    s.cz(L.left_leaf(r), L.left_core(r));
    s.cz(L.left_core(r), L.right_core(r));
    s.cz(L.right_core(r), L.right_leaf(r));
  }
  s.cz(L.p2(), L.q2());

  std::vector<std::pair<int, int>> bsms;
  int left = L.p1();
  for (int r = 0; r < n; ++r) {
    bsms.push_back({left, L.left_leaf(r)});
    left = L.right_leaf(r);
  }
  bsms.push_back({left, L.p2()});

  std::size_t k = 0;
  for (auto [a, b] : bsms) {
    s.cnot(a, b);
    s.h(a);
    s.project(a, outcomes[k++]);
    s.project(b, outcomes[k++]);
  }
  for (int r = 0; r < n; ++r)
    for (int c : {L.left_core(r), L.right_core(r)}) {
      s.h(c);
      const int o = outcomes[k++];
      s.project(c, c == flip_core ? 1 - o : o);
    }

  std::array<double, 4> out{};
  std::size_t fixed = 0;
  for (int q = 0; q < L.qubits(); ++q)
    if (q != L.q1() && q != L.q2()) {
      for (std::size_t i = 0; i < s.amp.size(); ++i)
        if (s.amp[i] != 0.0) {
          fixed |= i & (std::size_t(1) << q);
          break;
        }
    }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out[a + 2 * b] = s.amp[fixed | (std::size_t(a) << L.q1()) | (std::size_t(b) << L.q2())];
  double norm = 0;
  for (double v : out) norm += v * v;
  for (double& v : out) v /= std::sqrt(norm);
  return out;
}

// |<phi| P |psi>| for P = Z on q1 (which = 0) or q2 (which = 1).
double overlap_after_z(const std::array<double, 4>& phi, const std::array<double, 4>& psi,
                       int which) {
  double s = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const int idx = a + 2 * b;
      const double sign = (which == 0 ? a : b) ? -1.0 : 1.0;
      s += phi[idx] * sign * psi[idx];
    }
  return std::abs(s);
}

// |<phi| X |psi>| for X on q1 (which = 0) or q2 (which = 1).
double overlap_after_x(const std::array<double, 4>& phi, const std::array<double, 4>& psi,
                       int which) {
  double s = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const int na = which == 0 ? 1 - a : a, nb = which == 0 ? b : 1 - b;
      s += phi[na + 2 * nb] * psi[a + 2 * b];
    }
  return std::abs(s);
}

double overlap(const std::array<double, 4>& phi, const std::array<double, 4>& psi) {
  double s = 0;
  for (int i = 0; i < 4; ++i) s += phi[i] * psi[i];
  return std::abs(s);
}

}  // namespace

TEST_SUITE("sim_ape") {
  TEST_CASE("photon plan: leaves arrive before their cores") {
    const ApeParams a;
    for (const RgsParams r : {RgsParams{6, 6, 3}, RgsParams{1, 25, 1}, RgsParams{8, 11, 4},
                              RgsParams{3, 2, 5}}) {
      const auto plan = RgsPhotonPlan::build(RgsSchedule::build(r, a), to_ps(25e-6));
      CHECK(plan.photons.size() == static_cast<std::size_t>(r.photon_count()));
      CHECK(plan.left_arrivals.size() == plan.right_arrivals.size());
      std::map<int, SimTime> leaf_at, first_core;
      for (const auto& ph : plan.photons) {
        if (ph.kind == PhotonKind::leaf) {
          leaf_at[ph.branch] = ph.arrival_ps;
        } else if (!first_core.count(ph.branch) || ph.arrival_ps < first_core[ph.branch]) {
          first_core[ph.branch] = ph.arrival_ps;
        }
      }
      for (int b = 0; b < 2 * r.m; ++b) CHECK(leaf_at[b] < first_core[b]);
      // Both arms deliver their k-th leaf at the same moment.
      for (int k = 0; k < r.m; ++k) {
        CHECK(leaf_at[k] == leaf_at[r.m + k]);
        CHECK(plan.leaf_arrival_ps[k] == leaf_at[k]);
      }
      for (std::size_t i = 1; i < plan.left_arrivals.size(); ++i)
        CHECK(plan.photons[plan.left_arrivals[i - 1]].arrival_ps <=
              plan.photons[plan.left_arrivals[i]].arrival_ps);
    }
  }

  TEST_CASE("logical X measurement") {
    const std::vector<std::uint8_t> l1{1, 1, 1};
    const std::vector<int> kids{2, 2, 2};
    const std::uint8_t one_flip[3] = {0, 1, 0};
    auto r = measure_logical_x(l1, kids, 2, one_flip, false);
    CHECK(r.valid);
    CHECK(r.votes == 3);
    CHECK_FALSE(r.flipped);
    r = measure_logical_x(l1, kids, 2, one_flip, true);
    CHECK(r.flipped);
    const std::uint8_t two_flips[3] = {1, 1, 0};
    CHECK(measure_logical_x(l1, kids, 2, two_flips, false).flipped);
    CHECK_FALSE(measure_logical_x(l1, kids, 2, two_flips, true).flipped);
    // A tie among two obtained votes counts as wrong.
    const std::vector<int> partial{2, 1, 2};
    const std::uint8_t tie[3] = {1, 0, 0};
    r = measure_logical_x(l1, partial, 2, tie, false);
    CHECK(r.votes == 2);
    CHECK(r.flipped);
    const std::vector<std::uint8_t> none{0, 0, 0};
    CHECK_FALSE(measure_logical_x(none, kids, 2, one_flip, false).valid);
  }

  TEST_CASE("logical Z measurement") {
    CHECK(measure_logical_z({1, 0, 1}, {0, 1, 0}));
    CHECK_FALSE(measure_logical_z({1, 0, 1}, {0, 0, 0}));
    CHECK(measure_logical_z({0, 0}, {1, 3}));
  }

  TEST_CASE("generation errors") {
    ApeParams quiet;
    quiet.t2_emitter_s = 1e300;
    RngStream r(1, 1);
    const auto sched = RgsSchedule::build({6, 6, 3}, quiet);
    CHECK(generate_rgs_errors(sched, quiet, r).empty());

    const ApeParams a;
    const auto s = RgsSchedule::build({6, 6, 3}, a);
    const auto f = fidelity_ape(a, chain(4, 50.0), {6, 6, 3});
    long votes = 0, vote_flips = 0, leaves = 0, leaf_flips = 0;
    for (int i = 0; i < 20000; ++i) {
      const auto e = generate_rgs_errors(s, a, r);
      for (auto v : e.vote_flip) vote_flips += v;
      for (auto v : e.leaf_flip) leaf_flips += v;
      votes += e.vote_flip.size();
      leaves += e.leaf_flip.size();
    }
    const double pv = f.e_vote, pl = f.e_x_l;
    CHECK(std::abs(vote_flips / double(votes) - pv) < 3 * std::sqrt(pv * (1 - pv) / votes));
    CHECK(std::abs(leaf_flips / double(leaves) - pl) < 3 * std::sqrt(pl * (1 - pl) / leaves));
  }

  TEST_CASE("X outcome flips map onto the end-pair stabilizers") {
    for (int n : {1, 2}) {
      const ChainLayout L{n};
      const int outcomes_len = 2 * (n + 1) + 2 * n;
      for (int pattern = 0; pattern < 8; ++pattern) {
        std::vector<int> outcomes(outcomes_len);
        for (int i = 0; i < outcomes_len; ++i) outcomes[i] = (pattern >> (i % 3)) & 1;
        const auto base = end_pair(n, outcomes, -1);
        for (int r = 0; r < n; ++r) {
          const auto lf = end_pair(n, outcomes, L.left_core(r));
          const auto rf = end_pair(n, outcomes, L.right_core(r));
          // A core flip is Z on Q1 (X1 Z_{2n+2} parity) or X on Q1 (Z1 X_{2n+2}).
          CHECK(overlap_after_z(lf, base, 0) ==
                doctest::Approx(core_flip_hits_x_parity(r, ArmSide::left) ? 1.0 : 0.0));
          CHECK(overlap_after_z(rf, base, 0) ==
                doctest::Approx(core_flip_hits_x_parity(r, ArmSide::right) ? 1.0 : 0.0));
          CHECK(overlap_after_x(lf, base, 0) ==
                doctest::Approx(core_flip_hits_x_parity(r, ArmSide::left) ? 0.0 : 1.0));
          CHECK(overlap_after_x(rf, base, 0) ==
                doctest::Approx(core_flip_hits_x_parity(r, ArmSide::right) ? 0.0 : 1.0));
          CHECK(overlap(lf, base) == doctest::Approx(0.0));
          CHECK(overlap(rf, base) == doctest::Approx(0.0));
          CHECK(overlap(lf, rf) == doctest::Approx(0.0));
        }
      }
    }
  }

  TEST_CASE("lossless chain without errors") {
    const RgsParams r{2, 1, 1};
    const int n = 2;
    ApeSimOptions opt;
    opt.gate_errors = false;
    opt.memory_dephasing = false;
    ApeChainSimulator sim(lossless(), lossless_chain(n), r, 9, opt);
    CHECK(sim.hop_loss() < 1e-200);
    const int trials = 20000;
    int ok = 0;
    for (int i = 0; i < trials; ++i) {
      const auto o = sim.run_iteration();
      if (!o.success) {
        CHECK(o.failed_node >= 1);
        CHECK(o.failed_node <= n + 1);
        continue;
      }
      ++ok;
      CHECK(*o.fidelity == 1.0);
      CHECK_FALSE(o.residual_x);
      CHECK_FALSE(o.residual_z);
      for (int sel : o.selected_pair) CHECK(sel >= 0);
    }
    const double p = std::pow(1 - std::pow(0.5, r.m), n + 1);
    CHECK(std::abs(ok / double(trials) - p) < 3 * std::sqrt(p * (1 - p) / trials));
  }

  TEST_CASE("success frequency matches the per-node product") {
    const ApeParams a;
    const RgsParams r{3, 2, 2};
    const auto t = chain(1, 30.0);
    const auto res = estimate_ape(a, t, r, 1u << 30, 30000, 4);
    const double p = egr_ape(a, t, r).p_rgs;
    CHECK(std::abs(res.success_prob - p) < 3 * res.success_prob_sem);
    CHECK(res.iterations == 30000);
    CHECK(res.censored);
  }

  TEST_CASE("fidelity matches the parity-composed error rate") {
    const ApeParams a;
    const RgsParams r{6, 6, 3};
    const auto t = chain(8, 50.0);
    ApeSimOptions opt;
    opt.memory_dephasing = false;
    const auto res = estimate_ape(a, t, r, 6000, 1000000, 31, opt);
    const auto f = fidelity_ape(a, t, r);
    CHECK_FALSE(res.censored);
    CHECK(std::abs(*res.fidelity - f.fbar_parity) < 3 * *res.fidelity_sem);
  }

  TEST_CASE("fully dephased memories leave a random end frame") {
    ApeParams a = lossless();
    a.t2_memory_s = 1e-12;
    ApeSimOptions opt;
    opt.gate_errors = false;
    const auto res = estimate_ape(a, lossless_chain(1), {4, 1, 1}, 4000, 100000, 8, opt);
    CHECK(std::abs(*res.fidelity - 0.25) < 3 * *res.fidelity_sem);
  }

  TEST_CASE("rate normalization") {
    const RgsParams r{30, 1, 1};
    const auto t = lossless_chain(1);
    const auto res = estimate_ape(lossless(), t, r, 500, 500, 2);
    const double tr = t_rgs(r, lossless());
    CHECK(res.success_prob == 1.0);
    CHECK(res.egr_hz == doctest::Approx(1.0 / (tr * mq_e(t, tr, r.m))));
  }

  TEST_CASE("budget-capped runs are censored") {
    const auto res = estimate_ape(ApeParams{}, chain(5, 50.0), {1, 25, 1}, 3000, 3000, 1);
    CHECK(res.censored);
    CHECK(res.successes < 3000);
    CHECK(res.iterations == 3000);
    CHECK_THROWS(estimate_ape(ApeParams{}, chain(5, 50.0), {1, 25, 1}, 1, 0, 1));
  }

  TEST_CASE("runs are reproducible") {
    const auto a = estimate_ape(ApeParams{}, chain(3, 40.0), {4, 3, 2}, 200, 20000, 12);
    const auto b = estimate_ape(ApeParams{}, chain(3, 40.0), {4, 3, 2}, 200, 20000, 12);
    CHECK(a.iterations == b.iterations);
    CHECK(a.fidelity == b.fidelity);
  }
}
