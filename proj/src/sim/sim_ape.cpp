#include "qrsim/sim/sim_ape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qrsim::sim {

RgsPhotonPlan RgsPhotonPlan::build(const RgsSchedule& schedule, SimTime flight_ps) {
  RgsPhotonPlan plan;
  plan.rgs = schedule.rgs();
  const int m = plan.rgs.m;
  plan.branch_period_ps = to_ps(schedule.branch_period_s());
  const SimTime arm_delay = m * plan.branch_period_ps;
  plan.leaf_arrival_ps.assign(m, 0);

  for (const auto& slot : schedule.photons()) {
    PlannedPhoton ph;
    ph.branch = slot.branch;
    ph.arm = slot.branch < m ? ArmSide::left : ArmSide::right;
    ph.arm_branch = slot.branch % m;
    ph.kind = slot.kind;
    ph.subtree = slot.subtree;
    ph.child = slot.child;
    ph.emission_ps = to_ps(slot.emission_s);
    ph.arrival_ps = ph.emission_ps + (ph.arm == ArmSide::left ? arm_delay : 0) +
                    (ph.kind == PhotonKind::leaf ? 0 : plan.branch_period_ps) + flight_ps;
    if (ph.kind == PhotonKind::leaf && ph.arm == ArmSide::right)
      plan.leaf_arrival_ps[ph.arm_branch] = ph.arrival_ps;
    plan.photons.push_back(ph);
  }

  for (int i = 0; i < static_cast<int>(plan.photons.size()); ++i)
    (plan.photons[i].arm == ArmSide::left ? plan.left_arrivals : plan.right_arrivals)
        .push_back(i);
  auto by_arrival = [&](int a, int b) {
    const auto ta = plan.photons[a].arrival_ps, tb = plan.photons[b].arrival_ps;
    return ta != tb ? ta < tb : a < b;
  };
  std::sort(plan.left_arrivals.begin(), plan.left_arrivals.end(), by_arrival);
  std::sort(plan.right_arrivals.begin(), plan.right_arrivals.end(), by_arrival);
  return plan;
}

bool RgsTrialErrors::empty() const {
  return std::none_of(vote_flip.begin(), vote_flip.end(), [](auto f) { return f != 0; }) &&
         std::none_of(leaf_flip.begin(), leaf_flip.end(), [](auto f) { return f != 0; });
}

namespace {

// Gate intervals that can flip a vote or a leaf, with their Z-flip probabilities.
class RgsErrorModel {
 public:
  RgsErrorModel(const RgsSchedule& schedule, const ApeParams& p)
      : b0_(schedule.rgs().b0), branches_(2 * schedule.rgs().m) {
    for (const auto& g : schedule.gates()) {
      if (g.window == ErrorWindow::none) continue;
      const double pz = p_z_error(g.duration_s, p.t2_emitter_s);
      if (g.window == ErrorWindow::core) {
        sites_.push_back({g.branch * b0_ + g.subtree, false, pz});
      } else {
        sites_.push_back({g.branch, true, pz});
      }
    }
  }

  void sample(RngStream& rng, RgsTrialErrors& out) const {
    out.b0 = b0_;
    out.vote_flip.assign(static_cast<std::size_t>(branches_ * b0_), 0);
    out.leaf_flip.assign(static_cast<std::size_t>(branches_), 0);
    for (const auto& s : sites_) {
      if (!rng.bernoulli(s.p)) continue;
      if (s.leaf) {
        out.leaf_flip[s.index] ^= 1;
      } else {
        out.vote_flip[s.index] ^= 1;
      }
    }
  }

  void clear(RgsTrialErrors& out) const {
    out.b0 = b0_;
    out.vote_flip.assign(static_cast<std::size_t>(branches_ * b0_), 0);
    out.leaf_flip.assign(static_cast<std::size_t>(branches_), 0);
  }

 private:
  struct Site {
    int index;
    bool leaf;
    double p;
  };
  int b0_;
  int branches_;
  std::vector<Site> sites_;
};

}  // namespace

RgsTrialErrors generate_rgs_errors(const RgsSchedule& schedule, const ApeParams& p,
                                   RngStream& rng) {
  RgsTrialErrors e;
  RgsErrorModel(schedule, p).sample(rng, e);
  return e;
}

LogicalResult measure_logical_x(const std::vector<std::uint8_t>& level1_arrived,
                                const std::vector<int>& children_arrived, int b1,
                                const std::uint8_t* vote_flips, bool leaf_flip) {
  LogicalResult r;
  int wrong = 0;
  for (std::size_t s = 0; s < level1_arrived.size(); ++s) {
    if (!level1_arrived[s] || children_arrived[s] != b1) continue;
    ++r.votes;
    if (vote_flips[s]) ++wrong;
  }
  if (r.votes == 0) return r;
  r.valid = true;
  r.flipped = (2 * wrong >= r.votes) != leaf_flip;
  return r;
}

bool measure_logical_z(const std::vector<std::uint8_t>& level1_arrived,
                       const std::vector<int>& children_arrived) {
  for (std::size_t s = 0; s < level1_arrived.size(); ++s)
    if (!level1_arrived[s] && children_arrived[s] == 0) return false;
  return true;
}

namespace {

enum class Kind : std::uint8_t { photon, outcome, frame_done };

struct Msg {
  Kind kind = Kind::photon;
  int side = 0;    // photon: 0 = source on the left of the BSM node
  int cursor = 0;  // photon: position in the source's arrival list
  int from = 0;    // outcome: BSM node index
};

// Per side of a BSM node, per arm branch: arrivals of the core photons.
struct CoreLedger {
  std::vector<std::uint8_t> level1;
  std::vector<int> children;
  int seen = 0;
};

struct BsmState {
  bool has_core[2] = {false, false};
  std::vector<std::uint8_t> leaf_seen[2];
  std::vector<std::uint8_t> leaf_ok[2];
  std::vector<CoreLedger> core[2];
  int pairs_resolved = 0;
  int selected = -1;
  int events_left = 0;
  bool x_flip[2] = {false, false};
  std::uint8_t bsm_bits = 0;
  std::uint8_t x_true[2] = {0, 0};
};

}  // namespace

bool core_flip_hits_x_parity(int repeater, ArmSide side) {
  return (repeater % 2 == 0) == (side == ArmSide::left);
}

struct ApeChainSimulator::Impl {
  ApeParams p;
  ChainTopology topo;
  RgsParams rgs;
  ApeSimOptions opt;
  int n;
  double mu;
  RgsSchedule schedule;
  RgsErrorModel errors_model;
  SimTime flight_ps;
  RgsPhotonPlan plan;
  std::vector<SimTime> notify_q1_ps, notify_q2_ps;  // per BSM node

  Engine<Msg> engine;
  std::vector<RngStream> rng;

  // Iteration state.
  SimTime t0 = 0;
  bool finished = false;
  bool success = false;
  int failed_node = -1;
  std::vector<RgsTrialErrors> errs;  // per position (0 and n+1 unused)
  std::vector<BsmState> bsm;
  int outcomes_at[2] = {0, 0};
  int frames_done = 0;
  bool mem_flip[2] = {false, false};

  NodeId bsm_node(int l) const { return static_cast<NodeId>(n + 1 + l); }
  NodeId controller() const { return static_cast<NodeId>(2 * n + 3); }

  Impl(const ApeParams& params, const ChainTopology& t, const RgsParams& r, std::uint64_t seed,
       ApeSimOptions o)
      : p(params),
        topo(t),
        rgs(r),
        opt(o),
        n(t.n_repeaters),
        mu(ape_hop_loss(params, t)),
        schedule(RgsSchedule::build(r, params)),
        errors_model(schedule, params),
        flight_ps(to_ps(t.flight_time_s(t.node_to_bsm_km()))),
        plan(RgsPhotonPlan::build(schedule, flight_ps)) {
    p.validate();
    topo.validate();
    const double seg = topo.segment_length_km();
    notify_q1_ps.assign(n + 2, 0);
    notify_q2_ps.assign(n + 2, 0);
    for (int l = 1; l <= n + 1; ++l) {
      notify_q1_ps[l] = to_ps(topo.flight_time_s((l - 0.5) * seg));
      notify_q2_ps[l] = to_ps(topo.flight_time_s((n + 1 - l + 0.5) * seg));
    }
    const int nodes = 2 * n + 4;
    for (int id = 0; id < nodes; ++id) {
      rng.emplace_back(seed, static_cast<std::uint64_t>(id));
      engine.add_node([this, id](const Event<Msg>& ev) { dispatch(id, ev.payload); });
    }
    errs.resize(n + 2);
    bsm.resize(n + 2);
  }

  // Source feeding side `side` of BSM node l: a repeater arm or a Q-node.
  // Returns the repeater position, or 0 / n+1 for the end nodes.
  int source_position(int l, int side) const { return side == 0 ? l - 1 : l; }
  bool source_is_repeater(int l, int side) const {
    const int pos = source_position(l, side);
    return pos >= 1 && pos <= n;
  }
  // Left side of node l receives the right arm of the repeater to its left.
  const std::vector<int>& arrivals(int side) const {
    return side == 0 ? plan.right_arrivals : plan.left_arrivals;
  }
  int source_length(int l, int side) const {
    return source_is_repeater(l, side) ? static_cast<int>(arrivals(side).size()) : rgs.m;
  }
  SimTime source_arrival(int l, int side, int cursor) const {
    if (!source_is_repeater(l, side)) return plan.leaf_arrival_ps[cursor];
    return plan.photons[arrivals(side)[cursor]].arrival_ps;
  }

  void schedule_photon(int l, int side, int cursor) {
    if (cursor >= source_length(l, side)) return;
    engine.schedule(t0 + source_arrival(l, side, cursor), bsm_node(l),
                    Msg{Kind::photon, side, cursor, 0});
  }

  void dispatch(int id, const Msg& m) {
    if (id == static_cast<int>(controller())) {
      if (++frames_done == 2) finish(true);
    } else if (id > n + 1) {
      on_photon(id - (n + 1), m);
    } else {
      on_end_node(id, m);
    }
  }

  void finish(bool ok) {
    finished = true;
    success = ok;
    engine.cancel_all();
  }

  void fail_node(int l) {
    failed_node = l;
    finish(false);
  }

  void on_photon(int l, const Msg& m) {
    BsmState& st = bsm[l];
    auto& rs = rng[bsm_node(l)];
    const int side = m.side;
    schedule_photon(l, side, m.cursor + 1);
    const bool survived = rs.bernoulli(1.0 - mu);

    if (!source_is_repeater(l, side)) {
      on_leaf(l, side, m.cursor, survived);
    } else {
      const PlannedPhoton& ph = plan.photons[arrivals(side)[m.cursor]];
      if (ph.kind == PhotonKind::leaf) {
        on_leaf(l, side, ph.arm_branch, survived);
      } else {
        on_core(l, side, ph, survived);
      }
    }
    if (finished) return;
    if (--st.events_left == 0) node_done(l);
  }

  void on_leaf(int l, int side, int k, bool survived) {
    BsmState& st = bsm[l];
    st.leaf_seen[side][k] = 1;
    st.leaf_ok[side][k] = survived ? 1 : 0;
    if (!(st.leaf_seen[0][k] && st.leaf_seen[1][k])) return;
    const bool both = st.leaf_ok[0][k] && st.leaf_ok[1][k];
    if (both && rng[bsm_node(l)].bernoulli(0.5) && st.selected < 0) {
      st.selected = k;
      st.bsm_bits = static_cast<std::uint8_t>(rng[bsm_node(l)].uniform_int(4));
    }
    if (++st.pairs_resolved == rgs.m && st.selected < 0) fail_node(l);
  }

  void on_core(int l, int side, const PlannedPhoton& ph, bool survived) {
    BsmState& st = bsm[l];
    CoreLedger& led = st.core[side][ph.arm_branch];
    if (survived) {
      if (ph.kind == PhotonKind::level1) {
        led.level1[ph.subtree] = 1;
      } else {
        ++led.children[ph.subtree];
      }
    }
    if (++led.seen < rgs.b0 * (rgs.b1 + 1)) return;

    const int k = ph.arm_branch;
    if (!(st.leaf_seen[0][k] && st.leaf_seen[1][k]))
      throw std::logic_error("core photons arrived before their leaf BSM");
    if (k == st.selected) {
      const RgsTrialErrors& e = errs[source_position(l, side)];
      const auto r = measure_logical_x(led.level1, led.children, rgs.b1,
                                       e.vote_flip.data() + ph.branch * rgs.b0,
                                       e.leaf_flip[ph.branch] != 0);
      if (!r.valid) {
        fail_node(l);
        return;
      }
      st.x_flip[side] = r.flipped;
      st.x_true[side] = static_cast<std::uint8_t>(rng[bsm_node(l)].uniform_int(2));
    } else if (!measure_logical_z(led.level1, led.children)) {
      fail_node(l);
    }
  }

  void node_done(int l) {
    engine.schedule_in(notify_q1_ps[l], 0, Msg{Kind::outcome, 0, 0, l});
    engine.schedule_in(notify_q2_ps[l], static_cast<NodeId>(n + 1),
                       Msg{Kind::outcome, 0, 0, l});
  }

  void on_end_node(int pos, const Msg& m) {
    if (m.kind != Kind::outcome) throw std::logic_error("end node: unexpected message");
    const int end = pos == 0 ? 0 : 1;
    if (++outcomes_at[end] < n + 1) return;
    // All outcomes known: apply the frame; the memory has idled since its photon left.
    if (opt.memory_dephasing) {
      const int l = end == 0 ? 1 : n + 1;
      const SimTime emitted = t0 + plan.leaf_arrival_ps[bsm[l].selected] - flight_ps;
      const double wait_s = to_seconds(engine.now() - emitted);
      mem_flip[end] = rng[pos].bernoulli(p_z_error(wait_s, p.t2_memory_s));
    }
    engine.schedule(engine.now(), controller(), Msg{Kind::frame_done});
  }

  void reset_iteration() {
    finished = false;
    success = false;
    failed_node = -1;
    outcomes_at[0] = outcomes_at[1] = 0;
    frames_done = 0;
    mem_flip[0] = mem_flip[1] = false;
    for (int j = 1; j <= n; ++j) {
      if (opt.gate_errors) {
        errors_model.sample(rng[j], errs[j]);
      } else {
        errors_model.clear(errs[j]);
      }
    }
    for (int l = 1; l <= n + 1; ++l) {
      BsmState& st = bsm[l];
      st.pairs_resolved = 0;
      st.selected = -1;
      st.events_left = 0;
      st.bsm_bits = 0;
      for (int side = 0; side < 2; ++side) {
        st.has_core[side] = source_is_repeater(l, side);
        st.leaf_seen[side].assign(rgs.m, 0);
        st.leaf_ok[side].assign(rgs.m, 0);
        st.core[side].resize(rgs.m);
        for (auto& led : st.core[side]) {
          led.level1.assign(rgs.b0, 0);
          led.children.assign(rgs.b0, 0);
          led.seen = 0;
        }
        st.x_flip[side] = false;
        st.x_true[side] = 0;
        st.events_left += source_length(l, side);
      }
    }
  }

  ApeTrialOutcome run() {
    reset_iteration();
    t0 = engine.now();
    for (int l = 1; l <= n + 1; ++l)
      for (int side = 0; side < 2; ++side) schedule_photon(l, side, 0);
    engine.run_until([this] { return finished; });

    ApeTrialOutcome out;
    out.success = success;
    out.duration_ps = engine.now() - t0;
    out.failed_node = failed_node;
    for (int l = 1; l <= n + 1; ++l) out.selected_pair.push_back(bsm[l].selected);
    if (!success) return out;

    // Each core's X_L flip lands on one end-pair stabilizer parity (a: X1
    // Z_{2n+2}, b: Z1 X_{2n+2}); memory Z errors on Q1 / Q2 likewise. Side 1
    // of BSM node l is repeater l-1's left core, side 0 repeater l-2's right core.
    bool a = mem_flip[0], b = mem_flip[1];
    bool fx = false, fz = false;
    for (int l = 1; l <= n + 1; ++l) {
      const BsmState& st = bsm[l];
      // Announced frame: BSM bits plus announced logical outcomes.
      fx ^= (st.bsm_bits & 1) != 0;
      fz ^= (st.bsm_bits & 2) != 0;
      for (int side = 0; side < 2; ++side) {
        if (!st.has_core[side]) continue;
        const bool on_a = side == 1 ? core_flip_hits_x_parity(l - 1, ArmSide::left)
                                    : core_flip_hits_x_parity(l - 2, ArmSide::right);
        const bool announced = (st.x_true[side] != 0) != st.x_flip[side];
        (on_a ? a : b) ^= st.x_flip[side];
        (on_a ? fx : fz) ^= announced;
      }
    }
    out.residual_x = a;
    out.residual_z = b;
    out.fidelity = (a || b) ? 0.0 : 1.0;
    out.frame_x = fx;
    out.frame_z = fz;
    return out;
  }
};

ApeChainSimulator::ApeChainSimulator(const ApeParams& params, const ChainTopology& topology,
                                     const RgsParams& rgs, std::uint64_t seed,
                                     ApeSimOptions options)
    : impl_(std::make_unique<Impl>(params, topology, rgs, seed, options)) {}

ApeChainSimulator::~ApeChainSimulator() = default;

ApeTrialOutcome ApeChainSimulator::run_iteration() { return impl_->run(); }

const RgsPhotonPlan& ApeChainSimulator::plan() const { return impl_->plan; }

double ApeChainSimulator::hop_loss() const { return impl_->mu; }

SweepResult estimate_ape(const ApeParams& params, const ChainTopology& topology,
                         const RgsParams& rgs, std::uint64_t target_successes,
                         std::uint64_t max_iterations, std::uint64_t seed,
                         ApeSimOptions options, const TrialSink& sink) {
  if (max_iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  ApeChainSimulator sim(params, topology, rgs, seed, options);
  RunningStats fid;
  std::uint64_t i = 0;
  while (i < max_iterations && fid.count() < target_successes) {
    const auto o = sim.run_iteration();
    if (o.success) fid.add(*o.fidelity);
    if (sink)
      sink({i, o.success, o.duration_ps, o.fidelity, o.frame_x, o.frame_z});
    ++i;
  }
  SweepResult r;
  r.iterations = i;
  r.successes = fid.count();
  r.censored = r.successes < target_successes;
  const double nn = static_cast<double>(i);
  r.success_prob = static_cast<double>(r.successes) / nn;
  r.success_prob_sem = std::sqrt(r.success_prob * (1.0 - r.success_prob) / nn);
  const double t = t_rgs(rgs, params);
  const double norm = 1.0 / (t * mq_e(topology, t, rgs.m));
  r.egr_hz = r.success_prob * norm;
  r.egr_sem = r.success_prob_sem * norm;
  if (r.successes > 0) {
    r.fidelity = fid.mean();
    r.fidelity_sem = fid.sem();
  }
  return r;
}

}  // namespace qrsim::sim
