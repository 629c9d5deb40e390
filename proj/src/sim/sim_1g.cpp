#include "qrsim/sim/sim_1g.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace qrsim::sim {

HegResult run_heg(double mu, int h_max, RngStream& rng) {
  for (int h = 1; h <= h_max; ++h) {
    const bool left = rng.bernoulli(1.0 - mu);
    const bool right = rng.bernoulli(1.0 - mu);
    if (left && right && rng.bernoulli(0.5)) return {true, h};
  }
  return {false, h_max};
}

namespace {

enum class Kind : std::uint8_t {
  start,           // controller: begin iteration
  tick,            // BSM node: start attempt
  clock_arrive,    // ion node: clock signal, emit after processing time
  photon,          // BSM node: photon from one side
  herald,          // ion node: BSM outcome announced
  corrected,       // ion node: Pauli correction finished
  link_ready,      // controller
  link_failed,     // controller
  dbsm_start,      // repeater node
  dbsm_done,       // repeater node
  outcome,         // end node: DBSM outcome bits from one repeater
  frame_corrected, // end node
  frame_done,      // controller
};

struct Msg {
  Kind kind = Kind::start;
  int link = 0;
  int attempt = 0;
  int side = 0;  // 0 = left ion of the link, 1 = right ion
  std::uint8_t bits = 0;
};

}  // namespace

struct IonChainSimulator::Impl {
  TrappedIonParams p;
  ChainTopology topo;
  Protocol protocol;
  int n;
  double mu;

  SimTime half_seg_ps;   // node <-> BSM node
  SimTime proc_ps;       // ion-side part of one attempt
  SimTime t1q_ps, tms_ps, tmeas_ps;
  std::vector<SimTime> notify_left_ps, notify_right_ps;  // per repeater position

  Engine<Msg> engine;
  std::vector<RngStream> rng;  // one per node
  std::vector<IonQubit> ion;
  std::vector<EmissionWindow> emission_log;
  bool log_emissions = false;

  // Iteration state.
  bool finished = false;
  bool success = false;
  int step = 0;
  int pending_links = 0;
  int frames_done = 0;
  std::vector<int> attempts;
  std::vector<std::array<bool, 2>> arrived, survived;
  std::vector<int> outcomes_seen;  // per end node (0: Q1, 1: Q2)
  std::vector<std::uint8_t> frame_bits;
  std::vector<SimTime> waits;
  std::vector<double> thetas;
  TwoStepSchedule sched;

  // Node ids: ion nodes 0..n+1 by position, BSM nodes n+2..2n+2 (link 1..n+1),
  // controller 2n+3.
  NodeId bsm_node(int link) const { return static_cast<NodeId>(n + 1 + link); }
  NodeId controller() const { return static_cast<NodeId>(2 * n + 3); }
  int left_ion(int link) const { return 2 * link - 2; }
  int right_ion(int link) const { return 2 * link - 1; }

  Impl(const TrappedIonParams& params, const ChainTopology& t, Protocol pr, std::uint64_t seed)
      : p(params), topo(t), protocol(pr), n(t.n_repeaters), mu(ion_hop_loss(params, t)) {
    p.validate();
    topo.validate();
    const IonTiming timing = ion_timing(p, topo);
    const double seg = topo.segment_length_km();
    half_seg_ps = to_ps(topo.flight_time_s(seg / 2.0));
    proc_ps = to_ps(timing.t_attempt_s) - 2 * half_seg_ps;
    if (proc_ps < 0)
      throw std::invalid_argument("t_attempt_s is shorter than the photon round trip");
    t1q_ps = to_ps(p.t_1q_s);
    tms_ps = to_ps(p.t_ms_s);
    tmeas_ps = to_ps(p.t_meas_s);
    notify_left_ps.assign(n + 2, 0);
    notify_right_ps.assign(n + 2, 0);
    for (int j = 1; j <= n; ++j) {
      notify_left_ps[j] = to_ps(topo.flight_time_s(j * seg));
      notify_right_ps[j] = to_ps(topo.flight_time_s((n + 1 - j) * seg));
    }

    const int nodes = 2 * n + 4;
    for (int id = 0; id < nodes; ++id) {
      rng.emplace_back(seed, static_cast<std::uint64_t>(id));
      engine.add_node([this, id](const Event<Msg>& ev) { dispatch(id, ev.payload); });
    }
    ion.resize(2 * n + 2);
    for (int link = 1; link <= n + 1; ++link) {
      auto& l = ion[left_ion(link)];
      auto& r = ion[right_ion(link)];
      l.node = link - 1;
      r.node = link;
      l.role = link == 1 ? IonRole::end : IonRole::repeater_b;
      r.role = link == n + 1 ? IonRole::end : IonRole::repeater_a;
      l.partner = right_ion(link);
      r.partner = left_ion(link);
    }
    sched = TwoStepSchedule::for_chain(n);
  }

  void dispatch(int id, const Msg& m) {
    if (id == static_cast<int>(controller())) {
      on_controller(m);
    } else if (id > n + 1) {
      on_bsm(id - (n + 1), m);
    } else {
      on_ion_node(id, m);
    }
  }

  void begin_link(int link) {
    engine.schedule(engine.now(), bsm_node(link), Msg{Kind::tick, link, 1, 0, 0});
  }

  void start_dbsm() {
    if (n == 0) {
      // No swap: the link is the end-to-end pair.
      for (int i = 0; i < 2; ++i) close_wait(i, 0);
      finish(true);
      return;
    }
    for (int j = 1; j <= n; ++j)
      engine.schedule(engine.now(), static_cast<NodeId>(j), Msg{Kind::dbsm_start});
  }

  void finish(bool ok) {
    finished = true;
    success = ok;
    engine.cancel_all();
  }

  // Ends an ion's storage interval and draws its dephasing angle.
  void close_wait(int ion_idx, int node) {
    const SimTime w = engine.now() - *ion[ion_idx].entangled_since_ps;
    waits[ion_idx] = w;
    const double sigma = 2.0 * to_seconds(w) / p.tau_coherence_s;
    thetas[ion_idx] = rng[node].normal(sigma);
  }

  void on_controller(const Msg& m) {
    switch (m.kind) {
      case Kind::start:
        if (protocol == Protocol::two_step) {
          step = 1;
          pending_links = static_cast<int>(sched.odd_links.size());
          for (int link : sched.odd_links) begin_link(link);
        } else {
          begin_link(1);
        }
        break;
      case Kind::link_ready:
        if (protocol == Protocol::two_step) {
          if (--pending_links > 0) break;
          if (step == 1 && !sched.even_links.empty()) {
            step = 2;
            pending_links = static_cast<int>(sched.even_links.size());
            for (int link : sched.even_links) begin_link(link);
          } else {
            start_dbsm();
          }
        } else {
          if (m.link < n + 1) {
            begin_link(m.link + 1);
          } else {
            start_dbsm();
          }
        }
        break;
      case Kind::link_failed:
        finish(false);
        break;
      case Kind::frame_done:
        if (++frames_done == 2) finish(true);
        break;
      default:
        throw std::logic_error("controller: unexpected message");
    }
  }

  void on_bsm(int link, const Msg& m) {
    const NodeId self = bsm_node(link);
    switch (m.kind) {
      case Kind::tick: {
        attempts[link - 1] = m.attempt;
        arrived[link - 1] = {false, false};
        for (int side = 0; side < 2; ++side) {
          const int node = side == 0 ? link - 1 : link;
          engine.schedule_in(half_seg_ps, static_cast<NodeId>(node),
                             Msg{Kind::clock_arrive, link, m.attempt, side, 0});
        }
        break;
      }
      case Kind::photon: {
        auto& rs = rng[self];
        arrived[link - 1][m.side] = true;
        survived[link - 1][m.side] = rs.bernoulli(1.0 - mu);
        if (!(arrived[link - 1][0] && arrived[link - 1][1])) break;
        const bool ok =
            survived[link - 1][0] && survived[link - 1][1] && rs.bernoulli(0.5);
        if (ok) {
          ion[left_ion(link)].entangled_since_ps = engine.now();
          ion[right_ion(link)].entangled_since_ps = engine.now();
          engine.schedule_in(half_seg_ps, static_cast<NodeId>(link - 1),
                             Msg{Kind::herald, link, m.attempt, 0, 0});
          engine.schedule_in(half_seg_ps, static_cast<NodeId>(link),
                             Msg{Kind::herald, link, m.attempt, 1, 0});
        } else if (m.attempt < p.h_max) {
          engine.schedule(engine.now(), self, Msg{Kind::tick, link, m.attempt + 1, 0, 0});
        } else {
          engine.schedule(engine.now(), controller(), Msg{Kind::link_failed, link});
        }
        break;
      }
      default:
        throw std::logic_error("BSM node: unexpected message");
    }
  }

  void on_ion_node(int pos, const Msg& m) {
    const NodeId self = static_cast<NodeId>(pos);
    switch (m.kind) {
      case Kind::clock_arrive: {
        const int idx = m.side == 0 ? left_ion(m.link) : right_ion(m.link);
        if (log_emissions)
          emission_log.push_back({idx, engine.now(), engine.now() + proc_ps});
        engine.schedule_in(proc_ps + half_seg_ps, bsm_node(m.link),
                           Msg{Kind::photon, m.link, m.attempt, m.side, 0});
        break;
      }
      case Kind::herald:
        // The right-hand ion applies the Pauli correction.
        if (m.side == 1) engine.schedule_in(t1q_ps, self, Msg{Kind::corrected, m.link});
        break;
      case Kind::corrected:
        engine.schedule(engine.now(), controller(), Msg{Kind::link_ready, m.link});
        break;
      case Kind::dbsm_start:
        close_wait(2 * pos - 1, pos);
        close_wait(2 * pos, pos);
        engine.schedule_in(tms_ps + tmeas_ps, self, Msg{Kind::dbsm_done});
        break;
      case Kind::dbsm_done: {
        const auto bits = static_cast<std::uint8_t>(rng[self].uniform_int(4));
        engine.schedule_in(notify_left_ps[pos], 0, Msg{Kind::outcome, 0, 0, 0, bits});
        engine.schedule_in(notify_right_ps[pos], static_cast<NodeId>(n + 1),
                           Msg{Kind::outcome, 0, 0, 0, bits});
        break;
      }
      case Kind::outcome: {
        const int end = pos == 0 ? 0 : 1;
        frame_bits[end] ^= m.bits;
        if (++outcomes_seen[end] == n)
          engine.schedule_in(t1q_ps, self, Msg{Kind::frame_corrected});
        break;
      }
      case Kind::frame_corrected:
        close_wait(pos == 0 ? 0 : 2 * n + 1, pos);
        engine.schedule(engine.now(), controller(), Msg{Kind::frame_done});
        break;
      default:
        throw std::logic_error("ion node: unexpected message");
    }
  }

  IonTrialOutcome run() {
    const int links = n + 1;
    finished = false;
    success = false;
    step = 0;
    pending_links = 0;
    frames_done = 0;
    attempts.assign(links, 0);
    arrived.assign(links, {false, false});
    survived.assign(links, {false, false});
    outcomes_seen.assign(2, 0);
    frame_bits.assign(2, 0);
    waits.assign(2 * n + 2, 0);
    thetas.assign(2 * n + 2, 0.0);
    for (auto& q : ion) q.entangled_since_ps.reset();

    const SimTime t0 = engine.now();
    engine.schedule(t0, controller(), Msg{Kind::start});
    engine.run_until([this] { return finished; });

    IonTrialOutcome out;
    out.success = success;
    out.duration_ps = engine.now() - t0;
    out.attempts = attempts;
    if (success) {
      out.waits_ps = waits;
      out.thetas = thetas;
      out.state = chain_state(n, p.w_em(), p.w_ms(), thetas);
      // Depolarizing noise of the two end-node frame corrections.
      out.state.w *= (1.0 - p.p_1q()) * (1.0 - p.p_1q());
      out.fidelity = fidelity(out.state, n);
      out.frame_x = (frame_bits[0] & 1) != 0;
      out.frame_z = (frame_bits[0] & 2) != 0;
    }
    return out;
  }
};

IonChainSimulator::IonChainSimulator(const TrappedIonParams& params,
                                     const ChainTopology& topology, Protocol protocol,
                                     std::uint64_t seed)
    : impl_(std::make_unique<Impl>(params, topology, protocol, seed)) {}

IonChainSimulator::~IonChainSimulator() = default;

IonTrialOutcome IonChainSimulator::run_iteration() { return impl_->run(); }

void IonChainSimulator::record_emissions(bool on) { impl_->log_emissions = on; }

const std::vector<EmissionWindow>& IonChainSimulator::emissions() const {
  return impl_->emission_log;
}

const std::vector<IonQubit>& IonChainSimulator::ions() const { return impl_->ion; }

SimTime IonChainSimulator::now() const { return impl_->engine.now(); }

SweepResult estimate_1g(const TrappedIonParams& params, const ChainTopology& topology,
                        Protocol protocol, std::uint64_t iterations, std::uint64_t seed,
                        const TrialSink& sink) {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  IonChainSimulator sim(params, topology, protocol, seed);
  RateEstimator rate;
  RunningStats fid;
  SweepResult r;
  for (std::uint64_t i = 0; i < iterations; ++i) {
    const auto o = sim.run_iteration();
    rate.add(o.success, to_seconds(o.duration_ps));
    if (o.success) fid.add(*o.fidelity);
    if (sink) sink({i, o.success, o.duration_ps, o.fidelity, o.frame_x, o.frame_z});
  }
  r.iterations = iterations;
  r.successes = fid.count();
  r.total_time_s = rate.total_time_s();
  r.egr_hz = rate.rate();
  r.egr_sem = rate.sem();
  r.success_prob = static_cast<double>(r.successes) / static_cast<double>(iterations);
  r.success_prob_sem =
      std::sqrt(r.success_prob * (1.0 - r.success_prob) / static_cast<double>(iterations));
  if (r.successes > 0) {
    r.fidelity = fid.mean();
    r.fidelity_sem = fid.sem();
  }
  return r;
}

}  // namespace qrsim::sim
