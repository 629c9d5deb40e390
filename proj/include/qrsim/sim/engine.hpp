// Discrete-event core: integer-picosecond clock, (time, seq)-ordered queue,
// channels with propagation delay.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrsim::sim {

using SimTime = std::int64_t;  // picoseconds
using NodeId = std::uint32_t;

inline SimTime to_ps(double seconds) { return std::llround(seconds * 1e12); }
inline double to_seconds(SimTime ps) { return static_cast<double>(ps) * 1e-12; }

class CausalityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class StarvationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Msg>
struct Event {
  SimTime fire_time = 0;
  std::uint64_t seq = 0;
  NodeId target = 0;
  Msg payload{};
};

enum class ChannelKind { quantum, classical };

struct Channel {
  NodeId src = 0;
  NodeId dst = 0;
  SimTime delay = 0;
  ChannelKind kind = ChannelKind::classical;
  double loss = 0.0;  // quantum only; consulted by the receiver at delivery
};

template <class Msg>
class Engine {
 public:
  using Handler = std::function<void(const Event<Msg>&)>;

  NodeId add_node(Handler h) {
    handlers_.push_back(std::move(h));
    return static_cast<NodeId>(handlers_.size() - 1);
  }
  void set_handler(NodeId id, Handler h) { handlers_.at(id) = std::move(h); }
  std::size_t node_count() const { return handlers_.size(); }

  SimTime now() const { return now_; }
  std::size_t pending() const { return queue_.size(); }

  void schedule(SimTime at, NodeId target, Msg msg) {
    if (at < now_)
      throw CausalityError("event scheduled at " + std::to_string(at) + " ps before now " +
                           std::to_string(now_) + " ps");
    if (target >= handlers_.size()) throw std::out_of_range("unknown target node");
    queue_.push(Event<Msg>{at, next_seq_++, target, std::move(msg)});
  }
  void schedule_in(SimTime delay, NodeId target, Msg msg) {
    schedule(now_ + delay, target, std::move(msg));
  }
  void send(const Channel& ch, Msg msg) { schedule_in(ch.delay, ch.dst, std::move(msg)); }

  // Pops and dispatches one event; false if the queue is empty.
  bool step() {
    if (queue_.empty()) return false;
    Event<Msg> ev = queue_.top();
    queue_.pop();
    now_ = ev.fire_time;
    ++processed_;
    handlers_[ev.target](ev);
    return true;
  }

  // Processes every event with fire_time <= t, then advances the clock to t.
  SimTime run_until_time(SimTime t) {
    if (t < now_) throw CausalityError("run_until_time into the past");
    while (!queue_.empty() && queue_.top().fire_time <= t) step();
    now_ = t;
    return now_;
  }

  template <class Pred>
  SimTime run_until(Pred done) {
    while (!done()) {
      if (queue_.empty())
        throw StarvationError("event queue empty at " + std::to_string(now_) +
                              " ps before the stop condition held (" +
                              std::to_string(processed_) + " events processed)");
      step();
    }
    return now_;
  }

  // Drops all pending events (iteration abort). The clock is unchanged.
  void cancel_all() { queue_ = Queue(); }

  std::uint64_t processed() const { return processed_; }

 private:
  struct Later {
    bool operator()(const Event<Msg>& a, const Event<Msg>& b) const {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.seq > b.seq;
    }
  };
  using Queue = std::priority_queue<Event<Msg>, std::vector<Event<Msg>>, Later>;

  std::vector<Handler> handlers_;
  Queue queue_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
};

}  // namespace qrsim::sim
