// Estimators shared by both simulators, and the per-iteration trial record.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>

#include "qrsim/sim/engine.hpp"

namespace qrsim::sim {

// Welford accumulator; sem() is sample sd / sqrt(count).
class RunningStats {
 public:
  void add(double x);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // sample variance (n-1)
  double sem() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Successes per unit time from (success, duration) pairs, with a delta-method
// standard error for the ratio of sums.
class RateEstimator {
 public:
  void add(bool success, double duration_s);
  double rate() const;
  double sem() const;
  double total_time_s() const { return sum_d_; }
  std::uint64_t count() const { return n_; }

 private:
  std::uint64_t n_ = 0;
  double sum_s_ = 0.0, sum_d_ = 0.0, sum_ss_ = 0.0, sum_dd_ = 0.0, sum_sd_ = 0.0;
};

struct SweepResult {
  std::uint64_t iterations = 0;
  std::uint64_t successes = 0;
  double total_time_s = 0.0;
  double egr_hz = 0.0;
  double egr_sem = 0.0;
  double success_prob = 0.0;
  double success_prob_sem = 0.0;
  std::optional<double> fidelity;
  std::optional<double> fidelity_sem;
  bool censored = false;
};

struct TrialRecord {
  std::uint64_t iteration = 0;
  bool success = false;
  SimTime duration_ps = 0;
  std::optional<double> fidelity;
  bool frame_x = false;
  bool frame_z = false;
};

using TrialSink = std::function<void(const TrialRecord&)>;

// One JSON object per line: {iteration, outcome, duration_ps, fidelity?, frame}.
void write_trial_jsonl(std::ostream& os, const TrialRecord& r);

}  // namespace qrsim::sim
