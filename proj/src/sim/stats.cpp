#include "qrsim/sim/stats.hpp"

#include <cmath>

#include <json.hpp>

namespace qrsim::sim {

void RunningStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double RunningStats::variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningStats::sem() const {
  return n_ == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

void RateEstimator::add(bool success, double duration_s) {
  const double s = success ? 1.0 : 0.0;
  ++n_;
  sum_s_ += s;
  sum_d_ += duration_s;
  sum_ss_ += s * s;
  sum_dd_ += duration_s * duration_s;
  sum_sd_ += s * duration_s;
}

double RateEstimator::rate() const { return sum_d_ > 0.0 ? sum_s_ / sum_d_ : 0.0; }

double RateEstimator::sem() const {
  if (n_ < 2 || sum_d_ <= 0.0) return 0.0;
  const double r = rate();
  // Residuals s_i - r d_i sum to zero; their spread drives the ratio's variance.
  const double rss = sum_ss_ - 2.0 * r * sum_sd_ + r * r * sum_dd_;
  const double n = static_cast<double>(n_);
  return std::sqrt(std::max(rss, 0.0) * n / (n - 1.0)) / sum_d_;
}

void write_trial_jsonl(std::ostream& os, const TrialRecord& r) {
  nlohmann::ordered_json j;
  j["iteration"] = r.iteration;
  j["outcome"] = r.success ? "success" : "failure";
  j["duration_ps"] = r.duration_ps;
  if (r.fidelity) j["fidelity"] = *r.fidelity;
  j["frame"] = {{"x", r.frame_x}, {"z", r.frame_z}};
  os << j.dump() << '\n';
}

}  // namespace qrsim::sim
