// Per-node random streams split from one master seed.
#pragma once

#include <cstdint>
#include <random>

namespace qrsim::sim {

// SplitMix64 finalizer over the pair; used for stream and per-point seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t bits() { return engine_(); }
  double uniform();  // [0, 1), 53-bit resolution
  bool bernoulli(double p) { return uniform() < p; }
  double normal(double sd);  // Box-Muller; platform independent
  int uniform_int(int n);    // [0, n)

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qrsim::sim
