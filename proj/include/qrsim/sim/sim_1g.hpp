// Protocol-level Monte Carlo of the trapped-ion chain: clock-assisted HEG with
// retries, two-step (centralized) or hop-by-hop control, DBSM and frame
// correction, with per-ion Gaussian dephasing.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "qrsim/model_params.hpp"
#include "qrsim/pair_state.hpp"
#include "qrsim/sim/engine.hpp"
#include "qrsim/sim/rng.hpp"
#include "qrsim/sim/stats.hpp"
#include "qrsim/theory_1g.hpp"

namespace qrsim::sim {

struct HegResult {
  bool success = false;
  int attempts = 0;  // attempts used; h_max on failure
};

// One HEG session outside the event engine: per attempt two photon survivals
// (1-mu each) and a 1/2 coin when both arrive.
HegResult run_heg(double mu, int h_max, RngStream& rng);

enum class IonRole { end, repeater_a, repeater_b };

struct IonQubit {
  int node = 0;
  IonRole role = IonRole::end;
  std::optional<SimTime> entangled_since_ps;
  int partner = -1;
};

struct EmissionWindow {
  int ion = 0;
  SimTime start = 0;
  SimTime end = 0;
};

struct IonTrialOutcome {
  bool success = false;
  SimTime duration_ps = 0;
  std::vector<int> attempts;       // per link (index link-1); 0 if never started
  std::vector<SimTime> waits_ps;   // per ion, filled on success
  std::vector<double> thetas;      // per ion, filled on success
  CorrelatedPairState state;
  std::optional<double> fidelity;
  bool frame_x = false;
  bool frame_z = false;
};

class IonChainSimulator {
 public:
  // Throws std::invalid_argument if T_attempt is shorter than the photon round trip.
  IonChainSimulator(const TrappedIonParams& params, const ChainTopology& topology,
                    Protocol protocol, std::uint64_t seed);
  ~IonChainSimulator();
  IonChainSimulator(const IonChainSimulator&) = delete;
  IonChainSimulator& operator=(const IonChainSimulator&) = delete;

  IonTrialOutcome run_iteration();

  void record_emissions(bool on);
  const std::vector<EmissionWindow>& emissions() const;
  const std::vector<IonQubit>& ions() const;
  SimTime now() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SweepResult estimate_1g(const TrappedIonParams& params, const ChainTopology& topology,
                        Protocol protocol, std::uint64_t iterations, std::uint64_t seed,
                        const TrialSink& sink = {});

}  // namespace qrsim::sim
