#include "qrsim/pair_state.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qrsim {

double werner_weight(double fidelity) { return 1.0 - 4.0 / 3.0 * (1.0 - fidelity); }

CorrelatedPairState heg_state(double w_em, double theta_i, double theta_j) {
  if (!(w_em >= 0.0 && w_em <= 1.0)) throw std::domain_error("w_em must lie in [0,1]");
  return {w_em * w_em, 1.0, theta_i + theta_j};
}

CorrelatedPairState compose_dbsm(const CorrelatedPairState& left,
                                 const CorrelatedPairState& right, double w_ms) {
  if (!(w_ms >= 0.0 && w_ms <= 1.0)) throw std::domain_error("w_ms must lie in [0,1]");
  return {left.w * right.w, w_ms * left.lam * right.lam,
          left.phi + right.phi - std::numbers::pi / 2.0};
}

CorrelatedPairState chain_state(int n, double w_em, double w_ms,
                                std::span<const double> thetas) {
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  if (thetas.size() != static_cast<std::size_t>(2 * n + 2))
    throw std::invalid_argument("chain_state needs 2n+2 thetas, got " +
                                std::to_string(thetas.size()));
  double theta_tot = 0.0;
  for (double t : thetas) theta_tot += t;
  return {std::pow(w_em, 2 * n + 2), std::pow(w_ms, n),
          theta_tot - n * std::numbers::pi / 2.0};
}

double fidelity(const CorrelatedPairState& s, int n) {
  const double f = 0.25 + s.w * s.lam * s.lam / 4.0 +
                   s.w * s.lam / 2.0 * std::cos(s.phi + n * std::numbers::pi / 2.0);
  constexpr double slack = 1e-12;
  if (!(f >= -slack && f <= 1.0 + slack))
    throw std::logic_error("fidelity outside [0,1]: " + std::to_string(f));
  return f;
}

double parity_flip_probability(double e, int n) {
  return (1.0 - std::pow(1.0 - 2.0 * e, n)) / 2.0;
}

PauliErrorRates compose_pauli_errors(double e_flip_per_round, int n) {
  if (!(e_flip_per_round >= 0.0 && e_flip_per_round <= 0.5))
    throw std::domain_error("per-round flip probability must lie in [0,1/2]");
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  const double q = std::pow(1.0 - 2.0 * e_flip_per_round, n);
  const double keep = (1.0 + q) / 2.0;
  const double flip = (1.0 - q) / 2.0;
  return {keep * flip, flip * flip, keep * flip};
}

}  // namespace qrsim
