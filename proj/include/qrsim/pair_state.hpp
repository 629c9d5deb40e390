// Three-parameter two-qubit state family closed under DBSM composition, and
// Pauli error composition for the photonic chain.
#pragma once

#include <span>

namespace qrsim {

// rho(w, lam, phi) = I/4 + (w/4)[lam cos(phi)(XX-YY) + lam sin(phi)(XY+YX) + lam^2 ZZ]
struct CorrelatedPairState {
  double w = 1.0;
  double lam = 1.0;
  double phi = 0.0;
};

struct PauliErrorRates {
  double e_x = 0.0;
  double e_y = 0.0;
  double e_z = 0.0;

  double fidelity() const { return 1.0 - e_x - e_y - e_z; }
};

// Werner weight of an ion-photon pair with fidelity f.
double werner_weight(double fidelity);

CorrelatedPairState heg_state(double w_em, double theta_i, double theta_j);

// Entanglement swap of left=(i,j) and right=(k,l) by an MS gate on (j,k) with
// per-ion depolarization; w_ms = 1 - p_ms. Result is the (0,0) outcome branch.
CorrelatedPairState compose_dbsm(const CorrelatedPairState& left,
                                 const CorrelatedPairState& right, double w_ms);

// End-to-end state after n swaps; thetas holds one dephasing angle per ion.
CorrelatedPairState chain_state(int n, double w_em, double w_ms, std::span<const double> thetas);

// Overlap with (|00> + e^{-i n pi/2}|11>)/sqrt(2). Throws std::logic_error if
// the result leaves [0,1] by more than rounding.
double fidelity(const CorrelatedPairState& s, int n);

// Net error rates after n rounds with per-round logical flip probability e
// on each of the X and Z stabilizer parities.
PauliErrorRates compose_pauli_errors(double e_flip_per_round, int n);

// Probability that an odd number of n independent flips with probability e occurs.
double parity_flip_probability(double e, int n);

}  // namespace qrsim
