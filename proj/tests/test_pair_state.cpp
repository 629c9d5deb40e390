#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qrsim/pair_state.hpp"

using namespace qrsim;
constexpr double kPi = std::numbers::pi;

namespace {

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

TEST_SUITE("pair_state") {
  TEST_CASE("HEG state") {
    const auto s = heg_state(1.0, 0.0, 0.0);
    CHECK(s.w == 1.0);
    CHECK(s.lam == 1.0);
    CHECK(s.phi == 0.0);
    const long double w_em = 1.0L - 4.0L / 3.0L * (1.0L - 0.96L);
    CHECK(heg_state(werner_weight(0.96), 0.0, 0.0).w ==
          doctest::Approx(static_cast<double>(w_em * w_em)).epsilon(1e-15));
    CHECK(heg_state(1.0, kPi / 4, -kPi / 4).phi == doctest::Approx(0.0));
  }

  TEST_CASE("DBSM composition rule") {
    const auto r = compose_dbsm({1, 1, 0}, {1, 1, kPi / 2}, 1.0);
    CHECK(r.w == 1.0);
    CHECK(r.lam == 1.0);
    CHECK(r.phi == doctest::Approx(0.0));
  }

  TEST_CASE("DBSM matches the dense 16x16 oracle") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u01(0.0, 1.0), ang(-kPi, kPi);
    for (int draw = 0; draw < 25; ++draw) {
      const CorrelatedPairState a{u01(gen), u01(gen), ang(gen)};
      const CorrelatedPairState b{u01(gen), u01(gen), ang(gen)};
      const double p_ms = 0.2 * u01(gen);
      const auto c = compose_dbsm(a, b, 1.0 - p_ms);
      const auto dense = oracle::dense_dbsm(oracle::pair_matrix(a.w, a.lam, a.phi),
                                            oracle::pair_matrix(b.w, b.lam, b.phi), p_ms);
      const auto closed = oracle::pair_matrix(c.w, c.lam, c.phi);
      CHECK((dense - closed).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("DBSM of default-parameter HEG pairs") {
    const double w_em = werner_weight(0.96);
    const auto a = heg_state(w_em, 0.01, -0.02);
    const auto b = heg_state(w_em, 0.03, 0.005);
    const auto c = compose_dbsm(a, b, 0.999);
    const auto dense = oracle::dense_dbsm(oracle::pair_matrix(a.w, a.lam, a.phi),
                                          oracle::pair_matrix(b.w, b.lam, b.phi), 0.001);
    CHECK((dense - oracle::pair_matrix(c.w, c.lam, c.phi)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("composition is associative") {
    const CorrelatedPairState a{0.9, 0.95, 0.3}, b{0.8, 0.99, -1.2}, c{0.7, 0.9, 2.5};
    const auto l = compose_dbsm(compose_dbsm(a, b, 0.98), c, 0.98);
    const auto r = compose_dbsm(a, compose_dbsm(b, c, 0.98), 0.98);
    CHECK(l.w == doctest::Approx(r.w).epsilon(1e-15));
    CHECK(l.lam == doctest::Approx(r.lam).epsilon(1e-15));
    CHECK(wrap(l.phi - r.phi) == doctest::Approx(0.0));
  }

  TEST_CASE("chain state") {
    const std::vector<double> zeros(4, 0.0);
    const auto s = chain_state(1, 1.0, 1.0, zeros);
    CHECK(s.w == 1.0);
    CHECK(s.lam == 1.0);
    CHECK(s.phi == doctest::Approx(-kPi / 2));
    const std::vector<double> two{0.1, 0.2};
    const auto h = heg_state(0.9, 0.1, 0.2);
    const auto z = chain_state(0, 0.9, 0.95, two);
    CHECK(z.w == h.w);
    CHECK(z.lam == h.lam);
    CHECK(z.phi == h.phi);
    CHECK_THROWS_AS(chain_state(2, 1.0, 1.0, two), std::invalid_argument);
  }

  TEST_CASE("chain state equals the left fold of DBSMs") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> th(0.0, 0.3);
    const int n = 3;
    std::vector<double> thetas(2 * n + 2);
    for (auto& t : thetas) t = th(gen);
    const double w_em = 0.93, w_ms = 0.995;
    auto fold = heg_state(w_em, thetas[0], thetas[1]);
    for (int j = 1; j <= n; ++j)
      fold = compose_dbsm(fold, heg_state(w_em, thetas[2 * j], thetas[2 * j + 1]), w_ms);
    const auto s = chain_state(n, w_em, w_ms, thetas);
    CHECK(s.w == doctest::Approx(fold.w).epsilon(1e-14));
    CHECK(s.lam == doctest::Approx(fold.lam).epsilon(1e-14));
    CHECK(wrap(s.phi - fold.phi) == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("fidelity") {
    CHECK(fidelity({1, 1, -kPi / 2}, 1) == doctest::Approx(1.0));
    CHECK(fidelity({0, 1, 0.3}, 2) == doctest::Approx(0.25));
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u01(0.0, 1.0), ang(-kPi, kPi);
    for (int draw = 0; draw < 50; ++draw) {
      const CorrelatedPairState s{u01(gen), u01(gen), ang(gen)};
      const int n = draw % 5;
      CHECK(fidelity(s, n) ==
            doctest::Approx(oracle::bell_overlap(oracle::pair_matrix(s.w, s.lam, s.phi), n))
                .epsilon(1e-12));
    }
  }

  TEST_CASE("Pauli error composition") {
    const auto zero = compose_pauli_errors(0.0, 5);
    CHECK(zero.e_x == 0.0);
    CHECK(zero.fidelity() == 1.0);
    const auto one = compose_pauli_errors(0.1, 1);
    CHECK(one.e_x == doctest::Approx(0.09));
    CHECK(one.e_y == doctest::Approx(0.01));
    CHECK(one.e_z == doctest::Approx(0.09));
    CHECK(one.fidelity() == doctest::Approx(0.81));
    const auto mixed = compose_pauli_errors(0.5, 3);
    CHECK(mixed.e_x == doctest::Approx(0.25));
    CHECK(mixed.fidelity() == doctest::Approx(0.25));
    CHECK_THROWS_AS(compose_pauli_errors(0.6, 1), std::domain_error);
  }

  TEST_CASE("Pauli composition matches flip enumeration") {
    // Each of n rounds independently flips the X-type and Z-type parity.
    for (int n = 1; n <= 6; ++n) {
      const double e = 0.07;
      double px = 0, py = 0, pz = 0;
      for (std::uint32_t mask = 0; mask < (1u << (2 * n)); ++mask) {
        double w = 1.0;
        bool a = false, b = false;
        for (int r = 0; r < n; ++r) {
          const bool fa = (mask >> (2 * r)) & 1, fb = (mask >> (2 * r + 1)) & 1;
          w *= (fa ? e : 1 - e) * (fb ? e : 1 - e);
          a ^= fa;
          b ^= fb;
        }
        if (a && b) py += w;
        else if (a) px += w;
        else if (b) pz += w;
      }
      const auto r = compose_pauli_errors(e, n);
      CHECK(r.e_x == doctest::Approx(px).epsilon(1e-13));
      CHECK(r.e_y == doctest::Approx(py).epsilon(1e-13));
      CHECK(r.e_z == doctest::Approx(pz).epsilon(1e-13));
      CHECK(parity_flip_probability(e, n) == doctest::Approx(px + py).epsilon(1e-13));
    }
  }
}
