#include <doctest.h>

#include <cmath>

#include "qrsim/model_params.hpp"

using namespace qrsim;

TEST_SUITE("model_params") {
  TEST_CASE("channel loss") {
    ChainTopology t;
    t.attenuation_length_km = 22.0;
    CHECK(channel_loss(0.0, t) == 0.0);
    CHECK(channel_loss(22.0, t) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
    const long double ref = 1.0L - std::exp(-25.0L / 22.0L);
    CHECK(std::abs(channel_loss(25.0, t) - static_cast<double>(ref)) < 1e-15);
    CHECK_THROWS_AS(channel_loss(-1.0, t), std::domain_error);
  }

  TEST_CASE("attenuation encodings round trip") {
    ChainTopology t;
    t.set_attenuation_db_per_km(0.2);
    CHECK(t.attenuation_length_km == doctest::Approx(10.0 / (0.2 * std::log(10.0))));
    CHECK(t.attenuation_db_per_km() == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(db_per_km_from_attenuation_length(attenuation_length_from_db(0.3)) ==
          doctest::Approx(0.3).epsilon(1e-14));
  }

  TEST_CASE("segment geometry") {
    ChainTopology t;
    t.chain_length_km = 50.0;
    t.n_repeaters = 4;
    CHECK(t.segment_length_km() == 10.0);
    CHECK(t.node_to_bsm_km() == 5.0);
    CHECK(t.flight_time_s(10.0) == doctest::Approx(5e-5));
  }

  TEST_CASE("1G loss budget") {
    ChainTopology t;
    TrappedIonParams p;
    p.eta_coll = p.eta_qfc = p.eta_det = 1.0;
    CHECK(total_loss_1g(p, 0.0, t) == 0.0);
    CHECK(total_loss_1g(p, 22.0, t) == doctest::Approx(1.0 - std::exp(-1.0)));
    TrappedIonParams q;
    const long double ref = 1.0L - 0.69L * 0.3L * 0.75L;
    CHECK(std::abs(total_loss_1g(q, 0.0, t) - static_cast<double>(ref)) < 1e-15);
    CHECK(total_loss_1g(q, 0.0, t) == doctest::Approx(0.84475));
  }

  TEST_CASE("APE loss budget") {
    ChainTopology t;
    ApeParams p;
    p.eta_qfc = 1.0;
    p.p_single_mode = 1.0;
    CHECK(total_loss_ape(p, 0.0, t) == 0.0);
    ApeParams q;
    CHECK(total_loss_ape(q, 0.0, t) == doctest::Approx(1.0 - 0.95 * 0.997).epsilon(1e-14));
    CHECK(total_loss_ape(q, 22.0, t) ==
          doctest::Approx(1.0 - 0.95 * 0.997 * std::exp(-1.0)).epsilon(1e-14));
    const auto b = loss_budget_ape(q, 22.0, t);
    CHECK(b.total() == total_loss_ape(q, 22.0, t));
  }

  TEST_CASE("RGS photon counts") {
    CHECK(RgsParams{6, 6, 3}.photon_count() == 300);
    CHECK(RgsParams{1, 25, 1}.photon_count() == 102);
    CHECK(RgsParams{5, 4, 2}.photon_count() == 130);
    CHECK(RgsParams{7, 8, 4}.photon_count() == 574);
    CHECK(RgsParams{8, 11, 4}.photon_count() == 896);
    CHECK(RgsParams{1, 1, 1}.photon_count() == 6);
  }

  TEST_CASE("validation names the field") {
    ChainTopology t;
    t.chain_length_km = -1.0;
    try {
      t.validate();
      FAIL("expected InvalidParameter");
    } catch (const InvalidParameter& e) {
      CHECK(e.field() == "chain_length_km");
    }
    TrappedIonParams p;
    p.h_max = 0;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p = TrappedIonParams{};
    p.f_em_trap = 0.2;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    ApeParams a;
    a.eta_qfc = 1.5;
    CHECK_THROWS_AS(a.validate(), InvalidParameter);
    CHECK_THROWS_AS((RgsParams{0, 1, 1}.validate()), InvalidParameter);
    CHECK_NOTHROW(TrappedIonParams{}.validate());
    CHECK_NOTHROW(ApeParams{}.validate());
  }

  TEST_CASE("derived ion weights") {
    TrappedIonParams p;
    CHECK(p.w_em() == doctest::Approx(1.0 - 4.0 / 3.0 * 0.04));
    CHECK(p.w_ms() == doctest::Approx(0.999));
    p.p_ms = 0.01;
    CHECK(p.w_ms() == doctest::Approx(0.99));
  }
}
