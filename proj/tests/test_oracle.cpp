#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace afrelay;
using namespace testing_support;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("PTP oracle") {
  const PtpChannel one{DiagChannel{1.0}, DiagChannel{1.0}, 1.0, 1.0};
  const OracleResult r1 = brute_force_ptp(one, {1000, 7, false});
  CHECK(std::abs(r1.gap) <= 1e-9);
  CHECK_THAT(relay_output_power(one, r1.best_gain), WithinRel(1.0, 1e-12));

  const PtpChannel two{DiagChannel{1.0, 1.0}, DiagChannel{1.0, 1.0}, 1.0, 1.0};
  const OracleResult r2 = brute_force_ptp(two, {100000, 1, true});
  CHECK_THAT(r2.closed_form_value, WithinAbs(std::log(5.0 / 3.0), 1e-15));
  CHECK_THAT(std::expm1(r2.best_value), WithinAbs(2.0 / 3.0, 1e-6));
  CHECK(r2.gap >= -1e-9);

  const PtpChannel cut{DiagChannel{1.0, 0.0}, DiagChannel{0.0, 1.0}, 1.0, 1.0};
  const OracleResult r3 = brute_force_ptp(cut, {2000, 3, true});
  CHECK(r3.best_value == 0.0);
  CHECK(r3.closed_form_value == 0.0);

  NetFactory make(99);
  for (int trial = 0; trial < 10; ++trial) {
    const PtpChannel net = make.ptp(make.relays());
    const OracleResult r = brute_force_ptp(net, {20000, static_cast<std::uint64_t>(trial), true});
    CHECK(r.gap >= -1e-9);
    CHECK(r.gap <= 1e-4);
  }
}

TEST_CASE("MAC weighted oracle") {
  const MacChannel asym = asymmetric_mac();
  const OracleResult sum = brute_force_mac_weighted(asym, 1.0, 1.0, {100000, 0, true});
  CHECK_THAT(sum.closed_form_value, WithinAbs(std::log(35.0 / 17.0), 1e-12));
  CHECK_THAT(sum.best_value, WithinAbs(std::log(35.0 / 17.0), 1e-5));
  CHECK(sum.gap >= -1e-9);
  REQUIRE(sum.family.has_value());
  CHECK(sum.family->residual <= 1e-3);

  const OracleResult user1 = brute_force_mac_weighted(asym, 1.0, 0.0, {100000, 0, true});
  CHECK_THAT(user1.best_value, WithinAbs(mac_corner_rates(asym, 1).favored, 1e-5));
  CHECK(user1.gap >= -1e-9);

  NetFactory make(3);
  for (int trial = 0; trial < 5; ++trial) {
    const MacChannel net = make.mac(1);
    const OracleResult r = brute_force_mac_weighted(net, 0.3 + trial, 1.0, {50, 1, false});
    CHECK(std::abs(r.gap) <= 1e-9);
  }
  for (int trial = 0; trial < 6; ++trial) {
    const MacChannel net = make.mac(make.relays(2, 3));
    const OracleResult r = brute_force_mac_weighted(net, 1.0, 0.5 + trial * 0.4, {100000, 5, true});
    CHECK(r.gap >= -1e-9);
    CHECK(r.gap <= 1e-4);
  }

  CHECK_THROWS_AS(brute_force_mac_weighted(asym, -1.0, 1.0), InvalidArgumentError);
  CHECK_THROWS_AS(brute_force_mac_weighted(asym, 0.0, 0.0), InvalidArgumentError);
}

TEST_CASE("oracle is deterministic") {
  const MacChannel net{DiagChannel{0.4, -1.1, 0.9}, DiagChannel{1.3, 0.2, -0.6}, DiagChannel{0.8, 1.0, -1.4}, 1.5,
                       0.7, 2.0};
  const OracleConfig cfg{30000, 12345, true};
  const OracleResult a = brute_force_mac_weighted(net, 1.0, 2.0, cfg);
  const OracleResult b = brute_force_mac_weighted(net, 1.0, 2.0, cfg);
  CHECK(a.best_value == b.best_value);
  CHECK(a.best_gain == b.best_gain);
  CHECK(a.family->theta == b.family->theta);
  const OracleResult other = brute_force_mac_weighted(net, 1.0, 2.0, {30000, 54321, false});
  const OracleResult same_seed = brute_force_mac_weighted(net, 1.0, 2.0, {30000, 12345, false});
  CHECK_FALSE(other.best_gain == same_seed.best_gain);
}

TEST_CASE("stationarity of the closed-form optima") {
  const MacChannel asym = asymmetric_mac();
  const SumRateSolution s = mac_sum_capacity(asym);
  const RelayGain d11 = mac_gain_theta(asym, s.theta11).gain;
  CHECK(stationarity_check(asym, d11, 1.0, 1.0) <= 1e-5);
  const RelayGain d10 = mac_gain_theta(asym, M_PI / 2).gain;
  CHECK(stationarity_check(asym, d10, 1.0, 0.0) <= 1e-5);

  NetFactory make(17);
  for (int trial = 0; trial < 5; ++trial) {
    const MacChannel net = make.mac(3);
    const SumRateSolution opt = mac_sum_capacity(net);
    CHECK(stationarity_check(net, mac_gain_theta(net, opt.theta11).gain, 1.0, 1.0) <= 1e-5);
    // A random gain is only checked to give a finite, non-negative answer.
    const double off = stationarity_check(net, feasible_gain(make.direction(3), net), 1.0, 1.0);
    CHECK(std::isfinite(off));
    CHECK(off >= 0.0);
  }
  CHECK_THROWS_AS(stationarity_check(asym, d11, 0.0, 0.0), InvalidArgumentError);
  CHECK_THROWS_AS(stationarity_check(asym, RelayGain{0.0, 0.0}, 1.0, 1.0), DegenerateGainError);
}

TEST_CASE("chain evaluator on the all-ones network") {
  ThreeHopNetwork net;
  net.f1_bar = net.f2_bar = net.g_bar = Vector::Ones(1);
  net.h = Matrix::Ones(1, 1);
  net.blocks_a = net.blocks_b = {1};
  net.p1 = net.p2 = net.p_r1 = net.p_r2 = 1.0;
  const BlockGain a({Matrix::Constant(1, 1, 1.0)}), b({Matrix::Constant(1, 1, 3.0)});
  const DeltaReport chain = chain_deltas(net, a, b);
  CHECK_THAT(chain.delta_m, WithinRel(90.0, 1e-14));
  CHECK_THAT(chain.delta_b1, WithinRel(90.0, 1e-14));
  CHECK(chain.identity_residual <= 1e-15);
}
