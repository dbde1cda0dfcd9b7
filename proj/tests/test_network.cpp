#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ncs/errors.hpp"
#include "ncs/network.hpp"

using namespace ncs;

namespace {

DelayModel crane_delay() {
  DelayModel dm;
  dm.eta = 0.04;
  dm.phi = 0.01;
  dm.tau_max = 0.08;
  return dm;
}

}  // namespace

TEST_SUITE_BEGIN("network");

TEST_CASE("delay transform lower bound") {
  const auto dm = crane_delay();
  CHECK(delay_from_uniform(dm, 0.0) == doctest::Approx(dm.eta));
  CHECK(delay_from_uniform(dm, 0.5) > dm.eta);
}

TEST_CASE("delay moments match the shifted exponential") {
  // Moments are checked pre-truncation, so push tau_max out of the way.
  DelayModel dm = crane_delay();
  dm.tau_max = 1e9;

  Rng rng(2024);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double tau = sample_delay(dm, rng);
    sum += tau;
    sum_sq += tau * tau;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;

  CHECK(std::abs(mean - (dm.eta + dm.phi)) < 0.01 * (dm.eta + dm.phi));
  CHECK(std::abs(var - dm.phi * dm.phi) < 0.03 * dm.phi * dm.phi);
}

TEST_CASE("truncated draws stay inside the support and keep the shape") {
  const auto dm = crane_delay();
  Rng rng(77);
  const int n = 20000;
  std::vector<double> draws;
  draws.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double tau = sample_delay(dm, rng);
    CHECK(tau >= dm.eta);
    CHECK(tau <= dm.tau_max);
    draws.push_back(tau);
  }

  // Kolmogorov-Smirnov against the analytic truncated-exponential CDF.
  std::sort(draws.begin(), draws.end());
  const double z = 1.0 - std::exp(-(dm.tau_max - dm.eta) / dm.phi);
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf =
        (1.0 - std::exp(-(draws[static_cast<std::size_t>(i)] - dm.eta) /
                        dm.phi)) / z;
    ks = std::max(ks, std::abs(cdf - (i + 1.0) / n));
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
  }
  CHECK(ks < 0.02);
}

TEST_CASE("dropout sampling") {
  SUBCASE("never drops at p = 0") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) CHECK_FALSE(sample_dropout(0.0, rng));
  }
  SUBCASE("empirical rate at p = 0.3") {
    Rng rng(6);
    int drops = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
      if (sample_dropout(0.3, rng)) ++drops;
    CHECK(std::abs(drops / static_cast<double>(n) - 0.3) < 0.01);
  }
  SUBCASE("fixed seed reproduces the sequence") {
    Rng a(99), b(99);
    for (int i = 0; i < 500; ++i)
      CHECK(sample_dropout(0.4, a) == sample_dropout(0.4, b));
  }
  SUBCASE("probability one is out of contract") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_dropout(1.0, rng), std::invalid_argument);
  }
}

TEST_CASE("disorder guard") {
  TimingConfig tm;  // NT = 0.2
  DelayModel dm = crane_delay();

  dm.tau_max = 0.08;
  CHECK(disorder_guard_ok(dm, tm));
  dm.tau_max = 0.2;
  CHECK_FALSE(disorder_guard_ok(dm, tm));
  dm.tau_max = 0.25;
  CHECK_FALSE(disorder_guard_ok(dm, tm));
  CHECK_THROWS_AS(require_disorder_guard(dm, tm), DisorderGuardViolation);
}

TEST_CASE("longest dropout run") {
  const std::vector<bool> trace{false, true, true, false, true};
  CHECK(estimate_m(trace) == 2);

  const std::vector<bool> kept(10, false);
  CHECK(estimate_m(kept) == 0);

  CHECK_THROWS_AS(estimate_m(std::vector<bool>{}), std::invalid_argument);

  SUBCASE("a million Bernoulli(0.3) draws contain a run of three") {
    Rng rng(314);
    std::vector<bool> big;
    big.reserve(1000000);
    for (int i = 0; i < 1000000; ++i)
      big.push_back(sample_dropout(0.3, rng));
    CHECK(estimate_m(big) >= 3);
  }
}

TEST_CASE("wire codec") {
  SUBCASE("control round trip") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      ControlPacket pkt;
      pkt.seq = static_cast<std::int64_t>(rng.next_u64() >> 1);
      const int m = static_cast<int>(rng.uniform01() * 6);
      for (int i = 0; i <= m; ++i)
        pkt.actions.push_back(200.0 * rng.uniform01() - 100.0);
      const auto wire = encode_control(pkt);
      const auto back = decode_control(wire);
      CHECK(back.seq == pkt.seq);
      CHECK(back.actions == pkt.actions);
    }
  }
  SUBCASE("measurement round trip") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      MeasurementPacket pkt;
      pkt.seq = static_cast<std::int64_t>(rng.next_u64() >> 1);
      pkt.y = rng.uniform01();
      pkt.x = Vector(2 + static_cast<int>(rng.uniform01() * 3));
      for (Eigen::Index i = 0; i < pkt.x.size(); ++i)
        pkt.x(i) = 2.0 * rng.uniform01() - 1.0;
      const auto wire = encode_measurement(pkt);
      const auto back = decode_measurement(wire);
      CHECK(back.seq == pkt.seq);
      CHECK(back.y == pkt.y);
      CHECK((back.x - pkt.x).norm() == 0.0);
    }
  }
  SUBCASE("layout size for a horizon of three") {
    ControlPacket pkt;
    pkt.seq = 12;
    pkt.actions = {1.0, 2.0, 3.0, 4.0};  // M = 3
    // 16-byte header, u16 count, four f64 actions.
    CHECK(encode_control(pkt).size() == kWireHeaderSize + 2 + 4 * 8);
  }
  SUBCASE("malformed buffers are rejected") {
    CHECK_THROWS_AS(decode_control({}), MalformedPacket);

    ControlPacket pkt;
    pkt.seq = 1;
    pkt.actions = {0.5};
    auto wire = encode_control(pkt);

    auto truncated = wire;
    truncated.resize(truncated.size() - 3);
    CHECK_THROWS_AS(decode_control(truncated), MalformedPacket);

    auto bad_magic = wire;
    bad_magic[0] ^= 0xff;
    CHECK_THROWS_AS(decode_control(bad_magic), MalformedPacket);

    // Kind mismatch.
    CHECK_THROWS_AS(decode_measurement(wire), MalformedPacket);
  }
}

TEST_SUITE_END();
