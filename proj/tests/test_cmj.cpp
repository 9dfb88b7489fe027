#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "paged/cmj.hpp"
#include "paged/error.hpp"
#include "paged/rng.hpp"
#include "paged/theory.hpp"

using namespace paged;

TEST_CASE("trace structure") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const CmjTrace t = simulate_cmj(1.3, 3.0, seed);
    REQUIRE(t.size() >= 1);
    CHECK(t.label(0) == "0");
    CHECK(t.births()[0].time == 0.0);
    CHECK(t.alive_at(0.0) == 1);
    CHECK(t.born_before(0.0) == 1);
    CHECK(t.alive_at(0.999) >= 1);
    for (std::size_t i = 1; i < t.size(); ++i) {
      const CmjBirth& b = t.births()[i];
      const double parent = t.births()[b.parent].time;
      CHECK(b.time > parent);
      CHECK(b.time < parent + 1.0);
      CHECK(b.time <= 3.0);
      CHECK(b.parent < static_cast<std::int64_t>(i));
    }
    for (double tau = 0.0; tau <= 3.0; tau += 0.25) {
      CHECK(t.born_before(tau) >= t.alive_at(tau));
    }
  }
  const CmjTrace t = simulate_cmj(2.0, 2.0, 5);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const std::string parent = t.label(t.births()[i].parent);
    CHECK(t.label(i) == parent + "." + std::to_string(t.births()[i].ordinal));
  }
  CHECK_THROWS_AS(t.alive_at(2.5), Error);
  CHECK_THROWS_AS(t.born_before(-0.1), Error);
}

TEST_CASE("traces are reproducible") {
  const CmjTrace a = simulate_cmj(1.5, 4.0, 77);
  const CmjTrace b = simulate_cmj(1.5, 4.0, 77);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.births()[i].time == b.births()[i].time);
    CHECK(a.label(i) == b.label(i));
  }
  // Truncation does not disturb earlier births.
  const CmjTrace c = simulate_cmj(1.5, 2.0, 77);
  CHECK(c.born_before(2.0) == a.born_before(2.0));
  CHECK(c.alive_at(1.7) == a.alive_at(1.7));
}

TEST_CASE("birth cap is reported") {
  const CmjTrace t = simulate_cmj(3.0, 10.0, 1, 50);
  CHECK(t.capped());
  CHECK(t.size() == 50);
  CHECK_FALSE(simulate_cmj(0.7, 1.0, 1).capped());
}

TEST_CASE("root offspring is Poisson(alpha) with uniform times") {
  const double alpha = 1.2;
  const int runs = 100000;
  double total = 0;
  std::vector<double> times3;
  for (int i = 0; i < runs; ++i) {
    const CmjTrace t = simulate_cmj(alpha, 1.0, derive_seed(3, i));
    int kids = 0;
    for (std::size_t j = 1; j < t.size(); ++j) kids += t.births()[j].parent == 0;
    total += kids;
    if (kids == 3) {
      for (std::size_t j = 1; j < t.size(); ++j) {
        if (t.births()[j].parent == 0) times3.push_back(t.births()[j].time);
      }
    }
  }
  const double mean = total / runs;
  CHECK(std::fabs(mean - alpha) < 4 * std::sqrt(alpha / runs));
  // Kolmogorov-Smirnov against U(0,1) for the pooled three-child times.
  std::sort(times3.begin(), times3.end());
  double d = 0;
  const double n = static_cast<double>(times3.size());
  for (std::size_t i = 0; i < times3.size(); ++i) {
    d = std::max({d, std::fabs((i + 1) / n - times3[i]), std::fabs(times3[i] - i / n)});
  }
  CHECK(d < 1.63 / std::sqrt(n / 3.0));
}

TEST_CASE("alive count follows the zero-inflated geometric law") {
  const int runs = 20000;
  for (double alpha : {0.7, 1.5}) {
    const TheoryFns f(alpha);
    for (double tau : {0.5, 1.5}) {
      std::vector<double> freq(400, 0.0);
      for (int i = 0; i < runs; ++i) {
        const CmjTrace t = simulate_cmj(alpha, tau, derive_seed(9, i));
        const auto d = std::min<std::int64_t>(t.alive_at(tau), 399);
        freq[d] += 1.0 / runs;
      }
      double tv = 0;
      for (int k = 0; k < 400; ++k) {
        tv += std::fabs(freq[k] - gq_pmf(1, f.p(tau), f.q(tau), k));
      }
      CAPTURE(alpha);
      CAPTURE(tau);
      CHECK(0.5 * tv < 0.03);
      const double p0 = f.one_minus_q(tau);
      CHECK(std::fabs(freq[0] - p0) <= 3 * std::sqrt(p0 * (1 - p0) / runs) + 1e-12);
    }
  }
}

TEST_CASE("lambda calibration") {
  const ModelParams params = derive_params(0.7, 2);
  const LambdaCalibration lo = calibrate_lambda(params, 1000, 1000, 1.0, 4);
  std::int64_t mx = 0;
  for (auto b : lo.births) mx = std::max(mx, b);
  CHECK(lo.lambda == doctest::Approx(mx / std::log(1000.0)));
  const LambdaCalibration hi = calibrate_lambda(params, 100000, 1000, 0.99, 4);
  const LambdaCalibration mid = calibrate_lambda(params, 10000, 1000, 0.99, 4);
  CHECK(hi.lambda / mid.lambda < 2.0);
  CHECK(hi.lambda / mid.lambda > 0.5);

  const ModelParams big = derive_params(0.9, 2);
  const LambdaCalibration pw = calibrate_lambda(big, 10000, 1000, 0.99, 4);
  const SpectralConstants c = spectral_constants(big);
  CHECK(pw.scale == doctest::Approx(std::pow(1e4, 1 / *c.eta) * std::log(1e4)));
  CHECK(pw.lambda > 0);
}
