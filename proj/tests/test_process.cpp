#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "paged/error.hpp"
#include "paged/process.hpp"

using namespace paged;

namespace {

Sigma sigma_from(const SeedGraph& g, double p, std::vector<std::uint8_t> bits) {
  const std::int64_t n = g.t0() + static_cast<std::int64_t>(bits.size());
  return Sigma(p, n, g.one_H, g.nu_H, std::move(bits));
}

}  // namespace

TEST_CASE("default seed graph") {
  const SeedGraph g = default_seed_graph(1, 1);
  CHECK(g.one_H == 2);
  CHECK(g.nu_H == 3);
  CHECK(g.last_edge() - g.first_edge() + 1 == 2);
  CHECK_NOTHROW(g.validate());
  for (int m : {1, 2, 5}) {
    const SeedGraph h = default_seed_graph(m, 7);
    CHECK_NOTHROW(h.validate());
    CHECK(h.t0() == h.one_H + h.nu_H);
    for (EdgeId e = h.first_edge(); e <= h.last_edge(); ++e) {
      const VertexId f = fixed_endpoint(e, m);
      CHECK(h.endpoint(e) == f - ((e - 1) % m) - 1);
    }
  }
  SeedGraph bad = default_seed_graph(2, 3);
  bad.out_edges[0][0] = bad.one_H;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("sigma bits and prefix sums") {
  const SeedGraph g = default_seed_graph(2, 4);
  const std::int64_t n = 200000;
  const double p = 0.7;
  const Sigma s = draw_sigma(p, n, g, 11);
  double ones = 0;
  for (auto b : s.bits()) ones += b;
  const double len = static_cast<double>(n - g.t0());
  CHECK(std::fabs(ones / len - p) < 3 * std::sqrt(p * (1 - p) / len));
  for (std::int64_t t = s.t0(); t <= n; t += 997) {
    CHECK(s.nu(t) + s.one(t) == t);
  }
  CHECK(s.nu(s.t0()) == g.nu_H);
  const Sigma again = draw_sigma(p, n, g, 11);
  CHECK(again.bits() == s.bits());
  const Sigma ones_only = draw_sigma(1.0, 5000, g, 3);
  for (auto b : ones_only.bits()) CHECK(b == 1);
}

TEST_CASE("feasibility") {
  const SeedGraph g = default_seed_graph(2, 3);
  CHECK(sigma_from(g, 0.7, std::vector<std::uint8_t>(50, 1)).feasible());
  const Sigma zeros = sigma_from(g, 0.7, std::vector<std::uint8_t>(50, 0));
  CHECK_FALSE(zeros.feasible());
  CHECK(zeros.first_infeasible() > zeros.t0());

  // Infeasibility becomes rarer as the seed graph grows.
  std::vector<double> freq;
  for (int N : {2, 4, 8, 16}) {
    const SeedGraph h = default_seed_graph(1, N);
    int bad = 0;
    const int trials = 4000;
    for (int i = 0; i < trials; ++i) {
      if (!draw_sigma(0.6, h.t0() + 400, h, derive_seed(N, i)).feasible()) ++bad;
    }
    freq.push_back(static_cast<double>(bad) / trials);
  }
  for (std::size_t i = 1; i < freq.size(); ++i) CHECK(freq[i] < freq[i - 1]);
  CHECK(freq.back() < 0.25 * freq.front());
}

TEST_CASE("concentration") {
  const SeedGraph g = default_seed_graph(2, 4);
  std::vector<std::uint8_t> bits(20000, 1);
  for (std::size_t i = 10000; i < 20000; ++i) bits[i] = 0;
  CHECK_FALSE(sigma_from(g, 0.7, bits).concentrated(std::log(std::log(20000.0))));

  const std::int64_t n = 100000;
  const double omega = std::log(std::log(static_cast<double>(n)));
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    const Sigma s = draw_sigma(0.75, n, g, derive_seed(99, i));
    if (s.concentrated(omega)) {
      ++ok;
      // Edge count window follows from the vertex window.
      for (std::int64_t t = n / 2; t <= n; t += 5003) {
        const double edges = 2.0 * (s.nu(t) - s.one(t) + 1);
        const double td = static_cast<double>(t);
        CHECK(std::fabs(edges - 2 * (2 * 0.75 - 1) * td) <=
              2 * 2 * std::sqrt(td) * std::log(td) + 2);
      }
    }
  }
  CHECK(ok == 100);
}

TEST_CASE("sampler bookkeeping") {
  HalfEdgeSampler s;
  for (std::uint32_t c = 0; c < 100; ++c) s.insert(c);
  for (std::uint32_t c = 0; c < 100; c += 3) s.remove(c);
  CHECK(s.check_integrity());
  CHECK(s.size() == 66);
  CHECK_FALSE(s.contains(3));
  CHECK(s.contains(4));
}

TEST_CASE("process invariants step by step") {
  const SeedGraph g = default_seed_graph(2, 3);
  const Sigma s = draw_feasible_sigma(0.7, 3000, g, 5, DepletedPolicy::kResample).sigma;
  GraphState state(g);
  Rng rng(17);
  for (std::int64_t t = s.t0() + 1; t <= s.n(); ++t) {
    if (s.bit(t - s.t0())) {
      state.add_vertex(rng, t);
    } else {
      state.delete_oldest(t);
    }
    CHECK(state.one() == s.one(t));
    CHECK(state.nu() == s.nu(t));
    CHECK(state.live_edge_count() == 2 * (s.nu(t) - s.one(t) + 1));
    if (t % 97 == 0) REQUIRE(state.check_integrity());
  }
  std::int64_t degree_sum = 0;
  for (VertexId v = 1; v <= state.nu(); ++v) degree_sum += state.degree(v);
  CHECK(degree_sum == 2 * state.live_edge_count());
  CHECK(state.degree(state.nu() + 5) == 0);
  // Base vertices never own edges: every live edge id starts past them.
  CHECK(state.first_live_edge() > static_cast<EdgeId>(2) * (g.one_H - 1));
}

TEST_CASE("process determinism and dump") {
  const SeedGraph g = default_seed_graph(3, 5);
  const Sigma s = draw_feasible_sigma(0.8, 5000, g, 1, DepletedPolicy::kResample).sigma;
  const GraphState a = run_process(g, s, 42);
  const GraphState b = run_process(g, s, 42);
  CHECK(a.dump() == b.dump());
  const GraphState c = run_process(g, s, 43);
  CHECK(a.dump() != c.dump());
  const std::string d = a.dump();
  CHECK(d.rfind("paged v1 m=3 one_t=" + std::to_string(a.one()) +
                    " nu_t=" + std::to_string(a.nu()) + "\n",
                0) == 0);
  // Last vertex added at the final step still holds its m out-edges.
  if (s.bit(s.n() - s.t0())) CHECK(a.degree(a.nu()) >= 3);
}

TEST_CASE("depletion is reported with its time") {
  const SeedGraph g = default_seed_graph(1, 2);
  std::vector<std::uint8_t> bits(10, 0);
  bits.push_back(1);
  const Sigma s = sigma_from(g, 0.7, bits);
  try {
    run_process(g, s, 1);
    FAIL("expected depletion");
  } catch (const DepletedError& e) {
    CHECK(e.t() > s.t0());
    CHECK(e.code() == ErrorCode::kDepleted);
  }
  CHECK_THROWS_AS(draw_feasible_sigma(0.5000001, 100000, g, 1, DepletedPolicy::kAbort, 100),
                  Error);
}

TEST_CASE("choices are proportional to degree") {
  const SeedGraph g = default_seed_graph(2, 6);
  const Sigma s = draw_feasible_sigma(0.7, 60, g, 8, DepletedPolicy::kResample).sigma;
  const GraphState state = run_process(g, s, 8);
  Rng rng(123);
  const int draws = 400000;
  std::map<VertexId, int> hits;
  for (int i = 0; i < draws; ++i) ++hits[state.sample_vertex(rng)];
  const double total = 2.0 * state.live_edge_count();
  for (VertexId v = 1; v <= state.nu(); ++v) {
    const double prob = state.degree(v) / total;
    const double se = std::sqrt(prob * (1 - prob) / draws);
    CAPTURE(v);
    CHECK(std::fabs(hits[v] / static_cast<double>(draws) - prob) <= 4 * se + 1e-12);
  }
}
