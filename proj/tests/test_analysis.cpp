#include <doctest.h>

#include <cmath>
#include <map>
#include <queue>
#include <vector>

#include "paged/analysis.hpp"
#include "paged/error.hpp"
#include "paged/theory.hpp"

using namespace paged;

namespace {

GraphState simulate(double p, std::int64_t n, int m, std::uint64_t seed) {
  const SeedGraph g = default_seed_graph(m, 4);
  const Sigma s = draw_feasible_sigma(p, n, g, seed, DepletedPolicy::kResample).sigma;
  return run_process(g, s, seed + 1000);
}

// Component id per vertex by breadth-first search over an adjacency list.
std::vector<std::int64_t> bfs_labels(const GraphState& g) {
  std::vector<std::vector<VertexId>> adj(static_cast<std::size_t>(g.nu() + 1));
  for (EdgeId e = g.first_live_edge(); e <= g.last_live_edge(); ++e) {
    const VertexId a = fixed_endpoint(e, g.m());
    const VertexId b = g.random_endpoint(e);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<std::int64_t> label(adj.size(), -1);
  for (VertexId s = 1; s <= g.nu(); ++s) {
    if (label[s] >= 0) continue;
    std::queue<VertexId> q;
    q.push(s);
    label[s] = s;
    while (!q.empty()) {
      const VertexId u = q.front();
      q.pop();
      for (VertexId w : adj[u]) {
        if (label[w] < 0) {
          label[w] = s;
          q.push(w);
        }
      }
    }
  }
  return label;
}

}  // namespace

TEST_CASE("histogram moment identities") {
  for (int m : {1, 2, 3}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const GraphState g = simulate(0.7, 5000, m, seed);
      const DegreeHistogram h = degree_histogram(g, 5000);
      std::int64_t vertices = 0, ends = 0;
      for (std::size_t k = 0; k < h.counts.size(); ++k) {
        vertices += h.counts[k];
        ends += static_cast<std::int64_t>(k) * h.counts[k];
      }
      CHECK(vertices == h.vertex_count);
      CHECK(h.vertex_count == g.nu());
      CHECK(ends == 2 * h.live_edges);
      CHECK(h.live_edges == m * (g.nu() - g.one() + 1));
      const DegreeHistogram cur = degree_histogram(g, 5000, true);
      CHECK(cur.vertex_count == g.nu() - g.one() + 1);
      for (std::size_t k = 0; k < m && k < cur.counts.size(); ++k) CHECK(cur.counts[k] == 0);
    }
  }
}

TEST_CASE("union-find partition matches breadth-first search") {
  for (int m : {1, 2}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const GraphState g = simulate(0.75, 1000, m, seed);
      const auto uf = component_labels(g);
      const auto bfs = bfs_labels(g);
      std::map<std::int64_t, std::int64_t> a_to_b, b_to_a;
      for (VertexId v = 1; v <= g.nu(); ++v) {
        const auto [ia, fresh_a] = a_to_b.emplace(uf[v], bfs[v]);
        const auto [ib, fresh_b] = b_to_a.emplace(bfs[v], uf[v]);
        CHECK(ia->second == bfs[v]);
        CHECK(ib->second == uf[v]);
      }
      const ComponentReport r = components(g);
      std::int64_t total = r.isolated;
      for (auto s : r.sizes) total += s;
      CHECK(total == r.vertex_count);
      CHECK(r.second <= r.giant);
      CHECK(std::is_sorted(r.sizes.rbegin(), r.sizes.rend()));
      std::int64_t isolated = 0;
      for (VertexId v = 1; v <= g.nu(); ++v) isolated += g.degree(v) == 0;
      CHECK(r.isolated == isolated);
    }
  }
}

TEST_CASE("m = 2 graphs have a giant, m = 1 graphs do not") {
  const ComponentReport two = components(simulate(0.9, 50000, 2, 3));
  CHECK(two.giant > 10 * two.second);
  const ComponentReport one = components(simulate(0.75, 50000, 1, 3));
  CHECK(one.giant < 0.2 * 50000);
}

TEST_CASE("histogram comparison") {
  const DegreeLaw law = degree_law(derive_params(0.7, 2), 30);
  DegreeHistogram h;
  h.n = 1'000'000'000;
  for (int k = 0; k <= 30; ++k) {
    h.counts.push_back(std::llround(law.x[k] * static_cast<double>(h.n)));
  }
  const HistogramComparison c = compare_histogram(h, law, 0, 30);
  CHECK(c.tv < 1e-8);
  for (const HistogramRow& row : c.rows) {
    if (row.theory > 1e-6) CHECK(row.rel_error < 1e-3);
  }
  CHECK_THROWS_AS(compare_histogram(h, law, 0, 31), Error);
  DegreeHistogram empty;
  CHECK_THROWS_AS(compare_histogram(empty, law, 0, 10), Error);
}

TEST_CASE("tail fits") {
  std::vector<double> pure(300, 0.0);
  for (int k = 1; k < 300; ++k) pure[k] = std::pow(k, -3.0);
  const TailFit f = fit_power_tail(pure, 5, 250);
  CHECK(std::fabs(f.slope + 3.0) < 1e-10);
  CHECK(f.stderr_slope < 1e-10);
  std::vector<double> zero(50, 0.0);
  CHECK_THROWS_AS(fit_power_tail(zero, 10, 40), Error);
  CHECK_THROWS_AS(fit_power_tail(pure, 10, 10), Error);

  const ModelParams heavy = derive_params(0.9, 2);
  const double eta = *spectral_constants(heavy).eta;
  // The approach to the power law is slow; the far tail is within reach.
  const DegreeLaw law9 = degree_law(heavy, 1600, 1e-8);
  const TailFit near = fit_power_tail(law9.x, 20, 200);
  const TailFit far = fit_power_tail(law9.x, 400, 1600);
  CHECK(std::fabs(far.slope + eta + 1.0) < 0.3);
  CHECK(std::fabs(far.slope + eta + 1.0) < std::fabs(near.slope + eta + 1.0));

  const ModelParams light = derive_params(0.7, 2);
  const DegreeLaw law7 = degree_law(light, 200, 1e-8);
  const TailFit t7 = fit_exponential_tail(law7.x, 100, 200);
  CHECK(std::fabs(t7.slope - std::log(light.alpha)) < 0.05);
}

TEST_CASE("vertex degree experiment") {
  const ModelParams params = derive_params(0.75, 1);
  const std::int64_t n = 4000;
  CHECK_THROWS_AS(vertex_tau(params, n, 3000), Error);
  CHECK_THROWS_AS(vertex_tau(params, n, 10), Error);
  CHECK_THROWS_AS(vertex_tau(params, n, static_cast<VertexId>(0.75 * n / 3.0)), Error);
  const VertexDegreeReport r = vertex_degree_experiment(params, n, n / 2, 4000, 12);
  CHECK(r.tau == doctest::Approx(std::log(1.5) / std::log(3.0)));
  CHECK(r.tv < 0.05);
  const double p0 = r.empirical[0];
  const double expect = 1.0 - r.q_tau;
  CHECK(std::fabs(p0 - expect) < 4 * std::sqrt(expect * (1 - expect) / 4000) + 0.01);
  const VertexDegreeReport again = vertex_degree_experiment(params, n, n / 2, 50, 12, 4, 3);
  const VertexDegreeReport serial = vertex_degree_experiment(params, n, n / 2, 50, 12, 4, 1);
  CHECK(again.degrees == serial.degrees);
}
