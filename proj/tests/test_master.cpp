#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "paged/error.hpp"
#include "paged/master.hpp"
#include "paged/rng.hpp"

using namespace paged;

namespace {

std::shared_ptr<const SigmaLayout> make_layout(double p, std::int64_t n, int m,
                                               std::uint64_t seed) {
  const SeedGraph g = default_seed_graph(m, 4);
  const Sigma s = draw_feasible_sigma(p, n, g, seed, DepletedPolicy::kResample).sigma;
  return std::make_shared<const SigmaLayout>(s, g);
}

struct UnionFind {
  std::vector<std::int64_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::int64_t find(std::int64_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::int64_t a, std::int64_t b) { parent[find(a)] = find(b); }
};

// Live edges of the component of v in the realized graph.
std::vector<EdgeId> component_edges(const GraphState& g, VertexId v) {
  UnionFind uf(static_cast<std::size_t>(g.nu() + 1));
  const int m = g.m();
  for (EdgeId e = g.first_live_edge(); e <= g.last_live_edge(); ++e) {
    uf.unite(fixed_endpoint(e, m), g.random_endpoint(e));
  }
  std::vector<EdgeId> out;
  const auto root = uf.find(v);
  for (EdgeId e = g.first_live_edge(); e <= g.last_live_edge(); ++e) {
    if (uf.find(fixed_endpoint(e, m)) == root) out.push_back(e);
  }
  return out;
}

double chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
  double x = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    x += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  return x;
}

}  // namespace

TEST_CASE("fenwick order statistics") {
  Rng rng(4);
  const std::size_t n = 300;
  Fenwick f(n);
  std::vector<int> marks(n, 0);
  for (int round = 0; round < 250; ++round) {
    const std::size_t i = rng.below(n);
    if (!marks[i]) {
      marks[i] = 1;
      f.add(i, 1);
    }
    std::int64_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      count += marks[j];
      if (j % 37 == 0) CHECK(f.prefix(static_cast<std::int64_t>(j)) == count);
    }
    std::vector<std::size_t> free;
    for (std::size_t j = 0; j < n; ++j) {
      if (!marks[j]) free.push_back(j);
    }
    for (std::size_t k = 0; k < free.size(); k += 7) {
      CHECK(f.kth_unmarked(static_cast<std::int64_t>(k)) == free[k]);
    }
  }
}

TEST_CASE("layout windows and chooser ranges") {
  for (int m : {1, 3}) {
    const SeedGraph g = default_seed_graph(m, 4);
    const Sigma s = draw_feasible_sigma(0.75, 3000, g, 9, DepletedPolicy::kResample).sigma;
    const SigmaLayout L(s, g);
    CHECK(L.one_n() == s.one(s.n()));
    CHECK(L.nu_n() == s.nu(s.n()));
    // The window of the vertex inserted at t is the live edge set E_{t-1}.
    for (std::int64_t t = s.t0() + 1; t <= s.n(); ++t) {
      if (!s.bit(t - s.t0())) continue;
      const VertexId w = s.nu(t);
      const auto [lo, hi] = L.window(static_cast<EdgeId>(m) * w);
      CHECK(lo == static_cast<EdgeId>(m) * (s.one(t - 1) - 1) + 1);
      CHECK(hi == static_cast<EdgeId>(m) * s.nu(t - 1));
    }
    for (EdgeId f = L.base(); f <= L.last_edge(); f += 5) {
      EdgeId lo = 0, hi = -1;
      for (EdgeId e = L.first_free(); e <= L.last_edge(); ++e) {
        const auto [a, b] = L.window(e);
        if (a <= f && f <= b) {
          if (hi < lo) lo = e;
          hi = e;
        }
      }
      const auto [clo, chi] = L.chooser_range(f);
      if (hi < lo) {
        CHECK(chi < clo);
      } else {
        CHECK(clo == lo);
        CHECK(chi == hi);
      }
    }
    Rng rng(2);
    const VertexId first = L.nu_H() + 1;
    for (int trial = 0; trial < 200; ++trial) {
      VertexId a = first + static_cast<VertexId>(rng.below(L.nu_n() - first + 1));
      VertexId b = first + static_cast<VertexId>(rng.below(L.nu_n() - first + 1));
      if (a > b) std::swap(a, b);
      std::int64_t best = INT64_MAX;
      for (VertexId w = a; w <= b; ++w) best = std::min(best, w - L.window_one(w));
      CHECK(L.min_window(a, b) == best);
    }
  }
}

TEST_CASE("master graph needs a feasible sigma") {
  const SeedGraph g = default_seed_graph(1, 2);
  std::vector<std::uint8_t> bits(50, 0);
  const Sigma s(0.5, g.t0() + 50, g.one_H, g.nu_H, bits);
  CHECK_FALSE(s.feasible());
  CHECK_THROWS_AS(SigmaLayout(s, g), Error);
}

TEST_CASE("omega accounting matches a scan") {
  auto L = make_layout(0.7, 2000, 2, 3);
  MasterGraph M(L, 8);
  Rng rng(5);
  for (int i = 0; i < 400; ++i) {
    const HalfEdge h{L->base() + static_cast<EdgeId>(rng.below(L->last_edge() - L->base() + 1)),
                     1 + static_cast<int>(rng.below(2))};
    if (!M.is_revealed(h)) M.reveal(h);
  }
  for (EdgeId e = L->first_free(); e <= L->last_edge(); ++e) {
    if (!M.is_assigned(e)) CHECK(M.omega_size(e) == M.omega_size_by_scan(e));
  }
  const EdgeId e = L->last_edge();
  if (!M.is_assigned(e)) {
    M.assign(e);
    CHECK_THROWS_AS(M.assign(e), Error);
    CHECK_THROWS_AS(M.omega_size(e), Error);
  }
  CHECK_THROWS_AS(M.assign(L->base()), Error);
}

TEST_CASE("assign is uniform over unrevealed candidates") {
  auto L = make_layout(0.8, 400, 2, 21);
  const EdgeId e = L->last_edge();
  const auto [lo, hi] = L->window(e);
  // Sparse and dense reveal patterns exercise both sampling paths.
  for (int stride : {7, 1}) {
    std::vector<HalfEdge> hidden;
    for (EdgeId f = lo; f <= hi; f += stride) {
      if (stride == 1 && f % 5 == 0) continue;
      hidden.push_back({f, 1 + static_cast<int>(f % 2)});
    }
    std::map<std::uint32_t, double> counts;
    const int trials = 20000;
    for (int s = 0; s < trials; ++s) {
      MasterGraph M(L, derive_seed(77, s));
      for (const HalfEdge& h : hidden) {
        if (!M.is_revealed(h)) M.reveal(h);
      }
      if (M.is_assigned(e)) continue;
      const HalfEdge h = M.assign(e);
      CHECK_FALSE(M.is_revealed(h));
      CHECK(h.edge >= lo);
      CHECK(h.edge <= hi);
      counts[L->code(h)] += 1;
    }
    const std::size_t cells = 2 * static_cast<std::size_t>(hi - lo + 1) - hidden.size();
    CHECK(counts.size() == cells);
    double total = 0;
    for (auto& [c, k] : counts) total += k;
    std::vector<double> obs, exp;
    for (auto& [c, k] : counts) {
      obs.push_back(k);
      exp.push_back(total / static_cast<double>(cells));
    }
    const double df = static_cast<double>(cells - 1);
    CHECK(chi_square(obs, exp) < df + 5 * std::sqrt(2 * df));
  }
}

TEST_CASE("reveal adopts each candidate with probability one over omega") {
  auto L = make_layout(0.7, 600, 1, 13);
  const HalfEdge target{L->first_free() + 3, 2};
  const auto [lo, hi] = L->chooser_range(target.edge);
  REQUIRE(lo <= hi);
  std::vector<HalfEdge> pre;
  for (EdgeId f = L->base(); f <= L->first_free() + 40; f += 3) {
    if (!(HalfEdge{f, 1} == target)) pre.push_back({f, 1});
  }
  for (bool scan : {false, true}) {
    std::vector<double> hits(static_cast<std::size_t>(hi - lo + 1), 0);
    std::vector<double> expect(hits.size(), 0);
    const int trials = 6000;
    for (int s = 0; s < trials; ++s) {
      MasterGraph M(L, derive_seed(scan ? 5 : 6, s));
      for (const HalfEdge& h : pre) {
        if (!M.is_revealed(h)) M.reveal(h);
      }
      std::vector<std::int64_t> omega(hits.size(), 0);
      for (EdgeId e = lo; e <= hi; ++e) {
        if (!M.is_assigned(e)) omega[e - lo] = M.omega_size(e);
      }
      const auto adopters = scan ? M.reveal_by_scan(target) : M.reveal(target);
      CHECK(std::is_sorted(adopters.begin(), adopters.end()));
      for (EdgeId e : adopters) {
        REQUIRE(omega[e - lo] > 0);
        hits[e - lo] += 1;
        CHECK(M.choice(e) == std::optional<HalfEdge>(target));
      }
      for (std::size_t i = 0; i < omega.size(); ++i) {
        if (omega[i] > 0) expect[i] += 1.0 / static_cast<double>(omega[i]);
      }
      CHECK(M.is_revealed(target));
      CHECK_THROWS_AS(M.reveal(target), Error);
    }
    // Aggregate over blocks of candidates; each block sum is a sum of
    // independent Bernoulli counts.
    const std::size_t block = 25;
    for (std::size_t a = 0; a < hits.size(); a += block) {
      double h = 0, x = 0;
      for (std::size_t i = a; i < std::min(hits.size(), a + block); ++i) {
        h += hits[i];
        x += expect[i];
      }
      CHECK(std::fabs(h - x) < 5 * std::sqrt(x) + 1);
    }
  }
}

TEST_CASE("endpoint chains halve at every link") {
  auto L = make_layout(0.8, 20000, 1, 2);
  std::vector<double> hist(8, 0);
  int total = 0;
  for (int s = 0; s < 40; ++s) {
    MasterGraph M(L, s);
    for (EdgeId e = L->last_edge(); e > L->last_edge() - 200; --e) {
      int hops = 0;
      const VertexId v = M.resolve_endpoint(e, &hops);
      CHECK(v < fixed_endpoint(e, 1));
      CHECK(v >= 1);
      hist[std::min(hops, 8) - 1] += 1;
      ++total;
    }
  }
  // Chains rarely reach the seed graph here, so hops is close to Geometric(1/2).
  for (int k = 1; k <= 5; ++k) {
    const double expect = total * std::pow(0.5, k);
    CHECK(std::fabs(hist[k - 1] - expect) < 5 * std::sqrt(expect) + 0.02 * expect);
  }
}

TEST_CASE("exposed trees are prefix closed") {
  auto L = make_layout(0.7, 3000, 2, 5);
  MasterGraph M(L, 1);
  const VertexId v = L->one_n();
  for (EdgeId f = static_cast<EdgeId>(2) * (v - 1) + 1; f <= 2 * v; ++f) {
    const ExposeResult r = M.expose({f, 2}, 1'000'000);
    CHECK_FALSE(r.capped);
    std::set<std::string> labels;
    std::set<EdgeId> edges;
    for (const ExposeNode& node : r.tree) {
      CHECK(labels.insert(node.label).second);
      CHECK(edges.insert(node.edge).second);
      const auto dot = node.label.rfind('.');
      if (dot != std::string::npos) CHECK(labels.count(node.label.substr(0, dot)) == 1);
    }
    CHECK(r.tree[0].label == "0");
    CHECK(r.tree[0].edge == f);
  }
  bool seen_cap = false;
  for (EdgeId f = L->en_first(); f <= L->last_edge() && !seen_cap; ++f) {
    MasterGraph fresh(L, f);
    const ExposeResult r = fresh.expose({f, 2}, 3);
    if (r.capped) {
      seen_cap = true;
      CHECK(r.tree.size() > 3);
    } else {
      CHECK(r.tree.size() <= 3);
    }
  }
  CHECK(seen_cap);
}

TEST_CASE("exposed degree equals the realized degree") {
  for (int m : {1, 2}) {
    auto L = make_layout(0.75, 1500, m, 40 + m);
    for (int s = 0; s < 60; ++s) {
      MasterGraph M(L, s);
      const VertexId v = L->one_n() + s % (L->nu_n() - L->one_n() + 1);
      std::int64_t degree = 0;
      for (EdgeId f = static_cast<EdgeId>(m) * (v - 1) + 1; f <= static_cast<EdgeId>(m) * v; ++f) {
        degree += M.expose({f, 2}, 1'000'000).en_count;
      }
      const GraphState g = M.realize_full();
      CHECK(g.degree(v) == degree);
    }
  }
}

TEST_CASE("realized graph is a valid state") {
  auto L = make_layout(0.7, 5000, 3, 8);
  MasterGraph M(L, 3);
  const GraphState g = M.realize_full();
  CHECK(g.check_integrity());
  CHECK(g.one() == L->one_n());
  CHECK(g.nu() == L->nu_n());
  for (EdgeId e = g.first_live_edge(); e <= g.last_live_edge(); ++e) {
    CHECK(g.random_endpoint(e) < fixed_endpoint(e, 3));
  }
}

TEST_CASE("component search recovers the realized component") {
  for (int m : {1, 2, 3}) {
    auto L = make_layout(0.7, 800, m, 60 + m);
    SearchOptions opts;
    opts.reveal_cap = 1'000'000;
    opts.round_cap = 1'000'000;
    opts.ec_threshold = 0;
    for (int s = 0; s < 40; ++s) {
      MasterGraph M(L, s);
      const VertexId v0 = 1 + s * 7 % L->nu_n();
      const ComponentResult r = M.component_search(v0, opts);
      REQUIRE(r.verdict == Verdict::kSmall);
      if (m >= 2) CHECK(r.identity_violations == 0);
      const GraphState g = M.realize_full();
      CHECK(r.edges == component_edges(g, v0));
      if (v0 >= L->one_n()) CHECK(r.edges.size() >= static_cast<std::size_t>(m));
    }
  }
}

TEST_CASE("component search stops at the reveal cap") {
  auto L = make_layout(0.9, 20000, 2, 4);
  MasterGraph M(L, 2);
  SearchOptions opts;
  opts.reveal_cap = 50;
  opts.round_cap = 1'000'000;
  opts.ec_threshold = 0;
  const ComponentResult r = M.component_search(L->nu_n(), opts);
  CHECK(r.verdict == Verdict::kLarge);
  CHECK(r.revealed_in_Ec == 51);
  MasterGraph N(L, 2);
  opts.reveal_cap = 1'000'000;
  opts.round_cap = 2;
  CHECK(N.component_search(L->nu_n(), opts).verdict == Verdict::kUndecided);
}

TEST_CASE("trace replay reproduces the master graph") {
  auto L = make_layout(0.75, 1200, 2, 17);
  std::stringstream log;
  MasterGraph A(L, 99);
  A.set_trace(&log);
  A.expose({L->last_edge(), 2}, 1000);
  A.resolve_endpoint(L->last_edge() - 5);
  A.set_trace(nullptr);
  MasterGraph B(L, 1);
  B.replay(log);
  CHECK(B.revealed_count() == A.revealed_count());
  CHECK(B.assigned_count() == A.assigned_count());
  for (EdgeId e = L->first_free(); e <= L->last_edge(); ++e) {
    CHECK(B.choice(e) == A.choice(e));
  }
  for (std::uint32_t c : A.revealed_codes()) CHECK(B.is_revealed(L->half_edge(c)));
  std::stringstream bad("{\"op\":\"reveal\",\"half_edge\":[" + std::to_string(L->last_edge()) +
                        ",2],\"outcome\":[]}\n");
  CHECK_THROWS_AS(B.replay(bad), Error);
}
