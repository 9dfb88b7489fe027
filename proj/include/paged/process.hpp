#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paged/rng.hpp"

namespace paged {

using VertexId = std::int64_t;
using EdgeId = std::int64_t;

inline VertexId fixed_endpoint(EdgeId e, int m) { return (e + m - 1) / m; }

struct SeedGraph {
  int m = 1;
  VertexId one_H = 2;
  VertexId nu_H = 2;
  // out_edges[v - one_H] lists the m endpoints of v's out-edges in order.
  std::vector<std::vector<VertexId>> out_edges;

  std::int64_t t0() const { return one_H + nu_H; }
  EdgeId first_edge() const { return static_cast<EdgeId>(m) * (one_H - 1) + 1; }
  EdgeId last_edge() const { return static_cast<EdgeId>(m) * nu_H; }
  // Random endpoint of seed edge e.
  VertexId endpoint(EdgeId e) const;
  // Throws a parameter error unless the graph has the required shape.
  void validate() const;
};

SeedGraph default_seed_graph(int m, int N);

class Sigma {
 public:
  Sigma(double p, std::int64_t n, VertexId one_H, VertexId nu_H,
        std::vector<std::uint8_t> bits);

  double p() const { return p_; }
  std::int64_t n() const { return n_; }
  std::int64_t t0() const { return one_H_ + nu_H_; }
  VertexId one_H() const { return one_H_; }
  VertexId nu_H() const { return nu_H_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  // Bit for step t = t0 + u, u in [1, n - t0].
  int bit(std::int64_t u) const { return bits_[u - 1]; }

  VertexId nu(std::int64_t t) const { return nu_H_ + prefix_[t - t0()]; }
  VertexId one(std::int64_t t) const { return t - nu(t); }

  bool feasible() const { return first_infeasible_ == 0; }
  // First t > t0 with nu_t <= 1_t, or 0 when feasible.
  std::int64_t first_infeasible() const { return first_infeasible_; }
  bool concentrated(double omega) const;

 private:
  double p_;
  std::int64_t n_;
  VertexId one_H_;
  VertexId nu_H_;
  std::vector<std::uint8_t> bits_;
  std::vector<std::int32_t> prefix_;
  std::int64_t first_infeasible_ = 0;
};

Sigma draw_sigma(double p, std::int64_t n, const SeedGraph& seed_graph,
                 std::uint64_t seed);

enum class DepletedPolicy { kResample, kAbort };

struct FeasibleSigma {
  Sigma sigma;
  int attempts;
};

// Draws sigma until feasible (resample) or fails on the first infeasible
// draw (abort). Attempt i uses derive_seed(seed, i).
FeasibleSigma draw_feasible_sigma(double p, std::int64_t n,
                                  const SeedGraph& seed_graph,
                                  std::uint64_t seed, DepletedPolicy policy,
                                  int retry_cap = 100);

// Multiset of live half-edges with O(1) sample, insert and remove.
// Codes are 2(e - base) + (side - 1).
class HalfEdgeSampler {
 public:
  static constexpr std::uint32_t kAbsent = 0xffffffffu;

  void insert(std::uint32_t code);
  void remove(std::uint32_t code);
  std::uint32_t sample(Rng& rng) const {
    return entries_[rng.below(entries_.size())];
  }
  std::size_t size() const { return entries_.size(); }
  bool contains(std::uint32_t code) const {
    return code < pos_.size() && pos_[code] != kAbsent;
  }
  bool check_integrity() const;

 private:
  std::vector<std::uint32_t> entries_;
  std::vector<std::uint32_t> pos_;
};

class GraphState {
 public:
  explicit GraphState(const SeedGraph& seed_graph);
  // A state holding exactly the given live edges; random_endpoints[i] is the
  // random endpoint of edge m(one - 1) + 1 + i.
  GraphState(int m, VertexId one, VertexId nu,
             const std::vector<VertexId>& random_endpoints);

  int m() const { return m_; }
  VertexId one() const { return one_; }
  VertexId nu() const { return nu_; }
  EdgeId first_live_edge() const { return static_cast<EdgeId>(m_) * (one_ - 1) + 1; }
  EdgeId last_live_edge() const { return static_cast<EdgeId>(m_) * nu_; }
  std::int64_t live_edge_count() const {
    return one_ > nu_ ? 0 : static_cast<std::int64_t>(m_) * (nu_ - one_ + 1);
  }
  VertexId random_endpoint(EdgeId e) const { return endpoint_[e - base_]; }
  std::int64_t degree(VertexId v) const {
    return (v >= 1 && v < static_cast<VertexId>(degree_.size())) ? degree_[v] : 0;
  }
  const HalfEdgeSampler& sampler() const { return sampler_; }
  // One degree-proportional vertex draw (d / 2e per vertex).
  VertexId sample_vertex(Rng& rng) const { return vertex_of(sampler_.sample(rng)); }

  // sigma = 1: new vertex with m choices drawn from the current graph.
  void add_vertex(Rng& rng, std::int64_t t);
  // sigma = 0: drop the out-edges of the oldest intact vertex.
  void delete_oldest(std::int64_t t);

  std::string dump() const;
  bool check_integrity() const;

 private:
  VertexId vertex_of(std::uint32_t code) const;
  void add_edge(EdgeId e, VertexId target);

  int m_;
  VertexId one_;
  VertexId nu_;
  EdgeId base_;
  std::vector<std::uint32_t> endpoint_;
  std::vector<std::uint32_t> degree_;
  HalfEdgeSampler sampler_;
};

// Runs steps t0 + 1 .. sigma.n(). Throws DepletedError on an empty sampler
// or nothing left to delete.
GraphState run_process(const SeedGraph& seed_graph, const Sigma& sigma,
                       std::uint64_t seed);

}  // namespace paged
