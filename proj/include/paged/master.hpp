#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "paged/process.hpp"
#include "paged/rng.hpp"

namespace paged {

struct HalfEdge {
  EdgeId edge = 0;
  int side = 1;  // 2: fixed endpoint ceil(edge/m); 1: random endpoint

  friend bool operator==(const HalfEdge& a, const HalfEdge& b) {
    return a.edge == b.edge && a.side == b.side;
  }
};

// Count and order-statistics over 0/1 marks.
class Fenwick {
 public:
  explicit Fenwick(std::size_t size = 0) : tree_(size + 1, 0) {}
  std::size_t size() const { return tree_.size() - 1; }
  void add(std::size_t i, int delta);
  // Marks in [0, i].
  std::int64_t prefix(std::int64_t i) const;
  std::int64_t range(std::int64_t lo, std::int64_t hi) const {
    return hi < lo ? 0 : prefix(hi) - prefix(lo - 1);
  }
  // Smallest i with (i + 1) - prefix(i) == k + 1, i.e. the k-th unmarked
  // position (0-based k).
  std::size_t kth_unmarked(std::int64_t k) const;

 private:
  std::vector<std::int32_t> tree_;
};

// Everything about Gamma that follows from sigma and H alone.
class SigmaLayout {
 public:
  SigmaLayout(const Sigma& sigma, const SeedGraph& seed_graph);

  int m() const { return m_; }
  std::int64_t n() const { return n_; }
  VertexId one_H() const { return seed_.one_H; }
  VertexId nu_H() const { return seed_.nu_H; }
  VertexId one_n() const { return one_n_; }
  VertexId nu_n() const { return nu_n_; }
  const SeedGraph& seed_graph() const { return seed_; }

  EdgeId base() const { return seed_.first_edge(); }
  EdgeId first_free() const { return static_cast<EdgeId>(m_) * seed_.nu_H + 1; }
  EdgeId last_edge() const { return static_cast<EdgeId>(m_) * nu_n_; }
  EdgeId en_first() const { return static_cast<EdgeId>(m_) * (one_n_ - 1) + 1; }
  EdgeId en_last() const { return last_edge(); }
  bool in_En(EdgeId e) const { return e >= en_first() && e <= en_last(); }
  bool is_seed(EdgeId e) const { return e <= static_cast<EdgeId>(m_) * seed_.nu_H; }
  bool valid_edge(EdgeId e) const { return e >= base() && e <= last_edge(); }

  // 1_{t-1} for the step t that inserted vertex w > nu_H.
  VertexId window_one(VertexId w) const { return window_one_[w - seed_.nu_H - 1]; }
  // E_e^sigma as an inclusive edge-id range.
  std::pair<EdgeId, EdgeId> window(EdgeId e) const;
  // Free edges e with f in E_e^sigma, as an inclusive range (may be empty).
  std::pair<EdgeId, EdgeId> chooser_range(EdgeId f) const;
  // min over w in [a, b] of w - window_one(w); a, b > nu_H.
  std::int64_t min_window(VertexId a, VertexId b) const;

  VertexId seed_endpoint(EdgeId f) const { return seed_.endpoint(f); }
  // Seed edges whose random endpoint is v.
  const std::vector<EdgeId>& seed_in_edges(VertexId v) const;

  std::uint32_t code(HalfEdge h) const {
    return static_cast<std::uint32_t>(2 * (h.edge - base()) + (h.side - 1));
  }
  HalfEdge half_edge(std::uint32_t code) const {
    return {base() + static_cast<EdgeId>(code >> 1), static_cast<int>(code & 1u) + 1};
  }
  std::size_t code_count() const {
    return static_cast<std::size_t>(2 * (last_edge() - base() + 1));
  }

 private:
  int m_;
  std::int64_t n_;
  VertexId one_n_;
  VertexId nu_n_;
  SeedGraph seed_;
  std::vector<std::int32_t> window_one_;
  std::size_t seg_size_ = 1;
  std::vector<std::int32_t> seg_;
  std::unordered_map<VertexId, std::vector<EdgeId>> seed_in_;
};

struct ExposeNode {
  std::string label;
  EdgeId edge;
};

struct ExposeResult {
  std::vector<ExposeNode> tree;
  std::int64_t en_count = 0;
  bool capped = false;
};

enum class Verdict { kSmall, kLarge, kUndecided };

const char* to_string(Verdict v);

struct RoundStat {
  std::int64_t round;
  std::int64_t x_size;
  std::int64_t c_size;
  bool x1_in_En;
  std::int64_t new_x;
  std::int64_t new_y_in_En;
};

struct ComponentResult {
  std::vector<EdgeId> edges;  // sorted
  Verdict verdict = Verdict::kSmall;
  std::int64_t rounds = 0;
  std::int64_t revealed_in_Ec = 0;
  std::vector<RoundStat> stats;
  // Rounds (t >= 1, m >= 2) at which |C|/2 <= |X| + t <= |C| failed.
  std::int64_t identity_violations = 0;
};

struct SearchOptions {
  std::int64_t reveal_cap = 0;
  std::int64_t round_cap = 0;
  // E_c = edges > ec_threshold (m n / omega).
  double ec_threshold = 0.0;
};

class MasterGraph {
 public:
  MasterGraph(std::shared_ptr<const SigmaLayout> layout, std::uint64_t seed);
  MasterGraph(const Sigma& sigma, const SeedGraph& seed_graph,
              std::uint64_t seed);

  const SigmaLayout& layout() const { return *layout_; }
  std::shared_ptr<const SigmaLayout> shared_layout() const { return layout_; }

  bool is_assigned(EdgeId e) const;
  std::optional<HalfEdge> choice(EdgeId e) const;
  bool is_revealed(HalfEdge h) const;
  std::int64_t revealed_count() const { return revealed_total_; }
  std::int64_t assigned_count() const { return assigned_total_; }
  const std::vector<std::uint32_t>& revealed_codes() const { return revealed_list_; }

  std::int64_t omega_size(EdgeId e) const;
  // Recount by scanning the window; a check on omega_size.
  std::int64_t omega_size_by_scan(EdgeId e) const;

  HalfEdge assign(EdgeId e);
  std::vector<EdgeId> reveal(HalfEdge h);
  // Same law as reveal, visiting every candidate; a reference for tests.
  std::vector<EdgeId> reveal_by_scan(HalfEdge h);
  // Assigned edges that chose h.
  const std::vector<EdgeId>& choosers(HalfEdge h) const;

  VertexId resolve_endpoint(EdgeId e, int* hops = nullptr);
  ExposeResult expose(HalfEdge h, std::int64_t budget);
  ComponentResult component_search(VertexId v0, const SearchOptions& opts);
  GraphState realize_full();

  // JSON-lines log of assign/reveal outcomes; nullptr disables.
  void set_trace(std::ostream* out) { trace_ = out; }
  // Re-applies a log written by set_trace, checking each step is legal.
  void replay(std::istream& in);

 private:
  void check_free(EdgeId e) const;
  void check_half_edge(HalfEdge h) const;
  void set_choice(EdgeId e, HalfEdge h);
  void mark_revealed(HalfEdge h);
  std::vector<EdgeId> reveal_impl(HalfEdge h, bool scan);
  void trace_assign(EdgeId e, HalfEdge h);
  void trace_reveal(HalfEdge h, const std::vector<EdgeId>& adopters);

  static constexpr std::uint32_t kUnassigned = 0xffffffffu;

  std::shared_ptr<const SigmaLayout> layout_;
  Rng rng_;
  std::vector<std::uint32_t> phi_;  // by e - first_free
  std::vector<std::uint8_t> revealed_;
  std::vector<std::uint32_t> revealed_list_;
  Fenwick fenwick_;
  std::unordered_map<std::uint32_t, std::vector<EdgeId>> choosers_;
  std::int64_t revealed_total_ = 0;
  std::int64_t assigned_total_ = 0;
  std::ostream* trace_ = nullptr;
};

}  // namespace paged
