#include "paged/master.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "paged/error.hpp"

namespace paged {

void Fenwick::add(std::size_t i, int delta) {
  for (std::size_t x = i + 1; x < tree_.size(); x += x & (~x + 1)) {
    tree_[x] += delta;
  }
}

std::int64_t Fenwick::prefix(std::int64_t i) const {
  std::int64_t sum = 0;
  for (std::int64_t x = i + 1; x > 0; x -= x & -x) sum += tree_[x];
  return sum;
}

std::size_t Fenwick::kth_unmarked(std::int64_t k) const {
  const std::size_t n = size();
  std::size_t pos = 0;
  std::int64_t rem = k + 1;
  std::size_t step = 1;
  while (step * 2 <= n) step *= 2;
  for (; step > 0; step /= 2) {
    const std::size_t next = pos + step;
    if (next <= n) {
      const std::int64_t unmarked = static_cast<std::int64_t>(step) - tree_[next];
      if (unmarked < rem) {
        pos = next;
        rem -= unmarked;
      }
    }
  }
  return pos;
}

SigmaLayout::SigmaLayout(const Sigma& sigma, const SeedGraph& seed_graph)
    : m_(seed_graph.m), n_(sigma.n()), seed_(seed_graph) {
  seed_.validate();
  if (sigma.one_H() != seed_.one_H || sigma.nu_H() != seed_.nu_H) {
    throw Error(ErrorCode::kParameter, "sigma was drawn for another seed graph");
  }
  if (!sigma.feasible()) {
    throw Error(ErrorCode::kParameter, "master graph needs a feasible sigma");
  }
  one_n_ = sigma.one(n_);
  nu_n_ = sigma.nu(n_);
  window_one_.reserve(nu_n_ - seed_.nu_H);
  for (std::int64_t t = sigma.t0() + 1; t <= n_; ++t) {
    if (sigma.bit(t - sigma.t0())) {
      window_one_.push_back(static_cast<std::int32_t>(sigma.one(t - 1)));
    }
  }
  const std::size_t count = window_one_.size();
  while (seg_size_ < count) seg_size_ *= 2;
  seg_.assign(2 * seg_size_, INT32_MAX);
  for (std::size_t i = 0; i < count; ++i) {
    const VertexId w = seed_.nu_H + 1 + static_cast<VertexId>(i);
    seg_[seg_size_ + i] = static_cast<std::int32_t>(w - window_one_[i]);
  }
  for (std::size_t i = seg_size_ - 1; i >= 1; --i) {
    seg_[i] = std::min(seg_[2 * i], seg_[2 * i + 1]);
  }
  for (EdgeId f = seed_.first_edge(); f <= seed_.last_edge(); ++f) {
    seed_in_[seed_.endpoint(f)].push_back(f);
  }
}

std::pair<EdgeId, EdgeId> SigmaLayout::window(EdgeId e) const {
  const VertexId w = fixed_endpoint(e, m_);
  return {static_cast<EdgeId>(m_) * (window_one(w) - 1) + 1,
          static_cast<EdgeId>(m_) * (w - 1)};
}

std::pair<EdgeId, EdgeId> SigmaLayout::chooser_range(EdgeId f) const {
  const VertexId g = fixed_endpoint(f, m_);
  const VertexId w_lo = std::max(g + 1, seed_.nu_H + 1);
  const auto it = std::upper_bound(window_one_.begin(), window_one_.end(),
                                   static_cast<std::int32_t>(g));
  const VertexId w_hi = seed_.nu_H + (it - window_one_.begin());
  if (w_hi < w_lo) return {1, 0};
  return {static_cast<EdgeId>(m_) * (w_lo - 1) + 1,
          static_cast<EdgeId>(m_) * w_hi};
}

std::int64_t SigmaLayout::min_window(VertexId a, VertexId b) const {
  std::size_t lo = static_cast<std::size_t>(a - seed_.nu_H - 1) + seg_size_;
  std::size_t hi = static_cast<std::size_t>(b - seed_.nu_H - 1) + seg_size_ + 1;
  std::int32_t best = INT32_MAX;
  while (lo < hi) {
    if (lo & 1) best = std::min(best, seg_[lo++]);
    if (hi & 1) best = std::min(best, seg_[--hi]);
    lo /= 2;
    hi /= 2;
  }
  return best;
}

const std::vector<EdgeId>& SigmaLayout::seed_in_edges(VertexId v) const {
  static const std::vector<EdgeId> kNone;
  const auto it = seed_in_.find(v);
  return it == seed_in_.end() ? kNone : it->second;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kSmall: return "small";
    case Verdict::kLarge: return "large";
    case Verdict::kUndecided: return "undecided";
  }
  return "?";
}

MasterGraph::MasterGraph(std::shared_ptr<const SigmaLayout> layout,
                         std::uint64_t seed)
    : layout_(std::move(layout)), rng_(seed) {
  const SigmaLayout& L = *layout_;
  phi_.assign(static_cast<std::size_t>(L.last_edge() - L.first_free() + 1),
              kUnassigned);
  revealed_.assign(L.code_count(), 0);
  fenwick_ = Fenwick(L.code_count());
}

MasterGraph::MasterGraph(const Sigma& sigma, const SeedGraph& seed_graph,
                         std::uint64_t seed)
    : MasterGraph(std::make_shared<const SigmaLayout>(sigma, seed_graph),
                  seed) {}

void MasterGraph::check_free(EdgeId e) const {
  if (e < layout_->first_free() || e > layout_->last_edge()) {
    throw Error(ErrorCode::kQuery,
                "edge " + std::to_string(e) + " is not a free edge of Gamma");
  }
}

void MasterGraph::check_half_edge(HalfEdge h) const {
  if (!layout_->valid_edge(h.edge) || (h.side != 1 && h.side != 2)) {
    throw Error(ErrorCode::kQuery, "no such half-edge");
  }
}

bool MasterGraph::is_assigned(EdgeId e) const {
  if (e < layout_->first_free() || e > layout_->last_edge()) return false;
  return phi_[e - layout_->first_free()] != kUnassigned;
}

std::optional<HalfEdge> MasterGraph::choice(EdgeId e) const {
  if (!is_assigned(e)) return std::nullopt;
  return layout_->half_edge(phi_[e - layout_->first_free()]);
}

bool MasterGraph::is_revealed(HalfEdge h) const {
  check_half_edge(h);
  return revealed_[layout_->code(h)] != 0;
}

std::int64_t MasterGraph::omega_size(EdgeId e) const {
  check_free(e);
  if (is_assigned(e)) {
    throw Error(ErrorCode::kQuery, "omega is only defined for unassigned edges");
  }
  const auto [lo, hi] = layout_->window(e);
  const std::int64_t total = 2 * (hi - lo + 1);
  return total - fenwick_.range(layout_->code({lo, 1}), layout_->code({hi, 2}));
}

std::int64_t MasterGraph::omega_size_by_scan(EdgeId e) const {
  check_free(e);
  const auto [lo, hi] = layout_->window(e);
  std::int64_t count = 0;
  for (EdgeId f = lo; f <= hi; ++f) {
    for (int side : {1, 2}) count += revealed_[layout_->code({f, side})] == 0;
  }
  return count;
}

void MasterGraph::set_choice(EdgeId e, HalfEdge h) {
  const std::uint32_t c = layout_->code(h);
  phi_[e - layout_->first_free()] = c;
  choosers_[c].push_back(e);
  ++assigned_total_;
}

void MasterGraph::mark_revealed(HalfEdge h) {
  const std::uint32_t c = layout_->code(h);
  revealed_[c] = 1;
  revealed_list_.push_back(c);
  fenwick_.add(c, 1);
  ++revealed_total_;
}

HalfEdge MasterGraph::assign(EdgeId e) {
  check_free(e);
  if (is_assigned(e)) {
    throw Error(ErrorCode::kProtocol, "edge " + std::to_string(e) + " is already assigned");
  }
  const auto [lo, hi] = layout_->window(e);
  const std::uint32_t c_lo = layout_->code({lo, 1});
  const std::uint32_t c_hi = layout_->code({hi, 2});
  const std::int64_t total = c_hi - c_lo + 1;
  const std::int64_t taken = fenwick_.range(c_lo, c_hi);
  const std::int64_t omega = total - taken;
  if (omega <= 0) {
    throw Error(ErrorCode::kAssignment,
                "every candidate of edge " + std::to_string(e) + " is revealed");
  }
  std::uint32_t pick;
  if (2 * taken > total) {
    const std::int64_t before = c_lo - fenwick_.prefix(static_cast<std::int64_t>(c_lo) - 1);
    pick = static_cast<std::uint32_t>(
        fenwick_.kth_unmarked(before + static_cast<std::int64_t>(rng_.below(omega))));
  } else {
    do {
      pick = c_lo + static_cast<std::uint32_t>(rng_.below(total));
    } while (revealed_[pick]);
  }
  const HalfEdge h = layout_->half_edge(pick);
  set_choice(e, h);
  trace_assign(e, h);
  return h;
}

std::vector<EdgeId> MasterGraph::reveal(HalfEdge h) { return reveal_impl(h, false); }

std::vector<EdgeId> MasterGraph::reveal_by_scan(HalfEdge h) {
  return reveal_impl(h, true);
}

std::vector<EdgeId> MasterGraph::reveal_impl(HalfEdge h, bool scan) {
  check_half_edge(h);
  if (revealed_[layout_->code(h)]) {
    throw Error(ErrorCode::kProtocol, "half-edge already revealed");
  }
  const SigmaLayout& L = *layout_;
  const int m = L.m();
  std::vector<EdgeId> adopters;
  const auto [lo, hi] = L.chooser_range(h.edge);

  auto visit = [&](EdgeId e, double accept_scale) {
    if (is_assigned(e)) return;
    const auto omega = static_cast<double>(omega_size(e));
    if (rng_.uniform() * omega < accept_scale) {
      set_choice(e, h);
      adopters.push_back(e);
    }
  };

  if (lo <= hi) {
    if (scan) {
      for (EdgeId e = lo; e <= hi; ++e) visit(e, 1.0);
    } else {
      // Geometric skipping over vertex blocks. Windows grow monotonically,
      // so every window in a block lies inside [window(first).lo,
      // window(last).hi]; with r revealed half-edges there, each candidate
      // has |Omega| >= 2m*Lmin - r =: d. 1/d dominates its adoption
      // probability and a landing is accepted with probability d/|Omega|.
      const VertexId w_lo = fixed_endpoint(lo, m);
      const VertexId w_hi = fixed_endpoint(hi, m);
      for (VertexId a = w_lo; a <= w_hi;) {
        const VertexId b = std::min(w_hi, a + a / 16);
        const EdgeId first = static_cast<EdgeId>(m) * (a - 1) + 1;
        const EdgeId last = static_cast<EdgeId>(m) * b;
        const EdgeId span_lo = L.window(first).first;
        const EdgeId span_hi = L.window(last).second;
        const std::int64_t r =
            fenwick_.range(L.code({span_lo, 1}), L.code({span_hi, 2}));
        const std::int64_t d = 2 * m * L.min_window(a, b) - r;
        if (d <= 1) {
          for (EdgeId e = first; e <= last; ++e) visit(e, 1.0);
        } else {
          const double u = 1.0 / static_cast<double>(d);
          EdgeId pos = first - 1;
          for (;;) {
            const std::uint64_t skip = rng_.geometric_failures(u);
            if (skip >= static_cast<std::uint64_t>(last - pos)) break;
            pos += static_cast<EdgeId>(skip) + 1;
            visit(pos, static_cast<double>(d));
          }
        }
        a = b + 1;
      }
    }
  }
  mark_revealed(h);
  trace_reveal(h, adopters);
  return adopters;
}

const std::vector<EdgeId>& MasterGraph::choosers(HalfEdge h) const {
  static const std::vector<EdgeId> kNone;
  check_half_edge(h);
  const auto it = choosers_.find(layout_->code(h));
  return it == choosers_.end() ? kNone : it->second;
}

VertexId MasterGraph::resolve_endpoint(EdgeId e, int* hops) {
  const SigmaLayout& L = *layout_;
  if (!L.valid_edge(e)) throw Error(ErrorCode::kQuery, "no such edge");
  int count = 0;
  VertexId v = 0;
  if (L.is_seed(e)) {
    v = L.seed_endpoint(e);
  } else {
    EdgeId cur = e;
    for (;;) {
      const HalfEdge h = is_assigned(cur) ? *choice(cur) : assign(cur);
      ++count;
      if (h.side == 2) {
        v = fixed_endpoint(h.edge, L.m());
        break;
      }
      if (L.is_seed(h.edge)) {
        v = L.seed_endpoint(h.edge);
        break;
      }
      cur = h.edge;
    }
  }
  if (hops) *hops = count;
  return v;
}

ExposeResult MasterGraph::expose(HalfEdge h, std::int64_t budget) {
  check_half_edge(h);
  if (is_revealed(h)) throw Error(ErrorCode::kProtocol, "half-edge already revealed");
  struct Node {
    std::size_t index;
    HalfEdge half;
  };
  ExposeResult out;
  out.tree.push_back({"0", h.edge});
  out.en_count = layout_->in_En(h.edge) ? 1 : 0;
  std::vector<Node> stack{{0, h}};
  while (!stack.empty()) {
    const Node cur = stack.back();
    stack.pop_back();
    // A (e, 1) revealed by an earlier operation has no new adopters to find.
    if (revealed_[layout_->code(cur.half)]) continue;
    const std::vector<EdgeId> kids = reveal(cur.half);
    const std::string parent = out.tree[cur.index].label;
    const std::size_t first = out.tree.size();
    for (std::size_t j = 0; j < kids.size(); ++j) {
      out.tree.push_back({parent + "." + std::to_string(j + 1), kids[j]});
      if (layout_->in_En(kids[j])) ++out.en_count;
    }
    // Reverse push so the smallest label is processed first.
    for (std::size_t j = kids.size(); j-- > 0;) {
      stack.push_back({first + j, {kids[j], 1}});
    }
    if (static_cast<std::int64_t>(out.tree.size()) > budget) {
      out.capped = true;
      break;
    }
  }
  return out;
}

ComponentResult MasterGraph::component_search(VertexId v0,
                                              const SearchOptions& opts) {
  const SigmaLayout& L = *layout_;
  const int m = L.m();
  if (v0 < 1 || v0 > L.nu_n()) throw Error(ErrorCode::kParameter, "v0 out of range");

  ComponentResult res;
  std::unordered_set<EdgeId> C;
  std::deque<EdgeId> X;
  std::unordered_set<std::uint32_t> expanded;
  std::vector<HalfEdge> work;
  bool stop = false;
  std::int64_t new_x = 0;
  std::int64_t new_y = 0;

  auto counts_in_Ec = [&](std::uint32_t c) {
    const HalfEdge he = L.half_edge(c);
    return he.edge > opts.ec_threshold && (he.side == 1 || !revealed_[c ^ 1u]);
  };
  for (std::uint32_t c : revealed_list_) res.revealed_in_Ec += counts_in_Ec(c);

  auto bundle_first = [&](EdgeId e) {
    return static_cast<EdgeId>(m) * (fixed_endpoint(e, m) - 1) + 1;
  };
  // Puts the bundle of e into C; members other than e (or all, when
  // include_self) also go to X.
  auto add_bundle = [&](EdgeId e, bool include_self) {
    const EdgeId first = bundle_first(e);
    for (EdgeId f = first; f < first + m; ++f) {
      if (C.insert(f).second && (include_self || f != e)) {
        X.push_back(f);
        ++new_x;
      }
    }
  };
  // e belongs to the tree being explored.
  auto found = [&](EdgeId e) {
    work.push_back({e, 1});
    if (L.in_En(e)) {
      work.push_back({e, 2});
      if (!C.count(e)) {
        ++new_y;
        add_bundle(e, false);
      }
    }
  };
  // Seeds the exploration of all edges whose random endpoint is v.
  auto roots = [&](VertexId v) {
    if (v >= L.one_H()) {
      for (EdgeId f = static_cast<EdgeId>(m) * (v - 1) + 1; f <= static_cast<EdgeId>(m) * v; ++f) {
        work.push_back({f, 2});
      }
    }
    for (EdgeId f : L.seed_in_edges(v)) found(f);
  };
  auto expand = [&] {
    while (!work.empty() && !stop) {
      const HalfEdge h = work.back();
      work.pop_back();
      const std::uint32_t c = L.code(h);
      if (!expanded.insert(c).second) continue;
      if (!revealed_[c]) {
        const bool counted = counts_in_Ec(c);
        reveal(h);
        if (counted && ++res.revealed_in_Ec > opts.reveal_cap) {
          stop = true;
          res.verdict = Verdict::kLarge;
        }
      }
      const std::vector<EdgeId> kids = choosers(h);
      for (EdgeId e : kids) found(e);
    }
  };
  auto in_Vn = [&](VertexId v) { return v >= L.one_n() && v <= L.nu_n(); };

  if (in_Vn(v0)) {
    add_bundle(static_cast<EdgeId>(m) * v0, true);
  } else {
    roots(v0);
    expand();
  }

  std::int64_t t = 0;
  while (!stop && !X.empty()) {
    if (t >= opts.round_cap) {
      res.verdict = Verdict::kUndecided;
      stop = true;
      break;
    }
    const EdgeId x0 = X.front();
    X.pop_front();
    ++t;
    new_x = 0;
    new_y = 0;
    work.clear();
    work.push_back({x0, 1});
    work.push_back({x0, 2});
    bool x1_in_En = false;
    if (L.is_seed(x0)) {
      const VertexId v = L.seed_endpoint(x0);
      if (in_Vn(v)) {
        add_bundle(static_cast<EdgeId>(m) * v, true);
      } else {
        roots(v);
      }
    } else {
      HalfEdge cur = is_assigned(x0) ? *choice(x0) : assign(x0);
      x1_in_En = L.in_En(cur.edge);
      if (x1_in_En) {
        add_bundle(cur.edge, true);
      } else {
        while (cur.side == 1 && !L.is_seed(cur.edge)) {
          work.push_back({cur.edge, 1});
          const EdgeId next = cur.edge;
          cur = is_assigned(next) ? *choice(next) : assign(next);
        }
        roots(cur.side == 2 ? fixed_endpoint(cur.edge, m) : L.seed_endpoint(cur.edge));
      }
    }
    for (EdgeId f : L.seed_in_edges(fixed_endpoint(x0, m))) found(f);
    expand();

    const auto xs = static_cast<std::int64_t>(X.size());
    const auto cs = static_cast<std::int64_t>(C.size());
    res.stats.push_back({t, xs, cs, x1_in_En, new_x, new_y});
    if (m >= 2 && !(cs <= 2 * (xs + t) && xs + t <= cs)) ++res.identity_violations;
  }
  res.rounds = t;
  if (!stop) res.verdict = Verdict::kSmall;
  res.edges.assign(C.begin(), C.end());
  std::sort(res.edges.begin(), res.edges.end());
  return res;
}

GraphState MasterGraph::realize_full() {
  const SigmaLayout& L = *layout_;
  for (EdgeId e = L.first_free(); e <= L.last_edge(); ++e) {
    if (!is_assigned(e)) assign(e);
  }
  const EdgeId base = L.base();
  std::vector<VertexId> v(static_cast<std::size_t>(L.last_edge() - base + 1));
  for (EdgeId e = base; e <= L.last_edge(); ++e) {
    if (L.is_seed(e)) {
      v[e - base] = L.seed_endpoint(e);
      continue;
    }
    const HalfEdge h = *choice(e);
    v[e - base] = h.side == 2 ? fixed_endpoint(h.edge, L.m()) : v[h.edge - base];
  }
  std::vector<VertexId> live(v.begin() + (L.en_first() - base), v.end());
  return GraphState(L.m(), L.one_n(), L.nu_n(), live);
}

void MasterGraph::trace_assign(EdgeId e, HalfEdge h) {
  if (!trace_) return;
  nlohmann::json j = {{"op", "assign"}, {"edge", e}, {"outcome", {h.edge, h.side}}};
  *trace_ << j.dump() << '\n';
}

void MasterGraph::trace_reveal(HalfEdge h, const std::vector<EdgeId>& adopters) {
  if (!trace_) return;
  nlohmann::json j = {{"op", "reveal"}, {"half_edge", {h.edge, h.side}}, {"outcome", adopters}};
  *trace_ << j.dump() << '\n';
}

void MasterGraph::replay(std::istream& in) {
  const SigmaLayout& L = *layout_;
  std::string line;
  std::int64_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kProtocol,
                "trace line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("op")) fail("malformed");
    const std::string op = j["op"];
    if (op == "assign") {
      const EdgeId e = j["edge"];
      const HalfEdge h{j["outcome"][0].get<EdgeId>(), j["outcome"][1].get<int>()};
      check_free(e);
      check_half_edge(h);
      const auto [lo, hi] = L.window(e);
      if (is_assigned(e)) fail("edge already assigned");
      if (h.edge < lo || h.edge > hi || revealed_[L.code(h)]) fail("choice outside Omega");
      set_choice(e, h);
    } else if (op == "reveal") {
      const HalfEdge h{j["half_edge"][0].get<EdgeId>(), j["half_edge"][1].get<int>()};
      check_half_edge(h);
      if (revealed_[L.code(h)]) fail("half-edge already revealed");
      const auto [lo, hi] = L.chooser_range(h.edge);
      for (EdgeId e : j["outcome"].get<std::vector<EdgeId>>()) {
        if (e < lo || e > hi || is_assigned(e)) fail("adopter not a candidate");
        set_choice(e, h);
      }
      mark_revealed(h);
    } else {
      fail("unknown op " + op);
    }
  }
}

}  // namespace paged
