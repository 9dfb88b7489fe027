#include "paged/process.hpp"

#include <cmath>
#include <sstream>

#include "paged/error.hpp"

namespace paged {

VertexId SeedGraph::endpoint(EdgeId e) const {
  const VertexId v = fixed_endpoint(e, m);
  return out_edges[v - one_H][(e - 1) % m];
}

void SeedGraph::validate() const {
  if (m < 1) throw Error(ErrorCode::kParameter, "seed graph: m must be >= 1");
  if (!(m < one_H && one_H <= nu_H)) {
    throw Error(ErrorCode::kParameter, "seed graph: need m < 1_H <= nu_H");
  }
  if (static_cast<VertexId>(out_edges.size()) != nu_H - one_H + 1) {
    throw Error(ErrorCode::kParameter, "seed graph: wrong vertex count");
  }
  for (VertexId v = one_H; v <= nu_H; ++v) {
    const auto& outs = out_edges[v - one_H];
    if (static_cast<int>(outs.size()) != m) {
      throw Error(ErrorCode::kParameter, "seed graph: out-degree must be m");
    }
    for (VertexId w : outs) {
      if (w < 1 || w >= v) {
        throw Error(ErrorCode::kParameter,
                    "seed graph: out-edges must point to older vertices");
      }
    }
  }
}

SeedGraph default_seed_graph(int m, int N) {
  if (m < 1 || N < 1) {
    throw Error(ErrorCode::kParameter, "seed graph needs m >= 1 and N >= 1");
  }
  SeedGraph g;
  g.m = m;
  g.one_H = m + 1;
  g.nu_H = g.one_H + N;
  for (VertexId v = g.one_H; v <= g.nu_H; ++v) {
    std::vector<VertexId> outs;
    for (int i = 1; i <= m; ++i) outs.push_back(v - i);
    g.out_edges.push_back(std::move(outs));
  }
  return g;
}

Sigma::Sigma(double p, std::int64_t n, VertexId one_H, VertexId nu_H,
             std::vector<std::uint8_t> bits)
    : p_(p), n_(n), one_H_(one_H), nu_H_(nu_H), bits_(std::move(bits)) {
  if (n_ <= t0()) throw Error(ErrorCode::kParameter, "need n > t0");
  if (static_cast<std::int64_t>(bits_.size()) != n_ - t0()) {
    throw Error(ErrorCode::kParameter, "sigma length must be n - t0");
  }
  prefix_.resize(bits_.size() + 1);
  prefix_[0] = 0;
  for (std::size_t u = 0; u < bits_.size(); ++u) {
    prefix_[u + 1] = prefix_[u] + (bits_[u] ? 1 : 0);
  }
  for (std::int64_t t = t0() + 1; t <= n_; ++t) {
    if (nu(t) <= one(t)) {
      first_infeasible_ = t;
      break;
    }
  }
}

bool Sigma::concentrated(double omega) const {
  if (!(omega > 1)) throw Error(ErrorCode::kParameter, "omega must exceed 1");
  std::int64_t start = static_cast<std::int64_t>(std::ceil(n_ / omega));
  start = std::max<std::int64_t>({start, t0(), 2});
  for (std::int64_t t = start; t <= n_; ++t) {
    const double td = static_cast<double>(t);
    if (std::fabs(nu(t) - p_ * td) > std::sqrt(td) * std::log(td)) return false;
  }
  return true;
}

Sigma draw_sigma(double p, std::int64_t n, const SeedGraph& seed_graph,
                 std::uint64_t seed) {
  if (!(p > 0 && p <= 1)) throw Error(ErrorCode::kParameter, "p out of range");
  const std::int64_t t0 = seed_graph.t0();
  if (n <= t0) throw Error(ErrorCode::kParameter, "need n > t0");
  Rng rng(seed);
  std::vector<std::uint8_t> bits(n - t0);
  for (auto& b : bits) b = rng.bernoulli(p) ? 1 : 0;
  return Sigma(p, n, seed_graph.one_H, seed_graph.nu_H, std::move(bits));
}

FeasibleSigma draw_feasible_sigma(double p, std::int64_t n,
                                  const SeedGraph& seed_graph,
                                  std::uint64_t seed, DepletedPolicy policy,
                                  int retry_cap) {
  const int limit = policy == DepletedPolicy::kAbort ? 1 : retry_cap;
  std::int64_t last_failure = 0;
  for (int attempt = 0; attempt < limit; ++attempt) {
    Sigma s = draw_sigma(p, n, seed_graph, derive_seed(seed, attempt));
    if (s.feasible()) return {std::move(s), attempt + 1};
    last_failure = s.first_infeasible();
  }
  throw Error(ErrorCode::kRun,
              "no feasible sigma after " + std::to_string(limit) +
                  " attempt(s); last one fails at t=" +
                  std::to_string(last_failure));
}

void HalfEdgeSampler::insert(std::uint32_t code) {
  if (code >= pos_.size()) pos_.resize(std::max<std::size_t>(code + 1, pos_.size() * 2), kAbsent);
  pos_[code] = static_cast<std::uint32_t>(entries_.size());
  entries_.push_back(code);
}

void HalfEdgeSampler::remove(std::uint32_t code) {
  const std::uint32_t at = pos_[code];
  const std::uint32_t last = entries_.back();
  entries_[at] = last;
  pos_[last] = at;
  entries_.pop_back();
  pos_[code] = kAbsent;
}

bool HalfEdgeSampler::check_integrity() const {
  std::size_t present = 0;
  for (std::size_t c = 0; c < pos_.size(); ++c) {
    if (pos_[c] == kAbsent) continue;
    ++present;
    if (pos_[c] >= entries_.size() || entries_[pos_[c]] != c) return false;
  }
  return present == entries_.size();
}

GraphState::GraphState(const SeedGraph& seed_graph)
    : m_(seed_graph.m),
      one_(seed_graph.one_H),
      nu_(seed_graph.nu_H),
      base_(seed_graph.first_edge()) {
  seed_graph.validate();
  degree_.assign(nu_ + 1, 0);
  for (EdgeId e = base_; e <= seed_graph.last_edge(); ++e) {
    add_edge(e, seed_graph.endpoint(e));
  }
}

GraphState::GraphState(int m, VertexId one, VertexId nu,
                       const std::vector<VertexId>& random_endpoints)
    : m_(m), one_(one), nu_(nu), base_(static_cast<EdgeId>(m) * (one - 1) + 1) {
  if (static_cast<std::int64_t>(random_endpoints.size()) != live_edge_count()) {
    throw Error(ErrorCode::kParameter, "endpoint list does not match E_n");
  }
  degree_.assign(std::max<VertexId>(nu_, 0) + 1, 0);
  for (std::size_t i = 0; i < random_endpoints.size(); ++i) {
    add_edge(base_ + static_cast<EdgeId>(i), random_endpoints[i]);
  }
}

VertexId GraphState::vertex_of(std::uint32_t code) const {
  const EdgeId e = base_ + (code >> 1);
  return (code & 1u) ? fixed_endpoint(e, m_) : endpoint_[e - base_];
}

void GraphState::add_edge(EdgeId e, VertexId target) {
  const std::size_t idx = static_cast<std::size_t>(e - base_);
  if (endpoint_.size() <= idx) endpoint_.resize(idx + 1, 0);
  endpoint_[idx] = static_cast<std::uint32_t>(target);
  const VertexId f = fixed_endpoint(e, m_);
  if (static_cast<VertexId>(degree_.size()) <= f) degree_.resize(f + 1, 0);
  ++degree_[f];
  ++degree_[target];
  const auto code = static_cast<std::uint32_t>(2 * (e - base_));
  sampler_.insert(code);
  sampler_.insert(code + 1);
}

void GraphState::add_vertex(Rng& rng, std::int64_t t) {
  if (sampler_.size() == 0) throw DepletedError(t);
  VertexId targets[64];
  std::vector<VertexId> many;
  VertexId* out = targets;
  if (m_ > 64) {
    many.resize(m_);
    out = many.data();
  }
  for (int i = 0; i < m_; ++i) out[i] = vertex_of(sampler_.sample(rng));
  ++nu_;
  const EdgeId first = static_cast<EdgeId>(m_) * (nu_ - 1) + 1;
  for (int i = 0; i < m_; ++i) add_edge(first + i, out[i]);
}

void GraphState::delete_oldest(std::int64_t t) {
  if (one_ > nu_) throw DepletedError(t);
  const EdgeId first = static_cast<EdgeId>(m_) * (one_ - 1) + 1;
  for (int i = 0; i < m_; ++i) {
    const EdgeId e = first + i;
    const auto code = static_cast<std::uint32_t>(2 * (e - base_));
    sampler_.remove(code);
    sampler_.remove(code + 1);
    --degree_[one_];
    --degree_[endpoint_[e - base_]];
  }
  ++one_;
}

std::string GraphState::dump() const {
  std::ostringstream os;
  os << "paged v1 m=" << m_ << " one_t=" << one_ << " nu_t=" << nu_ << "\n";
  for (EdgeId e = first_live_edge(); e <= last_live_edge(); ++e) {
    os << e << ' ' << fixed_endpoint(e, m_) << ' ' << random_endpoint(e)
       << "\n";
  }
  return os.str();
}

bool GraphState::check_integrity() const {
  if (!sampler_.check_integrity()) return false;
  if (static_cast<std::int64_t>(sampler_.size()) != 2 * live_edge_count()) {
    return false;
  }
  std::vector<std::int64_t> deg(degree_.size(), 0);
  for (EdgeId e = first_live_edge(); e <= last_live_edge(); ++e) {
    const VertexId a = fixed_endpoint(e, m_);
    const VertexId b = random_endpoint(e);
    if (a == b) return false;
    ++deg[a];
    ++deg[b];
    const auto code = static_cast<std::uint32_t>(2 * (e - base_));
    if (!sampler_.contains(code) || !sampler_.contains(code + 1)) return false;
  }
  for (std::size_t v = 0; v < deg.size(); ++v) {
    if (deg[v] != degree_[v]) return false;
  }
  return true;
}

GraphState run_process(const SeedGraph& seed_graph, const Sigma& sigma,
                       std::uint64_t seed) {
  if (sigma.one_H() != seed_graph.one_H || sigma.nu_H() != seed_graph.nu_H) {
    throw Error(ErrorCode::kParameter, "sigma was drawn for another seed graph");
  }
  GraphState state(seed_graph);
  Rng rng(seed);
  const std::int64_t t0 = sigma.t0();
  for (std::int64_t t = t0 + 1; t <= sigma.n(); ++t) {
    if (sigma.bit(t - t0)) {
      state.add_vertex(rng, t);
    } else {
      state.delete_oldest(t);
    }
#ifndef NDEBUG
    if ((t - t0) % 10000 == 0 && !state.check_integrity()) {
      throw Error(ErrorCode::kRun, "sampler integrity check failed");
    }
#endif
  }
  return state;
}

}  // namespace paged
