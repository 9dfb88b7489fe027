#include "paged/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "paged/error.hpp"
#include "paged/parallel.hpp"
#include "paged/rng.hpp"

namespace paged {

double DegreeHistogram::density(std::size_t k) const {
  if (n <= 0) throw Error(ErrorCode::kQuery, "histogram has no horizon");
  return k < counts.size() ? static_cast<double>(counts[k]) / static_cast<double>(n) : 0.0;
}

DegreeHistogram degree_histogram(const GraphState& state, std::int64_t n,
                                 bool current_only) {
  DegreeHistogram h;
  h.n = n;
  h.live_edges = state.live_edge_count();
  const VertexId first = current_only ? state.one() : 1;
  for (VertexId v = first; v <= state.nu(); ++v) {
    const auto d = static_cast<std::size_t>(state.degree(v));
    if (d >= h.counts.size()) h.counts.resize(d + 1, 0);
    ++h.counts[d];
    ++h.vertex_count;
  }
  return h;
}

UnionFind::UnionFind(std::size_t size) : parent_(size), size_(size, 1) {
  std::iota(parent_.begin(), parent_.end(), 0u);
}

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = static_cast<std::uint32_t>(a);
  size_[a] += size_[b];
  return true;
}

namespace {

UnionFind join_live_edges(const GraphState& state) {
  UnionFind uf(static_cast<std::size_t>(state.nu() + 1));
  for (EdgeId e = state.first_live_edge(); e <= state.last_live_edge(); ++e) {
    uf.unite(static_cast<std::size_t>(fixed_endpoint(e, state.m())),
             static_cast<std::size_t>(state.random_endpoint(e)));
  }
  return uf;
}

}  // namespace

ComponentReport components(const GraphState& state) {
  UnionFind uf = join_live_edges(state);
  ComponentReport r;
  std::unordered_map<std::size_t, std::int64_t> by_root;
  for (VertexId v = 1; v <= state.nu(); ++v) {
    ++r.vertex_count;
    if (state.degree(v) == 0) {
      ++r.isolated;
    } else {
      ++by_root[uf.find(static_cast<std::size_t>(v))];
    }
  }
  for (const auto& [root, size] : by_root) r.sizes.push_back(size);
  std::sort(r.sizes.begin(), r.sizes.end(), std::greater<>());
  if (!r.sizes.empty()) r.giant = r.sizes[0];
  if (r.sizes.size() > 1) r.second = r.sizes[1];
  return r;
}

std::vector<std::int64_t> component_labels(const GraphState& state) {
  UnionFind uf = join_live_edges(state);
  std::vector<std::int64_t> label(static_cast<std::size_t>(state.nu() + 1), -1);
  for (VertexId v = 1; v <= state.nu(); ++v) {
    label[v] = static_cast<std::int64_t>(uf.find(static_cast<std::size_t>(v)));
  }
  return label;
}

HistogramComparison compare_histogram(const DegreeHistogram& h,
                                      const DegreeLaw& law, int k_lo, int k_hi) {
  if (h.n <= 0) throw Error(ErrorCode::kQuery, "empty histogram");
  if (k_lo < 0 || k_hi < k_lo || k_hi > law.k_max) {
    throw Error(ErrorCode::kQuery, "k range outside the degree law");
  }
  HistogramComparison c;
  double l1 = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    HistogramRow row;
    row.k = k;
    row.count = static_cast<std::size_t>(k) < h.counts.size() ? h.counts[k] : 0;
    row.empirical = h.density(static_cast<std::size_t>(k));
    row.theory = law.x[k];
    row.rel_error = row.theory > 0 ? std::fabs(row.empirical - row.theory) / row.theory
                                   : std::fabs(row.empirical);
    l1 += std::fabs(row.empirical - row.theory);
    c.rows.push_back(row);
  }
  c.tv = 0.5 * l1;
  return c;
}

namespace {

TailFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto npts = static_cast<int>(xs.size());
  if (npts < 2) throw Error(ErrorCode::kFit, "fewer than two usable points in the fit range");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / npts;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / npts;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < npts; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  TailFit fit;
  fit.points = npts;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (npts > 2) {
    double rss = 0;
    for (int i = 0; i < npts; ++i) {
      const double r = ys[i] - fit.intercept - fit.slope * xs[i];
      rss += r * r;
    }
    fit.stderr_slope = std::sqrt(rss / (npts - 2) / sxx);
  }
  return fit;
}

TailFit fit_tail(const std::vector<double>& mass, int k_lo, int k_hi, bool log_k) {
  if (k_lo < 1 || k_hi <= k_lo) throw Error(ErrorCode::kFit, "need 1 <= k_lo < k_hi");
  std::vector<double> xs, ys;
  for (int k = k_lo; k <= k_hi && static_cast<std::size_t>(k) < mass.size(); ++k) {
    if (mass[k] > 0) {
      xs.push_back(log_k ? std::log(static_cast<double>(k)) : static_cast<double>(k));
      ys.push_back(std::log(mass[k]));
    }
  }
  return least_squares(xs, ys);
}

}  // namespace

TailFit fit_power_tail(const std::vector<double>& mass, int k_lo, int k_hi) {
  return fit_tail(mass, k_lo, k_hi, true);
}

TailFit fit_exponential_tail(const std::vector<double>& mass, int k_lo, int k_hi) {
  return fit_tail(mass, k_lo, k_hi, false);
}

TailFit fit_power_tail(const DegreeHistogram& h, int k_lo, int k_hi,
                       std::int64_t min_count) {
  std::vector<double> mass(h.counts.size(), 0.0);
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    if (h.counts[k] >= min_count) mass[k] = h.density(k);
  }
  return fit_power_tail(mass, k_lo, k_hi);
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t len = std::max(a.size(), b.size());
  double l1 = 0;
  for (std::size_t i = 0; i < len; ++i) {
    l1 += std::fabs((i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0));
  }
  return 0.5 * l1;
}

std::vector<double> empirical_pmf(const std::vector<std::int64_t>& values) {
  std::vector<double> pmf;
  if (values.empty()) return pmf;
  const std::int64_t top = *std::max_element(values.begin(), values.end());
  pmf.assign(static_cast<std::size_t>(top + 1), 0.0);
  for (std::int64_t v : values) pmf[v] += 1.0;
  for (double& x : pmf) x /= static_cast<double>(values.size());
  return pmf;
}

double vertex_tau(const ModelParams& params, std::int64_t n, VertexId v) {
  if (n < 3 || v < 1) throw Error(ErrorCode::kConfig, "need n >= 3 and v >= 1");
  const double omega = std::log(std::log(static_cast<double>(n)));
  if (static_cast<double>(v) < static_cast<double>(n) / omega) {
    throw Error(ErrorCode::kConfig, "vertex is older than n/omega");
  }
  const double tau = std::log(params.p * static_cast<double>(n) / static_cast<double>(v)) /
                     std::log(params.gamma);
  if (tau <= 0.02 || std::fabs(tau - 1.0) <= 0.02) {
    throw Error(ErrorCode::kConfig, "tau = " + std::to_string(tau) +
                                        " falls in an excluded boundary window");
  }
  return tau;
}

VertexDegreeReport vertex_degree_experiment(const ModelParams& params,
                                            std::int64_t n, VertexId v,
                                            int runs, std::uint64_t seed,
                                            int seed_graph_N, unsigned threads) {
  if (runs < 1) throw Error(ErrorCode::kConfig, "runs must be positive");
  VertexDegreeReport r;
  r.tau = vertex_tau(params, n, v);
  const TheoryFns fns(params);
  r.p_tau = fns.p(r.tau);
  r.q_tau = fns.q(r.tau);
  const SeedGraph g = default_seed_graph(params.m, seed_graph_N);
  r.degrees.assign(static_cast<std::size_t>(runs), 0);
  std::vector<int> attempts(static_cast<std::size_t>(runs), 0);
  parallel_for(static_cast<std::size_t>(runs), threads, [&](std::size_t i) {
    const FeasibleSigma fs = draw_feasible_sigma(params.p, n, g, derive_seed(seed, i, 0),
                                                 DepletedPolicy::kResample);
    const GraphState state = run_process(g, fs.sigma, derive_seed(seed, i, 1));
    r.degrees[i] = state.degree(v);
    attempts[i] = fs.attempts;
  });
  for (int a : attempts) r.sigma_attempts += a;
  r.empirical = empirical_pmf(r.degrees);
  const double omp = fns.one_minus_p_at(static_cast<int>(std::floor(r.tau)),
                                        r.tau - std::floor(r.tau));
  const double omq = fns.one_minus_q(r.tau);
  const std::size_t len = std::max<std::size_t>(r.empirical.size() + 20, 64);
  for (std::size_t k = 0; k < len; ++k) {
    r.theory.push_back(gq_pmf(params.m, r.p_tau, omp, r.q_tau, omq, static_cast<std::int64_t>(k)));
  }
  r.tv = total_variation(r.empirical, r.theory);
  return r;
}

}  // namespace paged
