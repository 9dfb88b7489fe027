#pragma once

#include <cstdint>
#include <vector>

#include "paged/process.hpp"
#include "paged/theory.hpp"

namespace paged {

struct DegreeHistogram {
  std::vector<std::int64_t> counts;  // counts[k]: vertices of degree k
  std::int64_t n = 0;                // time horizon, the density divisor
  std::int64_t vertex_count = 0;
  std::int64_t live_edges = 0;

  double density(std::size_t k) const;
};

// Tally over vertices 1..nu_n, or only 1_n..nu_n when current_only.
DegreeHistogram degree_histogram(const GraphState& state, std::int64_t n,
                                 bool current_only = false);

struct ComponentReport {
  std::vector<std::int64_t> sizes;  // non-isolated components, descending
  std::int64_t giant = 0;
  std::int64_t second = 0;
  std::int64_t isolated = 0;
  std::int64_t vertex_count = 0;
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t size);
  std::size_t find(std::size_t x);
  bool unite(std::size_t a, std::size_t b);

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

// Components over vertices 1..nu_n joined by live edges.
ComponentReport components(const GraphState& state);
// Component id per vertex (index 0 unused); isolated vertices get their own.
std::vector<std::int64_t> component_labels(const GraphState& state);

struct HistogramRow {
  int k;
  std::int64_t count;
  double empirical;
  double theory;
  double rel_error;
};

struct HistogramComparison {
  std::vector<HistogramRow> rows;
  double tv = 0.0;  // half the L1 distance over [k_lo, k_hi]
};

HistogramComparison compare_histogram(const DegreeHistogram& h,
                                      const DegreeLaw& law, int k_lo, int k_hi);

struct TailFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

// Least squares of ln mass against ln k (power) or k (exponential) over
// k in [k_lo, k_hi] with mass[k] > 0.
TailFit fit_power_tail(const std::vector<double>& mass, int k_lo, int k_hi);
TailFit fit_exponential_tail(const std::vector<double>& mass, int k_lo, int k_hi);
// Histogram variant: skips k with fewer than min_count vertices.
TailFit fit_power_tail(const DegreeHistogram& h, int k_lo, int k_hi,
                       std::int64_t min_count = 50);

// Total variation distance between two pmfs (shorter one padded with 0).
double total_variation(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> empirical_pmf(const std::vector<std::int64_t>& values);

struct VertexDegreeReport {
  double tau = 0.0;
  double p_tau = 0.0;
  double q_tau = 0.0;
  std::vector<std::int64_t> degrees;  // by run
  std::vector<double> empirical;
  std::vector<double> theory;
  double tv = 0.0;
  std::int64_t sigma_attempts = 0;
};

// tau = log_gamma(pn/v); rejects v < n/omega and tau within 0.02 of 0 or 1.
double vertex_tau(const ModelParams& params, std::int64_t n, VertexId v);

VertexDegreeReport vertex_degree_experiment(const ModelParams& params,
                                            std::int64_t n, VertexId v,
                                            int runs, std::uint64_t seed,
                                            int seed_graph_N = 4,
                                            unsigned threads = 0);

}  // namespace paged
