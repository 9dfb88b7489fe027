#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paged/theory.hpp"

namespace paged {

struct CmjBirth {
  std::int64_t parent;  // -1 for the root
  std::int32_t ordinal;  // j for label sj
  double time;
};

class CmjTrace {
 public:
  CmjTrace(double alpha, double tau_max, std::uint64_t seed,
           std::vector<CmjBirth> births, bool capped);

  double alpha() const { return alpha_; }
  double tau_max() const { return tau_max_; }
  std::uint64_t seed() const { return seed_; }
  bool capped() const { return capped_; }
  const std::vector<CmjBirth>& births() const { return births_; }
  std::size_t size() const { return births_.size(); }

  // Dot-separated label, e.g. "0.2.1" for the first child of the second
  // child of the root.
  std::string label(std::size_t i) const;

  // Processes with birth time in (tau - 1, tau].
  std::int64_t alive_at(double tau) const;
  // Processes with birth time <= tau.
  std::int64_t born_before(double tau) const;

 private:
  void check_query(double tau) const;

  double alpha_;
  double tau_max_;
  std::uint64_t seed_;
  std::vector<CmjBirth> births_;
  std::vector<double> sorted_times_;
  bool capped_;
};

constexpr std::int64_t kDefaultBirthCap = 10'000'000;

CmjTrace simulate_cmj(double alpha, double tau_max, std::uint64_t seed,
                      std::int64_t birth_cap = kDefaultBirthCap);

// b(tau)/B(n)-scale quantile over `runs` traces at tau = log_gamma n.
struct LambdaCalibration {
  double lambda;
  double scale;
  std::vector<std::int64_t> births;  // b(log_gamma n) per run
};

LambdaCalibration calibrate_lambda(const ModelParams& params, std::int64_t n,
                                   int runs, double quantile,
                                   std::uint64_t seed, unsigned threads = 0);

// Nearest-rank empirical quantile of unsorted data.
double empirical_quantile(std::vector<double> values, double quantile);

}  // namespace paged
