#include "paged/cmj.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "paged/error.hpp"
#include "paged/parallel.hpp"
#include "paged/rng.hpp"

namespace paged {

CmjTrace::CmjTrace(double alpha, double tau_max, std::uint64_t seed,
                   std::vector<CmjBirth> births, bool capped)
    : alpha_(alpha),
      tau_max_(tau_max),
      seed_(seed),
      births_(std::move(births)),
      capped_(capped) {
  sorted_times_.reserve(births_.size());
  for (const auto& b : births_) sorted_times_.push_back(b.time);
  std::sort(sorted_times_.begin(), sorted_times_.end());
}

std::string CmjTrace::label(std::size_t i) const {
  std::vector<std::int32_t> path;
  for (std::int64_t at = static_cast<std::int64_t>(i); births_[at].parent >= 0;
       at = births_[at].parent) {
    path.push_back(births_[at].ordinal);
  }
  std::string out = "0";
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    out += '.';
    out += std::to_string(*it);
  }
  return out;
}

void CmjTrace::check_query(double tau) const {
  if (!(tau >= 0 && tau <= tau_max_)) {
    throw Error(ErrorCode::kQuery, "tau outside [0, tau_max]");
  }
}

std::int64_t CmjTrace::born_before(double tau) const {
  check_query(tau);
  return std::upper_bound(sorted_times_.begin(), sorted_times_.end(), tau) -
         sorted_times_.begin();
}

std::int64_t CmjTrace::alive_at(double tau) const {
  check_query(tau);
  const auto hi =
      std::upper_bound(sorted_times_.begin(), sorted_times_.end(), tau);
  const auto lo =
      std::upper_bound(sorted_times_.begin(), sorted_times_.end(), tau - 1.0);
  return hi - lo;
}

CmjTrace simulate_cmj(double alpha, double tau_max, std::uint64_t seed,
                      std::int64_t birth_cap) {
  if (!(alpha > 0)) throw Error(ErrorCode::kParameter, "alpha must be > 0");
  if (!(tau_max >= 0)) throw Error(ErrorCode::kParameter, "tau_max must be >= 0");
  if (birth_cap < 1) throw Error(ErrorCode::kParameter, "birth cap must be >= 1");

  struct Pending {
    std::int64_t index;
    std::uint64_t key;
  };
  std::vector<CmjBirth> births{{-1, 0, 0.0}};
  std::deque<Pending> queue{{0, derive_seed(seed, 0)}};
  bool capped = false;
  while (!queue.empty() && !capped) {
    const Pending cur = queue.front();
    queue.pop_front();
    const double born = births[cur.index].time;
    Rng rng(cur.key);
    double clock = 0.0;
    for (std::int32_t j = 1;; ++j) {
      clock += rng.exponential(alpha);
      if (clock >= 1.0) break;
      const double t = born + clock;
      if (t > tau_max) break;
      if (static_cast<std::int64_t>(births.size()) >= birth_cap) {
        capped = true;
        break;
      }
      births.push_back({cur.index, j, t});
      queue.push_back({static_cast<std::int64_t>(births.size()) - 1,
                       derive_seed(cur.key, j)});
    }
  }
  return CmjTrace(alpha, tau_max, seed, std::move(births), capped);
}

double empirical_quantile(std::vector<double> values, double quantile) {
  if (values.empty()) throw Error(ErrorCode::kParameter, "empty sample");
  std::sort(values.begin(), values.end());
  const double rank = std::ceil(quantile * static_cast<double>(values.size()));
  const std::size_t idx = static_cast<std::size_t>(
      std::clamp(rank, 1.0, static_cast<double>(values.size()))) - 1;
  return values[idx];
}

LambdaCalibration calibrate_lambda(const ModelParams& params, std::int64_t n,
                                   int runs, double quantile,
                                   std::uint64_t seed, unsigned threads) {
  if (runs < 1) throw Error(ErrorCode::kParameter, "runs must be >= 1");
  if (!(quantile > 0 && quantile <= 1)) {
    throw Error(ErrorCode::kParameter, "quantile must lie in (0, 1]");
  }
  const SpectralConstants c = spectral_constants(params);
  const double scale = b_of_n(params, c, n, 1.0);
  const double tau = std::log(static_cast<double>(n)) / std::log(params.gamma);
  LambdaCalibration out;
  out.scale = scale;
  out.births.assign(runs, 0);
  parallel_for(static_cast<std::size_t>(runs), threads, [&](std::size_t i) {
    const CmjTrace trace = simulate_cmj(params.alpha, tau, derive_seed(seed, i));
    if (trace.capped()) {
      throw Error(ErrorCode::kRun, "birth cap reached during calibration");
    }
    out.births[i] = trace.born_before(tau);
  });
  std::vector<double> b(out.births.begin(), out.births.end());
  out.lambda = empirical_quantile(std::move(b), quantile) / scale;
  return out;
}

}  // namespace paged
