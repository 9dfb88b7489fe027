#include "paged/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "paged/error.hpp"
#include "paged/quadrature.hpp"

namespace paged {

namespace {

constexpr double kNearCritical = 1e-3;

// Bisection on a function with f(lo) and f(hi) of opposite sign.
template <class F>
double bisect(F&& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double log_binom(double n, double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

// exponent * log(base) with 0 * log(0) taken as 0.
double log_pow(double base, double exponent) {
  if (exponent == 0.0) return 0.0;
  if (base <= 0.0) return -std::numeric_limits<double>::infinity();
  return exponent * std::log(base);
}

}  // namespace

ModelParams derive_params(double p, int m) {
  if (!(p > 0.5 && p < 1.0)) {
    throw Error(ErrorCode::kParameter, "p must lie in (1/2, 1)");
  }
  if (m < 1) throw Error(ErrorCode::kParameter, "m must be at least 1");
  ModelParams params;
  params.p = p;
  params.m = m;
  params.gamma = p / (1.0 - p);
  params.mu = m * (2.0 * p - 1.0);
  params.alpha = alpha_of(p);
  return params;
}

double alpha_of(double p) {
  return p / (4.0 * p - 2.0) * std::log(p / (1.0 - p));
}

double p_of_alpha(double alpha) {
  if (!(alpha > 0.5)) {
    throw Error(ErrorCode::kParameter, "alpha must exceed 1/2");
  }
  return bisect([alpha](double p) { return alpha_of(p) - alpha; },
                0.5 + 1e-12, 1.0 - 1e-15);
}

double solve_p0() {
  return bisect([](double p) { return alpha_of(p) - 1.0; }, 0.5 + 1e-9,
                1.0 - 1e-9);
}

double solve_zeta(double alpha) {
  if (!(alpha > 0.5)) {
    throw Error(ErrorCode::kParameter, "alpha must exceed 1/2");
  }
  if (alpha == 1.0) {
    throw Error(ErrorCode::kUndefinedConstant, "zeta is undefined at alpha=1");
  }
  // ln z + alpha (1 - z): same sign as z e^{alpha(1-z)} - 1.
  auto g = [alpha](double z) { return std::log(z) + alpha * (1.0 - z); };
  if (alpha > 1.0) return bisect(g, 1e-300, 1.0 / alpha);
  const double lo =
      std::max(1.0 / alpha, 1.0 - 1.0 / alpha + 1.0 / (alpha * alpha));
  double hi = 2.0 * lo;
  while (g(hi) > 0.0) hi *= 2.0;
  return bisect(g, lo, hi);
}

SpectralConstants spectral_constants(const ModelParams& params) {
  SpectralConstants c;
  c.alpha = params.alpha;
  c.zeta = solve_zeta(params.alpha);
  const double a = c.alpha;
  const double z = c.zeta;
  c.beta = 1.0 / (1.0 - a * z);
  if (a < 1.0) {
    c.lambda1 = (1.0 - a) * (1.0 - a) / (a * z - 1.0);
    c.lambda2 = (1.0 - a) * (z - 1.0) / (a * z - 1.0);
  } else {
    c.eta = -std::log(params.gamma) / std::log(z);
    c.lambda3 = 1.0 - a * z;
    c.lambda4 = (1.0 - z) * (1.0 - a * z) / (a - 1.0);
  }
  return c;
}

std::vector<double> b_sequence(double alpha, int K) {
  if (K < 0) throw Error(ErrorCode::kParameter, "K must be nonnegative");
  std::vector<double> pf(K + 1);
  pf[0] = 1.0;
  for (int i = 1; i <= K; ++i) pf[i] = pf[i - 1] * (-alpha) / i;
  std::vector<double> b(K + 1);
  b[0] = 1.0;
  const double ea = std::exp(alpha);
  for (int k = 1; k <= K; ++k) {
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += b[j] * pf[k - 1 - j];
    b[k] = ea * sum;
  }
  return b;
}

double b_of_n(const ModelParams& params, const SpectralConstants& constants,
              std::int64_t n, double lambda) {
  if (params.alpha == 1.0) {
    throw Error(ErrorCode::kUndefinedConstant, "B(n) undefined at alpha=1");
  }
  if (n < 2 || !(lambda > 0)) {
    throw Error(ErrorCode::kParameter, "B(n) needs n >= 2 and lambda > 0");
  }
  const double ln_n = std::log(static_cast<double>(n));
  if (params.alpha < 1.0) return lambda * ln_n;
  return lambda * std::pow(static_cast<double>(n), 1.0 / *constants.eta) *
         ln_n;
}

TheoryFns::TheoryFns(const ModelParams& params, int K)
    : TheoryFns(params.alpha, K) {}

TheoryFns::TheoryFns(double alpha, int K) : alpha_(alpha) {
  if (!(alpha > 0)) throw Error(ErrorCode::kParameter, "alpha must be > 0");
  if (K < 2) throw Error(ErrorCode::kParameter, "table too short");
  b_ = b_sequence(alpha, K);
  // Keep only the finite, comfortably representable prefix.
  std::size_t keep = b_.size();
  for (std::size_t k = 0; k < b_.size(); ++k) {
    if (!std::isfinite(b_[k]) || std::fabs(b_[k]) > 1e290) {
      keep = k;
      break;
    }
  }
  b_.resize(keep);
  pow_fact_.resize(b_.size());
  pow_fact_[0] = 1.0;
  for (std::size_t i = 1; i < pow_fact_.size(); ++i) {
    pow_fact_[i] = pow_fact_[i - 1] / static_cast<double>(i);
  }
}

double TheoryFns::b(int k) const {
  check_interval(k);
  return b_[k];
}

void TheoryFns::check_interval(int k) const {
  if (k >= static_cast<int>(b_.size())) {
    throw Error(ErrorCode::kEvaluation,
                "tau beyond the b table (k=" + std::to_string(k) + ")");
  }
}

double TheoryFns::S(int k, double x) const {
  if (k < 0) return 0.0;
  check_interval(k);
  const double y = alpha_ * x;
  double sum = 0.0;
  double ypow = 1.0;
  for (int i = 0; i <= k; ++i) {
    const double term = b_[k - i] * ypow * pow_fact_[i];
    sum += (i % 2 == 0) ? term : -term;
    if (i > 2 && std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    ypow *= y;
    if (ypow == 0.0) break;
  }
  return sum;
}

ScaledQ TheoryFns::Q_eval(double tau) const {
  if (tau < 0) return {0.0, 0};
  const int k = static_cast<int>(std::floor(tau));
  return {S(k, tau - k), k};
}

double TheoryFns::Q(double tau) const {
  const ScaledQ sq = Q_eval(tau);
  return sq.s * std::pow(-alpha_, -sq.scale);
}

double TheoryFns::one_minus_q_at(int k, double x) const {
  if (k < 0) return 1.0;
  if (k == 0) return 0.0;
  const double s = S(k, x);
  if (std::fabs(s) < 1e-300) {
    throw Error(ErrorCode::kEvaluation, "S(tau) vanished");
  }
  return S(k - 1, x) / s;
}

double TheoryFns::q_at(int k, double x) const {
  if (k < 0) return 0.0;
  if (k == 0) return 1.0;
  return 1.0 - one_minus_q_at(k, x);
}

double TheoryFns::p_at(int k, double x) const {
  if (k < 0) return 0.0;
  const double s = S(k, x);
  if (std::fabs(s) < 1e-300) {
    throw Error(ErrorCode::kEvaluation, "S(tau) vanished");
  }
  return std::exp(-alpha_ * x) / s;
}

double TheoryFns::one_minus_p_at(int k, double x) const {
  if (k < 0) return 1.0;
  if (k == 0) return -std::expm1(-alpha_ * x);
  return 1.0 - p_at(k, x);
}

double TheoryFns::q(double tau) const {
  if (tau < 0) return 0.0;
  const int k = static_cast<int>(std::floor(tau));
  return q_at(k, tau - k);
}

double TheoryFns::one_minus_q(double tau) const {
  if (tau < 0) return 1.0;
  const int k = static_cast<int>(std::floor(tau));
  return one_minus_q_at(k, tau - k);
}

double TheoryFns::p(double tau) const {
  if (tau < 0) return 0.0;
  const int k = static_cast<int>(std::floor(tau));
  return p_at(k, tau - k);
}

double gq_pmf(int m, double pv, double qv, std::int64_t k) {
  return gq_pmf(m, pv, 1.0 - pv, qv, 1.0 - qv, k);
}

double gq_pmf(int m, double pv, double one_minus_pv, double qv,
              double one_minus_qv, std::int64_t k) {
  if (k < 0) return 0.0;
  if (k == 0) return std::pow(one_minus_qv, m);
  const std::int64_t top = std::min<std::int64_t>(m, k);
  double sum = 0.0;
  if (k <= 60) {
    for (std::int64_t l = 1; l <= top; ++l) {
      double c = 1.0;
      for (std::int64_t i = 0; i < l; ++i) c = c * (m - i) / (i + 1);
      double c2 = 1.0;
      for (std::int64_t i = 0; i < l - 1; ++i) c2 = c2 * (k - 1 - i) / (i + 1);
      sum += c * c2 * std::pow(one_minus_qv, static_cast<double>(m - l)) *
             std::pow(qv * pv, static_cast<double>(l)) *
             std::pow(one_minus_pv, static_cast<double>(k - l));
    }
    return sum;
  }
  for (std::int64_t l = 1; l <= top; ++l) {
    const double lt =
        log_binom(m, static_cast<double>(l)) +
        log_binom(static_cast<double>(k - 1), static_cast<double>(l - 1)) +
        log_pow(one_minus_qv, static_cast<double>(m - l)) +
        log_pow(qv * pv, static_cast<double>(l)) +
        log_pow(one_minus_pv, static_cast<double>(k - l));
    sum += std::exp(lt);
  }
  return sum;
}

DegreeLaw degree_law(const ModelParams& params, int k_max, double tol) {
  if (k_max < 0) throw Error(ErrorCode::kParameter, "k_max must be >= 0");
  if (!(tol > 0)) throw Error(ErrorCode::kParameter, "tol must be > 0");
  const TheoryFns fns(params);
  const double lg = std::log(params.gamma);
  const int m = params.m;
  const int max_intervals = fns.table_size() - 1;

  DegreeLaw law;
  law.k_max = k_max;
  law.quadrature_tol = tol;
  law.x.assign(k_max + 1, 0.0);

  // Hard cap from gamma^{-T} < tol * (smallest double worth resolving).
  const int hard_T = std::min(
      max_intervals, static_cast<int>(std::ceil(745.0 / lg)) + 1);
  double worst_T = 0.0;

  for (int k = 0; k <= k_max; ++k) {
    auto integrand_on = [&](int j) {
      return [&, j](double x) {
        const double pv = fns.p_at(j, x);
        const double omp = fns.one_minus_p_at(j, x);
        const double omq = fns.one_minus_q_at(j, x);
        const double qv = 1.0 - omq;
        return gq_pmf(m, pv, omp, qv, omq, k) * std::exp(-(j + x) * lg);
      };
    };
    // Coarse pass: estimate the total and where the tail bound takes over.
    std::vector<double> coarse;
    double total = 0.0;
    int T = hard_T;
    for (int j = 0; j < hard_T; ++j) {
      const double c = composite_simpson(integrand_on(j), 0.0, 1.0, 16);
      coarse.push_back(c);
      total += c;
      // Tail beyond j+1 is at most gamma^{-(j+1)} / ln gamma.
      const double tail = std::exp(-(j + 1) * lg) / lg;
      if (total > 0 && tail < 0.01 * tol * total) {
        T = j + 1;
        break;
      }
    }
    if (!(total > 0)) {
      law.x[k] = 0.0;
      continue;
    }
    double refined = 0.0;
    const double per_interval = 0.1 * tol * total / T;
    for (int j = 0; j < T; ++j) {
      if (coarse[j] < 1e-3 * per_interval) {
        refined += coarse[j];
        continue;
      }
      refined += adaptive_simpson(integrand_on(j), 0.0, 1.0, per_interval);
    }
    law.x[k] = params.p * lg * refined;
    worst_T = std::max(worst_T, static_cast<double>(T));
  }
  law.truncation = worst_T;
  return law;
}

std::string theory_table_json(double p, int m, const TheoryTableOptions& opts) {
  using nlohmann::ordered_json;
  const ModelParams params = derive_params(p, m);
  ordered_json out;
  out["p"] = p;
  out["m"] = m;
  out["alpha"] = params.alpha;
  out["gamma"] = params.gamma;
  out["mu"] = params.mu;
  out["p0"] = solve_p0();
  const double dist = std::fabs(params.alpha - 1.0);
  out["near_critical"] = dist < kNearCritical;
  out["regime"] = params.alpha < 1.0   ? "exponential"
                  : params.alpha > 1.0 ? "power-law"
                                       : "critical";
  ordered_json undefined = ordered_json::array();
  try {
    const SpectralConstants c = spectral_constants(params);
    out["zeta"] = c.zeta;
    out["beta"] = c.beta;
    if (c.eta) {
      out["eta"] = *c.eta;
    } else {
      out["eta"] = nullptr;
      undefined.push_back("eta: undefined when alpha < 1");
    }
    out["lambda1"] = c.lambda1 ? ordered_json(*c.lambda1) : ordered_json();
    out["lambda2"] = c.lambda2 ? ordered_json(*c.lambda2) : ordered_json();
    out["lambda3"] = c.lambda3 ? ordered_json(*c.lambda3) : ordered_json();
    out["lambda4"] = c.lambda4 ? ordered_json(*c.lambda4) : ordered_json();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUndefinedConstant) throw;
    for (const char* key :
         {"zeta", "beta", "eta", "lambda1", "lambda2", "lambda3", "lambda4"}) {
      out[key] = nullptr;
    }
    undefined.push_back(std::string("zeta, eta, beta, lambda: ") + e.what());
  }
  out["undefined"] = undefined;

  const TheoryFns fns(params);
  const std::vector<double> b =
      b_sequence(params.alpha, std::max(0, opts.b_terms));
  out["b"] = b;
  ordered_json grid = ordered_json::array();
  const int steps = static_cast<int>(std::floor(opts.tau_max / opts.tau_step + 1e-9));
  for (int i = 0; i <= steps; ++i) {
    const double tau = i * opts.tau_step;
    grid.push_back({tau, fns.q(tau), fns.p(tau)});
  }
  out["grid"] = grid;
  const DegreeLaw law = degree_law(params, opts.k_max, opts.tol);
  out["x"] = law.x;
  out["quadrature_tol"] = law.quadrature_tol;
  return out.dump(2);
}

}  // namespace paged
