#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace paged {

struct ModelParams {
  double p = 0.0;
  int m = 0;
  double alpha = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
};

ModelParams derive_params(double p, int m);

// alpha as a function of p alone: p/(4p-2) * ln(p/(1-p)).
double alpha_of(double p);

// Inverse of alpha_of on (1/2, 1); alpha must exceed 1/2.
double p_of_alpha(double alpha);

// The p in (1/2, 1) at which alpha = 1.
double solve_p0();

// Root of z*exp(alpha*(1-z)) = 1 other than z = 1.
double solve_zeta(double alpha);

struct SpectralConstants {
  double alpha = 0.0;
  double zeta = 0.0;
  std::optional<double> eta;
  double beta = 0.0;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<double> lambda3;
  std::optional<double> lambda4;
};

SpectralConstants spectral_constants(const ModelParams& params);

// b_0..b_K with b_k = (-alpha)^k a_k.
std::vector<double> b_sequence(double alpha, int K);

// Exploration budget: lambda ln n (alpha < 1) or lambda n^{1/eta} ln n.
double b_of_n(const ModelParams& params, const SpectralConstants& constants,
              std::int64_t n, double lambda);

struct ScaledQ {
  double s = 0.0;
  int scale = 0;
};

// Evaluators for Q, q, p. Immutable after construction.
class TheoryFns {
 public:
  explicit TheoryFns(double alpha, int K = 1024);
  explicit TheoryFns(const ModelParams& params, int K = 1024);

  double alpha() const { return alpha_; }
  int table_size() const { return static_cast<int>(b_.size()) - 1; }
  double b(int k) const;
  const std::vector<double>& b_table() const { return b_; }

  // S on unit interval k at offset x in [0, 1]; x = 1 gives the left limit
  // at k + 1. Zero for k < 0.
  double S(int k, double x) const;

  ScaledQ Q_eval(double tau) const;
  // Q itself; only usable while (-alpha)^{-k} stays representable.
  double Q(double tau) const;

  double q(double tau) const;
  double one_minus_q(double tau) const;
  double p(double tau) const;

  // Same quantities on unit interval k at offset x in [0, 1].
  double q_at(int k, double x) const;
  double one_minus_q_at(int k, double x) const;
  double p_at(int k, double x) const;
  double one_minus_p_at(int k, double x) const;

 private:
  void check_interval(int k) const;

  double alpha_;
  std::vector<double> b_;
  std::vector<double> pow_fact_;
};

// Mass of G^m(pv, qv) at k.
double gq_pmf(int m, double pv, double qv, std::int64_t k);
// Variant taking the complements explicitly, for accuracy near 0 and 1.
double gq_pmf(int m, double pv, double one_minus_pv, double qv,
              double one_minus_qv, std::int64_t k);

struct DegreeLaw {
  std::vector<double> x;
  int k_max = 0;
  double quadrature_tol = 0.0;
  double truncation = 0.0;
};

// tol is relative to each x_k.
DegreeLaw degree_law(const ModelParams& params, int k_max, double tol = 1e-10);

struct TheoryTableOptions {
  int k_max = 50;
  double tau_max = 10.0;
  double tau_step = 0.05;
  int b_terms = 30;
  double tol = 1e-10;
};

// JSON document with constants, b table, (tau, q, p) grid and degree law.
// Undefined constants are emitted as null with an explanatory marker.
std::string theory_table_json(double p, int m, const TheoryTableOptions& opts);

}  // namespace paged
