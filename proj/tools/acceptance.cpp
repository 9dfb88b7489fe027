// One PASS/FAIL line per acceptance criterion, with the measured numbers.
#include <quadmath.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "paged/analysis.hpp"
#include "paged/experiment.hpp"
#include "paged/quadrature.hpp"
#include "paged/theory.hpp"

using namespace paged;
using nlohmann::json;

namespace {

unsigned g_threads = 0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += "[fail] ";
    }
    detail += what + "; ";
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

json artifact(const std::vector<Artifact>& all, const std::string& name) {
  for (const auto& a : all) {
    if (a.name == name) return json::parse(a.content);
  }
  throw std::runtime_error("missing artifact " + name);
}

ExperimentConfig base_config(double p, int m, std::int64_t n, int runs) {
  ExperimentConfig c;
  c.p = p;
  c.m = m;
  c.n = n;
  c.runs = runs;
  c.seed = 1;
  return c;
}

// Lambert W by Halley iteration; branch picked by the starting point.
double lambert_w(double x, bool lower_branch) {
  double w = lower_branch ? -2.0 : 0.0;
  for (int i = 0; i < 100; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double step = f / (ew * (w + 1) - (w + 2) * f / (2 * w + 2));
    w -= step;
    if (std::fabs(step) < 1e-16 * (1 + std::fabs(w))) break;
  }
  return w;
}

Outcome constants() {
  Outcome o;
  const double p0 = solve_p0();
  o.require(std::fabs(p0 - 0.83113) < 1e-4, "p0=" + fmt("%.6f", p0));
  for (double p : {0.6, 0.7, 0.75, 0.9, 0.95}) {
    const ModelParams params = derive_params(p, 1);
    const SpectralConstants c = spectral_constants(params);
    const double a = params.alpha;
    const double z = c.zeta;
    const double residual = std::fabs(z * std::exp(a * (1 - z)) - 1);
    const double w = -lambert_w(-a * std::exp(-a), a < 1) / a;
    bool bracket = a > 1 ? z < 1 / a : z > 1 - 1 / a + 1 / (a * a) &&
                                           1 - 1 / a + 1 / (a * a) > 1 / a;
    std::string line = "p=" + fmt("%.2f", p) + " zeta=" + fmt("%.10f", z) +
                       " residual=" + fmt("%.1e", residual);
    o.require(residual < 1e-12 && std::fabs(w - z) < 1e-10 && bracket, line);
    if (a > 1) o.require(c.eta && *c.eta > 2, "eta=" + fmt("%.4f", c.eta.value_or(0)));
  }
  return o;
}

double p_by_quadrature(const TheoryFns& f, double tau) {
  double integral = 0.0;
  for (int j = 0; j < tau; ++j) {
    const double hi = std::min<double>(j + 1, tau);
    integral += adaptive_simpson([&](double x) { return f.q_at(j, x - j); }, j,
                                 hi, 1e-14);
  }
  return std::exp(-f.alpha() * integral);
}

Outcome identities() {
  Outcome o;
  for (double pr : {0.7, 0.9}) {
    const double alpha = alpha_of(pr);
    const TheoryFns f(alpha);
    bool range = true, monotone = true;
    double worst_deriv = 0, worst_ratio = 0, worst_quad = 0, worst_explicit = 0;
    double prev_q = 2, prev_p = 2;
    const double h = 1e-4;
    const double ea = std::exp(alpha);
    for (int i = 0; i <= 200; ++i) {
      const double tau = 0.05 * i;
      const double qv = f.q(tau), pv = f.p(tau);
      range = range && qv >= 0 && qv <= 1 && pv >= 0 && pv <= 1;
      monotone = monotone && qv <= prev_q + 1e-15 && pv <= prev_p + 1e-15;
      prev_q = qv;
      prev_p = pv;
      if (i % 20 != 0) {
        // Q'(tau) = Q(tau-1) on the common scale (-alpha)^{-k} of interval k:
        // S'(k, x) = -alpha S(k-1, x).
        const int k = static_cast<int>(std::floor(tau + 1e-9));
        const double x = tau - k;
        const double deriv = (f.S(k, x + h) - f.S(k, x - h)) / (2 * h);
        const double target = -alpha * f.S(k - 1, x);
        const double scale = std::max({std::fabs(target), std::fabs(f.S(k, x)), 1e-300});
        worst_deriv = std::max(worst_deriv, std::fabs(deriv - target) / scale);
      }
      if (tau >= 1.0) {
        worst_ratio = std::max(worst_ratio, std::fabs(f.one_minus_q(tau) - pv / f.p(tau - 1)));
      }
      worst_quad = std::max(worst_quad, std::fabs(pv - p_by_quadrature(f, tau)));
      if (tau < 1.0) {
        worst_explicit = std::max(worst_explicit, std::fabs(qv - 1.0));
      } else if (tau < 2.0) {
        const double t = tau - 1;
        worst_explicit = std::max(worst_explicit, std::fabs(qv - (1 - 1 / (ea - alpha * t))));
      } else if (tau < 3.0 - 1e-12) {
        const double t = tau - 2;
        const double q2 = 1 - (ea - alpha * t) / (ea * ea - (t + 1) * alpha * ea +
                                                  0.5 * alpha * alpha * t * t);
        worst_explicit = std::max(worst_explicit, std::fabs(qv - q2));
      }
    }
    o.require(range && monotone, "p=" + fmt("%.1f", pr) + " range and monotonicity");
    o.require(worst_deriv < 1e-6, "Q' rel err " + fmt("%.1e", worst_deriv));
    o.require(worst_ratio < 1e-10, "1-q ratio err " + fmt("%.1e", worst_ratio));
    o.require(worst_quad < 1e-10, "p vs quadrature " + fmt("%.1e", worst_quad));
    o.require(worst_explicit < 1e-12, "explicit q " + fmt("%.1e", worst_explicit));
  }
  return o;
}

Outcome functional_equations() {
  Outcome o;
  for (double pr : {0.7, 0.9}) {
    const double alpha = alpha_of(pr);
    const TheoryFns f(alpha);
    auto F = [&](double s, double u) {
      return 1.0 + f.q(u) * (s - 1) / (1 - s * (1 - f.p(u)));
    };
    auto integral = [&](double s, double lo, double hi) {
      double total = 0.0;
      for (double a = lo; a < hi;) {
        const double b = std::min(hi, std::floor(a) + 1.0);
        total += adaptive_simpson([&](double u) { return F(s, u) - 1; }, a, b, 1e-13);
        a = b;
      }
      return total;
    };
    double worst = 0;
    for (double s : {0.2, 0.5, 0.9}) {
      for (double tau : {0.3, 0.7}) {
        worst = std::max(worst, std::fabs(s * std::exp(alpha * integral(s, 0, tau)) - F(s, tau)));
      }
      for (double tau : {1.5, 2.5, 4.0}) {
        worst = std::max(worst, std::fabs(std::exp(alpha * integral(s, tau - 1, tau)) - F(s, tau)));
      }
    }
    o.require(worst < 1e-8, "p=" + fmt("%.1f", pr) + " max residual " + fmt("%.1e", worst));
  }
  return o;
}

Outcome asymptotics() {
  Outcome o;
  {
    // b_k in quad precision: the residual falls far below double resolution.
    const double p = 0.7;
    const __float128 pq = p;
    const __float128 alpha = pq / (4 * pq - 2) * logq(pq / (1 - pq));
    __float128 z = solve_zeta(static_cast<double>(alpha));
    for (int i = 0; i < 50; ++i) {
      const __float128 g = logq(z) + alpha * (1 - z);
      z -= g / (1 / z - alpha);
    }
    const __float128 beta = 1 / (1 - alpha * z);
    const int K = 31;
    std::vector<__float128> b(K + 1);
    b[0] = 1;
    for (int k = 1; k <= K; ++k) {
      __float128 s = 0, term = 1;
      for (int j = k - 1; j >= 0; --j) {
        s += b[j] * term;
        term *= -alpha / (k - j);
      }
      b[k] = expq(alpha) * s;
    }
    std::vector<double> r(K + 1);
    for (int k = 0; k <= K; ++k) {
      r[k] = static_cast<double>(fabsq(b[k] - 1 / (1 - alpha) - beta / powq(z, k)));
    }
    const double limit = 1 / static_cast<double>(z) + 0.05;
    double worst = 0;
    int worst_k = 0;
    std::vector<int> above;
    for (int k = 0; k < 30; ++k) {
      const double ratio = r[k + 1] / r[k];
      if (ratio > worst) {
        worst = ratio;
        worst_k = k;
      }
      if (ratio >= limit) above.push_back(k);
    }
    const double rate = std::pow(r[30] / r[0], 1.0 / 30);
    std::string ks;
    for (int k : above) ks += (ks.empty() ? "" : ",") + std::to_string(k);
    o.require(above.empty(), "alpha<1 max ratio " + fmt("%.3f", worst) + " at k=" +
                                 std::to_string(worst_k) + " vs limit " + fmt("%.3f", limit) +
                                 (ks.empty() ? "" : " (exceeded at k=" + ks + ")") +
                                 ", mean rate " + fmt("%.3f", rate) + ", |r_30|=" +
                                 fmt("%.1e", r[30]));
  }
  {
    const ModelParams params = derive_params(0.9, 2);
    const SpectralConstants c = spectral_constants(params);
    const TheoryFns f(params);
    bool inside = true;
    for (int k = 1; k <= 30; ++k) {
      const double scaled = f.p(k) / std::pow(c.zeta, k);
      inside = inside && scaled >= *c.lambda3 && scaled <= *c.lambda3 + 0.5 * std::pow(c.zeta, k);
    }
    o.require(inside, "alpha>1 p(k)/zeta^k in [lambda3, lambda3 + 0.5 zeta^k] for k<=30");
    const double q25 = (f.q(25) - (1 - c.zeta)) / std::pow(c.zeta, 25);
    const double rel = std::fabs(q25 / *c.lambda4 - 1);
    o.require(rel < 0.05, "lambda4 rel err at k=25 " + fmt("%.1e", rel));
  }
  return o;
}

Outcome cmj_law() {
  Outcome o;
  for (double alpha : {0.7, 1.5}) {
    for (double tau : {0.5, 1.5, 2.5}) {
      ExperimentConfig c = base_config(0.75, 1, 1000, 100000);
      c.alpha = alpha;
      c.tau = tau;
      const json s = artifact(run_command("cmj", c, g_threads), "cmj_summary.json");
      const double tv = s["tv"];
      o.require(tv < 0.01 && s["capped_runs"] == 0,
                "alpha=" + fmt("%.1f", alpha) + " tau=" + fmt("%.1f", tau) + " tv=" + fmt("%.4f", tv));
    }
  }
  return o;
}

Outcome vertex_degree() {
  Outcome o;
  for (int m : {1, 2}) {
    ExperimentConfig c = base_config(0.75, m, 100000, 10000);
    c.mode = "vertex-degree";
    const json s = artifact(run_command("master", c, g_threads), "vertex_degree.json");
    const double tv = s["tv"];
    o.require(tv < 0.02, "m=" + std::to_string(m) + " tau=" + fmt("%.3f", s["tau"].get<double>()) +
                             " tv=" + fmt("%.4f", tv));
  }
  return o;
}

Outcome degree_sequence() {
  Outcome o;
  for (double p : {0.7, 0.9}) {
    ExperimentConfig c = base_config(p, 2, 1000000, 1);
    c.k_max = 10;
    const json r = artifact(run_command("simulate", c, g_threads), "report.json");
    double worst = 0;
    int worst_k = 0;
    for (const auto& row : r["comparison"]["rows"]) {
      if (row["theory"].get<double>() < 1e-4) continue;
      const double e = row["rel_error"];
      if (e > worst) {
        worst = e;
        worst_k = row["k"];
      }
    }
    o.require(worst <= 0.05, "p=" + fmt("%.1f", p) + " max rel err " + fmt("%.4f", worst) +
                                 " at k=" + std::to_string(worst_k));
  }
  return o;
}

Outcome tail_regime() {
  Outcome o;
  {
    const ModelParams params = derive_params(0.9, 2);
    const SpectralConstants c = spectral_constants(params);
    const DegreeLaw law = degree_law(params, 200);
    const TailFit fit = fit_power_tail(law.x, 20, 200);
    const double want = -(*c.eta + 1);
    const double local = std::log(law.x[200] / law.x[199]) / std::log(200.0 / 199.0);
    o.require(std::fabs(fit.slope - want) <= 0.3,
              "p=0.9 power slope " + fmt("%.3f", fit.slope) + " vs " + fmt("%.3f", want) +
                  " (local slope at k=200 " + fmt("%.3f", local) + ")");
  }
  {
    const ModelParams params = derive_params(0.7, 2);
    const DegreeLaw law = degree_law(params, 200);
    const TailFit fit = fit_exponential_tail(law.x, 20, 200);
    const double want = std::log(params.alpha);
    const double local = std::log(law.x[200] / law.x[199]);
    // Straightness: worst deviation of ln x_k from the fitted line.
    double dev = 0;
    for (int k = 20; k <= 200; ++k) {
      dev = std::max(dev, std::fabs(std::log(law.x[k]) - (fit.intercept + fit.slope * k)));
    }
    o.require(std::fabs(fit.slope - want) <= 0.05 && std::fabs(local - want) <= 0.05,
              "p=0.7 exponential slope " + fmt("%.4f", fit.slope) + ", local " +
                  fmt("%.4f", local) + " vs ln alpha " + fmt("%.4f", want) +
                  ", max line deviation " + fmt("%.3f", dev));
  }
  return o;
}

Outcome component_structure() {
  Outcome o;
  const std::int64_t n = 1000000;
  auto sweep = [&](double p, int m) {
    ExperimentConfig c = base_config(p, m, n, 5);
    c.k_max = 0;
    return artifact(run_command("simulate", c, g_threads), "report.json");
  };
  {
    const json r = sweep(0.75, 1);
    std::int64_t giant = 0;
    for (const auto& run : r["runs"]) giant = std::max<std::int64_t>(giant, run["giant"]);
    o.require(giant < std::pow(n, 0.8), "(a) m=1 largest " + std::to_string(giant));
    double worst = 0;
    for (const auto& run : r["runs"]) {
      worst = std::max(worst, std::fabs(run["isolated"].get<double>() / n / r["x0"]["theory"].get<double>() - 1));
    }
    o.require(worst <= 0.02, "(c) m=1 p=0.75 isolated rel err " + fmt("%.4f", worst));
  }
  for (double p : {0.7, 0.9}) {
    const json r = sweep(p, 2);
    const double x0 = r["x0"]["theory"];
    std::int64_t second = 0;
    double worst_giant = 1e300, worst_iso = 0;
    for (const auto& run : r["runs"]) {
      second = std::max<std::int64_t>(second, run["second"]);
      const double xi = run["isolated"].get<double>() / n;
      const double bound = (1 - xi) * (1.0 / 14.0) * run["vertices"].get<double>();
      worst_giant = std::min(worst_giant, run["giant"].get<double>() / bound);
      worst_iso = std::max(worst_iso, std::fabs(xi / x0 - 1));
    }
    o.require(second <= 200 && worst_giant >= 1,
              "(b) m=2 p=" + fmt("%.1f", p) + " second<=" + std::to_string(second) +
                  " giant/bound>=" + fmt("%.2f", worst_giant));
    o.require(worst_iso <= 0.02, "(c) m=2 p=" + fmt("%.1f", p) + " isolated rel err " + fmt("%.4f", worst_iso));
  }
  const double zeta = spectral_constants(derive_params(0.9, 1)).zeta;
  for (int m : {2, 4, 6}) {
    const json r = sweep(0.9, m);
    double worst = 0;
    for (const auto& run : r["runs"]) worst = std::max(worst, run["isolated"].get<double>() / n);
    const double envelope = 2 * 0.9 * std::pow(zeta, m);
    o.require(worst <= envelope, "(d) p=0.9 m=" + std::to_string(m) + " isolated " +
                                     fmt("%.2e", worst) + " <= " + fmt("%.2e", envelope));
  }
  return o;
}

Outcome equivalence() {
  Outcome o;
  ExperimentConfig c = base_config(0.7, 2, 200, 10000);
  c.mode = "equivalence";
  const json r = artifact(run_command("master", c, g_threads), "equivalence.json");
  const double d = r["tv_degree"], s = r["tv_component_size"], e = r["tv_expose_degree"];
  o.require(d < 0.02, "tv degree " + fmt("%.4f", d));
  o.require(s < 0.03, "tv component size " + fmt("%.4f", s));
  o.require(e < 0.02, "tv expose degree " + fmt("%.4f", e));
  return o;
}

Outcome search_bookkeeping() {
  Outcome o;
  for (double p : {0.7, 0.9}) {
    ExperimentConfig c = base_config(p, 2, 1000000, 5);
    c.mode = "components";
    c.reveal_cap = 20000;
    const json r = artifact(run_command("master", c, g_threads), "component_search.json");
    const std::int64_t violations = r["identity_violations"];
    const std::int64_t rounds = r["rounds_checked"];
    const std::int64_t searches = r["searches"];
    const std::int64_t agree = r["agree_with_realized"];
    o.require(violations == 0 && rounds > 0,
              "p=" + fmt("%.1f", p) + " searches " + std::to_string(searches) + ", rounds " +
                  std::to_string(rounds) + ", violations " + std::to_string(violations) +
                  ", verdicts agreeing with realized graph " + std::to_string(agree));
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--threads", g_threads, "Worker threads (0: all cores)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria = {
      constants, identities,          functional_equations, asymptotics,
      cmj_law,   vertex_degree,       degree_sequence,      tail_regime,
      component_structure, equivalence, search_bookkeeping};
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i]();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("error: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d: %s (%.1fs) %s\n", id, out.pass ? "PASS" : "FAIL", secs,
                out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
