#include "paged/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "paged/analysis.hpp"
#include "paged/error.hpp"
#include "paged/master.hpp"
#include "paged/parallel.hpp"
#include "paged/rng.hpp"
#include "paged/theory.hpp"

#ifndef PAGED_GIT_DESCRIBE
#define PAGED_GIT_DESCRIBE "unknown"
#endif

namespace paged {

using nlohmann::json;
using nlohmann::ordered_json;

const char* version_string() { return "paged " PAGED_GIT_DESCRIBE; }

namespace {

constexpr const char* kSeeding =
    "run i draws sigma from derive_seed(seed, i, 0), process or master-graph "
    "randomness from derive_seed(seed, i, 1) and start vertices from "
    "derive_seed(seed, i, 2); the equivalence mode shares the sigma of run 0 "
    "and draws the on-line process from stream 3 and the expose pass from "
    "stream 4; derive_seed is splitmix64 over (seed, i, stream)";

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfig, what);
}

const char* policy_name(DepletedPolicy p) {
  return p == DepletedPolicy::kResample ? "resample" : "abort";
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_header(const ExperimentConfig& c) {
  std::string h = "# ";
  h += version_string();
  h += "\n# config ";
  h += c.to_json().dump();
  h += "\n# seeding: ";
  h += kSeeding;
  h += "\n";
  return h;
}

ordered_json report_head(const ExperimentConfig& c) {
  ordered_json j;
  j["version"] = version_string();
  j["config"] = c.to_json();
  j["seeding"] = kSeeding;
  return j;
}

Artifact json_artifact(std::string name, const ordered_json& j) {
  return {std::move(name), j.dump(2) + "\n"};
}

SeedGraph seed_graph_of(const ExperimentConfig& c) {
  return default_seed_graph(c.m, c.seed_graph_N);
}

FeasibleSigma sigma_for_run(const ExperimentConfig& c, const SeedGraph& g,
                            std::uint64_t run) {
  return draw_feasible_sigma(c.p, c.n, g, derive_seed(c.seed, run, 0),
                             c.on_depleted, c.retry_cap);
}

std::vector<double> pmf_of_counts(const std::vector<std::int64_t>& counts) {
  double total = 0;
  for (auto x : counts) total += static_cast<double>(x);
  std::vector<double> out(counts.size(), 0.0);
  if (total > 0) {
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / total;
  }
  return out;
}

void accumulate(std::vector<std::int64_t>& into, const std::vector<std::int64_t>& from) {
  if (into.size() < from.size()) into.resize(from.size(), 0);
  for (std::size_t i = 0; i < from.size(); ++i) into[i] += from[i];
}

// ---- theory -------------------------------------------------------------

std::vector<Artifact> cmd_theory(const ExperimentConfig& c) {
  TheoryTableOptions opts;
  opts.k_max = c.k_max;
  opts.tau_max = c.tau_max;
  opts.tau_step = c.tau_step;
  ordered_json table = ordered_json::parse(theory_table_json(c.p, c.m, opts));
  ordered_json doc = report_head(c);
  for (auto it = table.begin(); it != table.end(); ++it) doc[it.key()] = it.value();

  std::string law = csv_header(c) + "k,x\n";
  for (std::size_t k = 0; k < table["x"].size(); ++k) {
    law += std::to_string(k) + "," + num(table["x"][k].get<double>()) + "\n";
  }
  std::string grid = csv_header(c) + "tau,q,p\n";
  for (const auto& row : table["grid"]) {
    grid += num(row[0].get<double>()) + "," + num(row[1].get<double>()) + "," +
            num(row[2].get<double>()) + "\n";
  }
  return {json_artifact("theory.json", doc), {"degree_law.csv", law}, {"grid.csv", grid}};
}

// ---- simulate -----------------------------------------------------------

struct SimRun {
  DegreeHistogram all;
  DegreeHistogram current;
  ComponentReport comp;
  int attempts = 0;
  VertexId one_n = 0;
  VertexId nu_n = 0;
};

std::vector<Artifact> cmd_simulate(const ExperimentConfig& c, unsigned threads) {
  const SeedGraph g = seed_graph_of(c);
  std::vector<SimRun> runs(static_cast<std::size_t>(c.runs));
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    const FeasibleSigma fs = sigma_for_run(c, g, i);
    const GraphState s = run_process(g, fs.sigma, derive_seed(c.seed, i, 1));
    runs[i].all = degree_histogram(s, c.n);
    runs[i].current = degree_histogram(s, c.n, true);
    runs[i].comp = components(s);
    runs[i].attempts = fs.attempts;
    runs[i].one_n = s.one();
    runs[i].nu_n = s.nu();
  });

  DegreeHistogram pooled, pooled_cur;
  pooled.n = pooled_cur.n = c.n * c.runs;
  for (const SimRun& r : runs) {
    accumulate(pooled.counts, r.all.counts);
    accumulate(pooled_cur.counts, r.current.counts);
    pooled.vertex_count += r.all.vertex_count;
    pooled_cur.vertex_count += r.current.vertex_count;
    pooled.live_edges += r.all.live_edges;
  }
  pooled_cur.counts.resize(pooled.counts.size(), 0);

  const ModelParams params = derive_params(c.p, c.m);
  const DegreeLaw law = degree_law(params, c.k_max);

  std::string hist = csv_header(c) + "k,count,count_current,empirical,empirical_current,theory\n";
  for (std::size_t k = 0; k < pooled.counts.size() || k <= static_cast<std::size_t>(c.k_max); ++k) {
    const std::int64_t a = k < pooled.counts.size() ? pooled.counts[k] : 0;
    const std::int64_t b = k < pooled_cur.counts.size() ? pooled_cur.counts[k] : 0;
    hist += std::to_string(k) + "," + std::to_string(a) + "," + std::to_string(b) + "," +
            num(static_cast<double>(a) / pooled.n) + "," + num(static_cast<double>(b) / pooled.n) +
            "," + (k <= static_cast<std::size_t>(c.k_max) ? num(law.x[k]) : std::string()) + "\n";
  }

  std::string comps = csv_header(c) +
                      "run,sigma_attempts,one_n,nu_n,vertices,isolated,giant,second,components\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const SimRun& r = runs[i];
    comps += std::to_string(i) + "," + std::to_string(r.attempts) + "," +
             std::to_string(r.one_n) + "," + std::to_string(r.nu_n) + "," +
             std::to_string(r.comp.vertex_count) + "," + std::to_string(r.comp.isolated) + "," +
             std::to_string(r.comp.giant) + "," + std::to_string(r.comp.second) + "," +
             std::to_string(r.comp.sizes.size()) + "\n";
  }

  ordered_json rep = report_head(c);
  const int k_hi = c.k_max;
  const HistogramComparison cmp = compare_histogram(pooled, law, 0, k_hi);
  ordered_json rows = ordered_json::array();
  for (const HistogramRow& r : cmp.rows) {
    rows.push_back({{"k", r.k}, {"count", r.count}, {"empirical", r.empirical},
                    {"theory", r.theory}, {"rel_error", r.rel_error}});
  }
  rep["comparison"] = {{"k_lo", 0}, {"k_hi", k_hi}, {"tv", cmp.tv}, {"rows", rows}};
  rep["x0"] = {{"theory", law.x[0]},
               {"all_vertices", pooled.density(0)},
               {"current_vertices", pooled_cur.density(0)}};
  try {
    const TailFit fit = fit_power_tail(pooled, 20, std::max(21, static_cast<int>(pooled.counts.size()) - 1));
    rep["tail_fit"] = {{"slope", fit.slope}, {"stderr", fit.stderr_slope}, {"points", fit.points}};
  } catch (const Error& e) {
    rep["tail_fit"] = {{"error", e.what()}};
  }
  ordered_json per_run = ordered_json::array();
  for (const SimRun& r : runs) {
    per_run.push_back({{"giant", r.comp.giant}, {"second", r.comp.second},
                       {"isolated", r.comp.isolated}, {"vertices", r.comp.vertex_count},
                       {"sigma_attempts", r.attempts}});
  }
  rep["runs"] = per_run;
  return {{"degree_histogram.csv", hist}, {"components.csv", comps},
          json_artifact("report.json", rep)};
}

// ---- cmj ----------------------------------------------------------------

std::vector<Artifact> cmd_cmj(const ExperimentConfig& c, unsigned threads) {
  const double alpha = c.alpha ? *c.alpha : alpha_of(c.p);
  struct Row {
    std::int64_t d = 0, b = 0;
    bool capped = false;
  };
  std::vector<Row> rows(static_cast<std::size_t>(c.runs));
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const CmjTrace t = simulate_cmj(alpha, c.tau, derive_seed(c.seed, i, 1), c.birth_cap);
    rows[i] = {t.alive_at(c.tau), t.born_before(c.tau), t.capped()};
  });
  std::string csv = csv_header(c) + "run,seed,tau,d,b,capped\n";
  std::vector<std::int64_t> ds;
  std::vector<double> bs;
  std::int64_t capped = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += std::to_string(i) + "," + std::to_string(derive_seed(c.seed, i, 1)) + "," +
           num(c.tau) + "," + std::to_string(rows[i].d) + "," + std::to_string(rows[i].b) + "," +
           (rows[i].capped ? "1" : "0") + "\n";
    ds.push_back(rows[i].d);
    bs.push_back(static_cast<double>(rows[i].b));
    capped += rows[i].capped;
  }
  const TheoryFns fns(alpha);
  const double pt = fns.p(c.tau);
  const double qt = fns.q(c.tau);
  const int k = static_cast<int>(std::floor(c.tau));
  const double x = c.tau - k;
  const std::vector<double> emp = empirical_pmf(ds);
  std::vector<double> theory;
  for (std::size_t j = 0; j < emp.size() + 20; ++j) {
    theory.push_back(gq_pmf(1, pt, fns.one_minus_p_at(k, x), qt, fns.one_minus_q(c.tau),
                            static_cast<std::int64_t>(j)));
  }
  ordered_json rep = report_head(c);
  rep["alpha"] = alpha;
  rep["tau"] = c.tau;
  rep["p_tau"] = pt;
  rep["q_tau"] = qt;
  rep["empirical_pmf"] = emp;
  rep["theory_pmf"] = theory;
  rep["tv"] = total_variation(emp, theory);
  rep["births_quantiles"] = {{"0.5", empirical_quantile(bs, 0.5)},
                             {"0.9", empirical_quantile(bs, 0.9)},
                             {"0.99", empirical_quantile(bs, 0.99)},
                             {"0.999", empirical_quantile(bs, 0.999)}};
  rep["capped_runs"] = capped;
  return {{"cmj_runs.csv", csv}, json_artifact("cmj_summary.json", rep)};
}

// ---- master -------------------------------------------------------------

std::vector<std::int64_t> size_histogram(const ComponentReport& r) {
  std::vector<std::int64_t> h;
  for (auto s : r.sizes) {
    if (static_cast<std::size_t>(s) >= h.size()) h.resize(s + 1, 0);
    ++h[s];
  }
  return h;
}

std::vector<Artifact> master_equivalence(const ExperimentConfig& c, unsigned threads) {
  const SeedGraph g = seed_graph_of(c);
  // One sigma shared by every realization.
  const FeasibleSigma fs = sigma_for_run(c, g, 0);
  auto layout = std::make_shared<const SigmaLayout>(fs.sigma, g);
  const VertexId one_n = layout->one_n();
  const VertexId nu_n = layout->nu_n();
  struct Run {
    std::vector<std::int64_t> realize, process, realize_cur, expose_cur, comp_realize, comp_process;
  };
  std::vector<Run> runs(static_cast<std::size_t>(c.runs));
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    Run& r = runs[i];
    MasterGraph eager(layout, derive_seed(c.seed, i, 1));
    const GraphState a = eager.realize_full();
    const GraphState b = run_process(g, fs.sigma, derive_seed(c.seed, i, 3));
    r.realize = degree_histogram(a, c.n).counts;
    r.realize_cur = degree_histogram(a, c.n, true).counts;
    r.process = degree_histogram(b, c.n).counts;
    r.comp_realize = size_histogram(components(a));
    r.comp_process = size_histogram(components(b));
    MasterGraph lazy(layout, derive_seed(c.seed, i, 4));
    for (VertexId v = one_n; v <= nu_n; ++v) {
      std::int64_t d = 0;
      for (EdgeId f = static_cast<EdgeId>(c.m) * (v - 1) + 1; f <= static_cast<EdgeId>(c.m) * v; ++f) {
        d += lazy.expose({f, 2}, INT64_MAX).en_count;
      }
      if (static_cast<std::size_t>(d) >= r.expose_cur.size()) r.expose_cur.resize(d + 1, 0);
      ++r.expose_cur[d];
    }
  });
  Run total;
  for (const Run& r : runs) {
    accumulate(total.realize, r.realize);
    accumulate(total.process, r.process);
    accumulate(total.realize_cur, r.realize_cur);
    accumulate(total.expose_cur, r.expose_cur);
    accumulate(total.comp_realize, r.comp_realize);
    accumulate(total.comp_process, r.comp_process);
  }
  const auto pr = pmf_of_counts(total.realize), pp = pmf_of_counts(total.process);
  const auto prc = pmf_of_counts(total.realize_cur), pe = pmf_of_counts(total.expose_cur);
  const auto cr = pmf_of_counts(total.comp_realize), cp = pmf_of_counts(total.comp_process);

  std::string csv = csv_header(c) + "k,realize,process,realize_current,expose_current\n";
  const std::size_t len = std::max({pr.size(), pp.size(), prc.size(), pe.size()});
  auto at = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : 0.0; };
  for (std::size_t k = 0; k < len; ++k) {
    csv += std::to_string(k) + "," + num(at(pr, k)) + "," + num(at(pp, k)) + "," +
           num(at(prc, k)) + "," + num(at(pe, k)) + "\n";
  }
  std::string comp_csv = csv_header(c) + "size,realize,process\n";
  for (std::size_t s = 1; s < std::max(cr.size(), cp.size()); ++s) {
    comp_csv += std::to_string(s) + "," + num(at(cr, s)) + "," + num(at(cp, s)) + "\n";
  }
  ordered_json rep = report_head(c);
  rep["sigma"] = {{"attempts", fs.attempts}, {"one_n", one_n}, {"nu_n", nu_n}};
  rep["tv_degree"] = total_variation(pr, pp);
  rep["tv_component_size"] = total_variation(cr, cp);
  rep["tv_expose_degree"] = total_variation(prc, pe);
  return {{"equivalence_degrees.csv", csv}, {"equivalence_components.csv", comp_csv},
          json_artifact("equivalence.json", rep)};
}

struct SearchRow {
  std::uint64_t run;
  int start;
  VertexId v0;
  ComponentResult result;
  std::int64_t realized_edges;
  bool agrees;
};

std::vector<Artifact> master_components(const ExperimentConfig& c, unsigned threads) {
  const SeedGraph g = seed_graph_of(c);
  SearchOptions opts;
  opts.reveal_cap = c.effective_reveal_cap();
  opts.round_cap = c.effective_round_cap();
  opts.ec_threshold = static_cast<double>(c.m) * static_cast<double>(c.n) / c.omega_value();
  std::vector<std::vector<SearchRow>> runs(static_cast<std::size_t>(c.runs));
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    const FeasibleSigma fs = sigma_for_run(c, g, i);
    MasterGraph mg(fs.sigma, g, derive_seed(c.seed, i, 1));
    const SigmaLayout& L = mg.layout();
    Rng pick(derive_seed(c.seed, i, 2));
    for (int s = 0; s < c.starts; ++s) {
      const VertexId v0 = L.one_n() + static_cast<VertexId>(pick.below(L.nu_n() - L.one_n() + 1));
      runs[i].push_back({i, s, v0, mg.component_search(v0, opts), 0, false});
    }
    // Check every verdict against the realized graph.
    const GraphState state = mg.realize_full();
    const auto label = component_labels(state);
    std::unordered_map<std::int64_t, std::int64_t> edges_of;
    for (EdgeId e = state.first_live_edge(); e <= state.last_live_edge(); ++e) {
      ++edges_of[label[fixed_endpoint(e, c.m)]];
    }
    std::int64_t giant_label = -1, giant_edges = -1;
    for (const auto& [lab, count] : edges_of) {
      if (count > giant_edges || (count == giant_edges && lab < giant_label)) {
        giant_label = lab;
        giant_edges = count;
      }
    }
    for (SearchRow& row : runs[i]) {
      const std::int64_t lab = label[row.v0];
      row.realized_edges = edges_of.count(lab) ? edges_of[lab] : 0;
      if (row.result.verdict == Verdict::kSmall) {
        bool same = static_cast<std::int64_t>(row.result.edges.size()) == row.realized_edges;
        for (EdgeId e : row.result.edges) {
          same = same && state.first_live_edge() <= e && label[fixed_endpoint(e, c.m)] == lab;
        }
        row.agrees = same;
      } else if (row.result.verdict == Verdict::kLarge) {
        row.agrees = lab == giant_label;
      }
    }
  });
  std::string csv = csv_header(c) +
                    "run,start,v0,verdict,edges,rounds,revealed_in_Ec,identity_violations,"
                    "realized_component_edges,agrees\n";
  std::string rounds_csv = csv_header(c) + "run,start,round,x_size,c_size,x1_in_En,new_x,new_y_in_En\n";
  std::map<std::string, std::int64_t> verdicts;
  std::int64_t violations = 0, agree = 0, total = 0, checked_rounds = 0;
  for (const auto& rows : runs) {
    for (const SearchRow& r : rows) {
      ++total;
      ++verdicts[to_string(r.result.verdict)];
      violations += r.result.identity_violations;
      agree += r.agrees;
      checked_rounds += static_cast<std::int64_t>(r.result.stats.size());
      csv += std::to_string(r.run) + "," + std::to_string(r.start) + "," + std::to_string(r.v0) +
             "," + to_string(r.result.verdict) + "," + std::to_string(r.result.edges.size()) + "," +
             std::to_string(r.result.rounds) + "," + std::to_string(r.result.revealed_in_Ec) + "," +
             std::to_string(r.result.identity_violations) + "," +
             std::to_string(r.realized_edges) + "," + (r.agrees ? "1" : "0") + "\n";
      for (const RoundStat& s : r.result.stats) {
        rounds_csv += std::to_string(r.run) + "," + std::to_string(r.start) + "," +
                      std::to_string(s.round) + "," + std::to_string(s.x_size) + "," +
                      std::to_string(s.c_size) + "," + (s.x1_in_En ? "1" : "0") + "," +
                      std::to_string(s.new_x) + "," + std::to_string(s.new_y_in_En) + "\n";
      }
    }
  }
  ordered_json rep = report_head(c);
  rep["reveal_cap"] = opts.reveal_cap;
  rep["round_cap"] = opts.round_cap;
  rep["ec_threshold"] = opts.ec_threshold;
  rep["searches"] = total;
  rep["verdicts"] = verdicts;
  rep["rounds_checked"] = checked_rounds;
  rep["identity_violations"] = violations;
  rep["agree_with_realized"] = agree;
  return {{"component_search.csv", csv}, {"search_rounds.csv", rounds_csv},
          json_artifact("component_search.json", rep)};
}

std::vector<Artifact> master_vertex_degree(const ExperimentConfig& c, unsigned threads) {
  const ModelParams params = derive_params(c.p, c.m);
  const VertexId v = c.v ? *c.v : c.n / 2;
  const double tau = vertex_tau(params, c.n, v);
  const SpectralConstants sc = spectral_constants(params);
  std::int64_t budget = INT64_MAX;
  if (params.alpha != 1.0) {
    budget = static_cast<std::int64_t>(std::ceil(b_of_n(params, sc, c.n, c.lambda)));
  }
  const SeedGraph g = seed_graph_of(c);
  struct Row {
    std::int64_t degree = 0;
    bool capped = false;
    bool born = false;
  };
  std::vector<Row> rows(static_cast<std::size_t>(c.runs));
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const FeasibleSigma fs = sigma_for_run(c, g, i);
    MasterGraph mg(fs.sigma, g, derive_seed(c.seed, i, 1));
    if (v > mg.layout().nu_n()) return;
    rows[i].born = true;
    for (EdgeId f = static_cast<EdgeId>(c.m) * (v - 1) + 1; f <= static_cast<EdgeId>(c.m) * v; ++f) {
      const ExposeResult r = mg.expose({f, 2}, budget);
      rows[i].degree += r.en_count;
      rows[i].capped = rows[i].capped || r.capped;
    }
  });
  std::string csv = csv_header(c) + "run,degree,capped,born\n";
  std::vector<std::int64_t> degrees;
  std::int64_t capped = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += std::to_string(i) + "," + std::to_string(rows[i].degree) + "," +
           (rows[i].capped ? "1" : "0") + "," + (rows[i].born ? "1" : "0") + "\n";
    degrees.push_back(rows[i].degree);
    capped += rows[i].capped;
  }
  const TheoryFns fns(params);
  const int k = static_cast<int>(std::floor(tau));
  const double x = tau - k;
  const double pt = fns.p(tau), qt = fns.q(tau);
  const std::vector<double> emp = empirical_pmf(degrees);
  std::vector<double> theory;
  for (std::size_t j = 0; j < emp.size() + 20; ++j) {
    theory.push_back(gq_pmf(c.m, pt, fns.one_minus_p_at(k, x), qt, fns.one_minus_q(tau),
                            static_cast<std::int64_t>(j)));
  }
  ordered_json rep = report_head(c);
  rep["vertex"] = v;
  rep["tau"] = tau;
  rep["p_tau"] = pt;
  rep["q_tau"] = qt;
  rep["budget"] = budget;
  rep["capped_runs"] = capped;
  rep["empirical_pmf"] = emp;
  rep["theory_pmf"] = theory;
  rep["tv"] = total_variation(emp, theory);
  return {{"vertex_degree.csv", csv}, json_artifact("vertex_degree.json", rep)};
}

// ---- config parsing helpers ---------------------------------------------

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

ordered_json ExperimentConfig::to_json() const {
  ordered_json j;
  j["p"] = p;
  j["m"] = m;
  j["n"] = n;
  j["seed"] = seed;
  j["runs"] = runs;
  j["seed_graph_N"] = seed_graph_N;
  j["omega"] = omega;
  j["epsilon"] = epsilon;
  j["reveal_cap"] = reveal_cap ? ordered_json(*reveal_cap) : ordered_json(nullptr);
  j["round_cap"] = round_cap ? ordered_json(*round_cap) : ordered_json(nullptr);
  j["birth_cap"] = birth_cap;
  j["on_depleted"] = policy_name(on_depleted);
  j["retry_cap"] = retry_cap;
  j["out"] = out;
  j["k_max"] = k_max;
  j["tau_max"] = tau_max;
  j["tau_step"] = tau_step;
  j["alpha"] = alpha ? ordered_json(*alpha) : ordered_json(nullptr);
  j["tau"] = tau;
  j["mode"] = mode;
  j["v"] = v ? ordered_json(*v) : ordered_json(nullptr);
  j["starts"] = starts;
  j["lambda"] = lambda;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  ExperimentConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const bool null = it.value().is_null();
    if (k == "p") c.p = get_field<double>(j, "p");
    else if (k == "m") c.m = get_field<int>(j, "m");
    else if (k == "n") c.n = get_field<std::int64_t>(j, "n");
    else if (k == "seed") c.seed = get_field<std::uint64_t>(j, "seed");
    else if (k == "runs") c.runs = get_field<int>(j, "runs");
    else if (k == "seed_graph_N") c.seed_graph_N = get_field<int>(j, "seed_graph_N");
    else if (k == "omega") c.omega = get_field<std::string>(j, "omega");
    else if (k == "epsilon") c.epsilon = get_field<double>(j, "epsilon");
    else if (k == "reveal_cap") {
      if (null) c.reveal_cap.reset(); else c.reveal_cap = get_field<std::int64_t>(j, "reveal_cap");
    } else if (k == "round_cap") {
      if (null) c.round_cap.reset(); else c.round_cap = get_field<std::int64_t>(j, "round_cap");
    } else if (k == "birth_cap") c.birth_cap = get_field<std::int64_t>(j, "birth_cap");
    else if (k == "on_depleted") {
      const auto s = get_field<std::string>(j, "on_depleted");
      if (s == "resample") c.on_depleted = DepletedPolicy::kResample;
      else if (s == "abort") c.on_depleted = DepletedPolicy::kAbort;
      else config_error("on_depleted must be resample or abort");
    } else if (k == "retry_cap") c.retry_cap = get_field<int>(j, "retry_cap");
    else if (k == "out") c.out = get_field<std::string>(j, "out");
    else if (k == "k_max") c.k_max = get_field<int>(j, "k_max");
    else if (k == "tau_max") c.tau_max = get_field<double>(j, "tau_max");
    else if (k == "tau_step") c.tau_step = get_field<double>(j, "tau_step");
    else if (k == "alpha") {
      if (null) c.alpha.reset(); else c.alpha = get_field<double>(j, "alpha");
    } else if (k == "tau") c.tau = get_field<double>(j, "tau");
    else if (k == "mode") c.mode = get_field<std::string>(j, "mode");
    else if (k == "v") {
      if (null) c.v.reset(); else c.v = get_field<std::int64_t>(j, "v");
    } else if (k == "starts") c.starts = get_field<int>(j, "starts");
    else if (k == "lambda") c.lambda = get_field<double>(j, "lambda");
    else config_error("unknown config field '" + k + "'");
  }
  return c;
}

double ExperimentConfig::omega_value() const {
  if (omega == "lnln") {
    if (n < 16) config_error("omega = ln ln n needs n >= 16");
    return std::log(std::log(static_cast<double>(n)));
  }
  if (omega.rfind("const:", 0) == 0) {
    char* end = nullptr;
    const std::string tail = omega.substr(6);
    const double x = std::strtod(tail.c_str(), &end);
    if (tail.empty() || *end != '\0' || !(x > 0) || !std::isfinite(x)) {
      config_error("omega const:<x> needs a positive number");
    }
    return x;
  }
  config_error("omega must be lnln or const:<x>");
}

std::int64_t ExperimentConfig::default_reveal_cap() const {
  const double ln_n = std::log(static_cast<double>(n));
  const double lg = ln_n / std::log(p / (1.0 - p));
  const double cap = std::pow(static_cast<double>(n), 0.5 + epsilon) * lg * lg * lg;
  return static_cast<std::int64_t>(std::min(cap, 9.0e18));
}

std::int64_t ExperimentConfig::effective_reveal_cap() const {
  return reveal_cap ? *reveal_cap : default_reveal_cap();
}

std::int64_t ExperimentConfig::effective_round_cap() const {
  return round_cap ? *round_cap : 2 * static_cast<std::int64_t>(m) * n + 1;
}

void ExperimentConfig::validate(const std::string& command) const {
  if (!(p > 0.5 && p < 1.0)) config_error("p must lie in (1/2, 1)");
  if (m < 1 || m > 1000) config_error("m must lie in [1, 1000]");
  if (command == "theory") {
    if (k_max < 0 || k_max > 5000) config_error("k_max must lie in [0, 5000]");
    if (!(tau_max > 0 && tau_max <= 100)) config_error("tau_max must lie in (0, 100]");
    if (!(tau_step > 0 && tau_step <= tau_max)) config_error("tau_step must lie in (0, tau_max]");
    return;
  }
  if (runs < 1) config_error("runs must be positive");
  if (command == "cmj") {
    if (alpha && !(*alpha > 0 && std::isfinite(*alpha))) config_error("alpha must be positive");
    if (!(tau >= 0 && tau <= 50)) config_error("tau must lie in [0, 50]");
    if (birth_cap < 1) config_error("birth_cap must be positive");
    return;
  }
  if (command != "simulate" && command != "master") config_error("unknown command '" + command + "'");
  if (seed_graph_N < 1) config_error("seed_graph_N must be positive");
  const SeedGraph g = default_seed_graph(m, seed_graph_N);
  if (n <= g.t0()) config_error("n must exceed the seed graph size t0 = " + std::to_string(g.t0()));
  if (n > 2'000'000'000 / std::max(m, 1)) config_error("n * m too large");
  if (retry_cap < 1) config_error("retry_cap must be positive");
  if (k_max < 0 || k_max > 5000) config_error("k_max must lie in [0, 5000]");
  omega_value();
  if (!(epsilon > 0 && epsilon < 0.5)) config_error("epsilon must lie in (0, 1/2)");
  if (reveal_cap && *reveal_cap < 1) config_error("reveal_cap must be positive");
  if (round_cap && *round_cap < 1) config_error("round_cap must be positive");
  if (command == "master") {
    if (mode == "components") {
      if (starts < 1) config_error("starts must be positive");
    } else if (mode == "vertex-degree") {
      if (!(lambda > 0)) config_error("lambda must be positive");
      try {
        vertex_tau(derive_params(p, m), n, v ? *v : n / 2);
      } catch (const Error& e) {
        config_error(e.what());
      }
    } else if (mode != "equivalence") {
      config_error("mode must be equivalence, components or vertex-degree");
    }
  }
}

std::vector<Artifact> run_command(const std::string& command,
                                  const ExperimentConfig& config,
                                  unsigned threads) {
  config.validate(command);
  if (command == "theory") return cmd_theory(config);
  if (command == "simulate") return cmd_simulate(config, threads);
  if (command == "cmj") return cmd_cmj(config, threads);
  if (config.mode == "equivalence") return master_equivalence(config, threads);
  if (config.mode == "components") return master_components(config, threads);
  return master_vertex_degree(config, threads);
}

}  // namespace paged
