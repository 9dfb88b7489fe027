#include "paged/paged.h"

#include <memory>
#include <new>
#include <string>
#include <vector>

#include "paged/cmj.hpp"
#include "paged/error.hpp"
#include "paged/experiment.hpp"
#include "paged/master.hpp"
#include "paged/process.hpp"
#include "paged/theory.hpp"

struct paged_theory {
  paged::ModelParams params;
  paged::SpectralConstants constants;
  paged::TheoryFns fns;
};

struct paged_sigma {
  paged::SeedGraph seed_graph;
  paged::Sigma sigma;
  int attempts;
  std::shared_ptr<const paged::SigmaLayout> layout;
};

struct paged_graph {
  paged::GraphState state;
};

struct paged_master {
  paged::MasterGraph mg;
};

struct paged_cmj_trace {
  paged::CmjTrace trace;
};

struct paged_artifacts {
  std::vector<paged::Artifact> items;
};

namespace {

thread_local std::string last_error;

paged_status status_of(paged::ErrorCode code) {
  using paged::ErrorCode;
  switch (code) {
    case ErrorCode::kParameter: return PAGED_E_PARAMETER;
    case ErrorCode::kUndefinedConstant: return PAGED_E_UNDEFINED;
    case ErrorCode::kEvaluation: return PAGED_E_EVALUATION;
    case ErrorCode::kQuery: return PAGED_E_QUERY;
    case ErrorCode::kProtocol: return PAGED_E_PROTOCOL;
    case ErrorCode::kAssignment: return PAGED_E_ASSIGNMENT;
    case ErrorCode::kDepleted: return PAGED_E_DEPLETED;
    case ErrorCode::kConfig: return PAGED_E_CONFIG;
    case ErrorCode::kRun: return PAGED_E_RUN;
    case ErrorCode::kFit: return PAGED_E_FIT;
  }
  return PAGED_E_INTERNAL;
}

paged_status fail(paged_status s, const std::string& what) {
  last_error = what;
  return s;
}

template <class F>
paged_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return PAGED_OK;
  } catch (const paged::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(PAGED_E_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PAGED_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PAGED_E_INTERNAL, e.what());
  }
}

#define PAGED_REQUIRE(ptr) \
  if (!(ptr)) return fail(PAGED_E_NULL, #ptr " is NULL")

}  // namespace

extern "C" {

const char* paged_last_error(void) { return last_error.c_str(); }

const char* paged_status_name(paged_status status) {
  switch (status) {
    case PAGED_OK: return "ok";
    case PAGED_E_PARAMETER: return "parameter error";
    case PAGED_E_UNDEFINED: return "undefined constant";
    case PAGED_E_EVALUATION: return "evaluation error";
    case PAGED_E_QUERY: return "query error";
    case PAGED_E_PROTOCOL: return "protocol error";
    case PAGED_E_ASSIGNMENT: return "assignment impossible";
    case PAGED_E_DEPLETED: return "graph depleted";
    case PAGED_E_CONFIG: return "config error";
    case PAGED_E_RUN: return "run error";
    case PAGED_E_FIT: return "fit error";
    case PAGED_E_NULL: return "null argument";
    case PAGED_E_BUFFER: return "buffer too small";
    case PAGED_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* paged_version(void) { return paged::version_string(); }

paged_status paged_solve_p0(double* out) {
  PAGED_REQUIRE(out);
  return guarded([&] { *out = paged::solve_p0(); });
}

paged_status paged_solve_zeta(double alpha, double* out) {
  PAGED_REQUIRE(out);
  return guarded([&] { *out = paged::solve_zeta(alpha); });
}

paged_status paged_theory_new(double p, int m, paged_theory** out) {
  PAGED_REQUIRE(out);
  return guarded([&] {
    const paged::ModelParams params = paged::derive_params(p, m);
    *out = new paged_theory{params, paged::spectral_constants(params), paged::TheoryFns(params)};
  });
}

void paged_theory_free(paged_theory* t) { delete t; }

paged_status paged_theory_constants(const paged_theory* t, paged_constants* out) {
  PAGED_REQUIRE(t);
  PAGED_REQUIRE(out);
  const auto& c = t->constants;
  *out = paged_constants{};
  out->p = t->params.p;
  out->alpha = t->params.alpha;
  out->gamma = t->params.gamma;
  out->mu = t->params.mu;
  out->zeta = c.zeta;
  out->beta = c.beta;
  out->has_eta = c.eta.has_value();
  out->eta = c.eta.value_or(0.0);
  out->has_lambda12 = c.lambda1.has_value();
  out->lambda1 = c.lambda1.value_or(0.0);
  out->lambda2 = c.lambda2.value_or(0.0);
  out->has_lambda34 = c.lambda3.has_value();
  out->lambda3 = c.lambda3.value_or(0.0);
  out->lambda4 = c.lambda4.value_or(0.0);
  return PAGED_OK;
}

paged_status paged_theory_q(const paged_theory* t, double tau, double* out) {
  PAGED_REQUIRE(t);
  PAGED_REQUIRE(out);
  return guarded([&] { *out = t->fns.q(tau); });
}

paged_status paged_theory_p(const paged_theory* t, double tau, double* out) {
  PAGED_REQUIRE(t);
  PAGED_REQUIRE(out);
  return guarded([&] { *out = t->fns.p(tau); });
}

paged_status paged_theory_degree_law(const paged_theory* t, int k_max, double tol,
                                     double* out, size_t len) {
  PAGED_REQUIRE(t);
  PAGED_REQUIRE(out);
  if (k_max < 0 || len < static_cast<size_t>(k_max) + 1) {
    return fail(PAGED_E_BUFFER, "degree law needs k_max + 1 slots");
  }
  return guarded([&] {
    const paged::DegreeLaw law = paged::degree_law(t->params, k_max, tol);
    for (int k = 0; k <= k_max; ++k) out[k] = law.x[k];
  });
}

paged_status paged_gq_pmf(int m, double p, double q, int64_t k, double* out) {
  PAGED_REQUIRE(out);
  return guarded([&] { *out = paged::gq_pmf(m, p, q, k); });
}

paged_status paged_sigma_draw(double p, int64_t n, int m, int seed_graph_n, uint64_t seed,
                              paged_depleted_policy policy, int retry_cap,
                              paged_sigma** out) {
  PAGED_REQUIRE(out);
  return guarded([&] {
    paged::SeedGraph g = paged::default_seed_graph(m, seed_graph_n);
    paged::FeasibleSigma fs = paged::draw_feasible_sigma(
        p, n, g, seed,
        policy == PAGED_ABORT ? paged::DepletedPolicy::kAbort : paged::DepletedPolicy::kResample,
        retry_cap);
    auto layout = std::make_shared<const paged::SigmaLayout>(fs.sigma, g);
    *out = new paged_sigma{std::move(g), std::move(fs.sigma), fs.attempts, std::move(layout)};
  });
}

void paged_sigma_free(paged_sigma* s) { delete s; }

paged_status paged_sigma_info(const paged_sigma* s, int64_t* one_n, int64_t* nu_n,
                              int* attempts) {
  PAGED_REQUIRE(s);
  if (one_n) *one_n = s->layout->one_n();
  if (nu_n) *nu_n = s->layout->nu_n();
  if (attempts) *attempts = s->attempts;
  return PAGED_OK;
}

paged_status paged_process_run(const paged_sigma* s, uint64_t seed, paged_graph** out) {
  PAGED_REQUIRE(s);
  PAGED_REQUIRE(out);
  return guarded([&] { *out = new paged_graph{paged::run_process(s->seed_graph, s->sigma, seed)}; });
}

void paged_graph_free(paged_graph* g) { delete g; }

paged_status paged_graph_range(const paged_graph* g, int64_t* one, int64_t* nu, int* m) {
  PAGED_REQUIRE(g);
  if (one) *one = g->state.one();
  if (nu) *nu = g->state.nu();
  if (m) *m = g->state.m();
  return PAGED_OK;
}

paged_status paged_graph_degree(const paged_graph* g, int64_t v, int64_t* out) {
  PAGED_REQUIRE(g);
  PAGED_REQUIRE(out);
  *out = g->state.degree(v);
  return PAGED_OK;
}

paged_status paged_graph_endpoint(const paged_graph* g, int64_t e, int64_t* out) {
  PAGED_REQUIRE(g);
  PAGED_REQUIRE(out);
  if (e < g->state.first_live_edge() || e > g->state.last_live_edge()) {
    return fail(PAGED_E_QUERY, "edge is not live");
  }
  *out = g->state.random_endpoint(e);
  return PAGED_OK;
}

paged_status paged_master_new(const paged_sigma* s, uint64_t seed, paged_master** out) {
  PAGED_REQUIRE(s);
  PAGED_REQUIRE(out);
  return guarded([&] { *out = new paged_master{paged::MasterGraph(s->layout, seed)}; });
}

void paged_master_free(paged_master* mg) { delete mg; }

paged_status paged_master_omega(const paged_master* mg, int64_t e, int64_t* out) {
  PAGED_REQUIRE(mg);
  PAGED_REQUIRE(out);
  return guarded([&] { *out = mg->mg.omega_size(e); });
}

paged_status paged_master_assign(paged_master* mg, int64_t e, int64_t* edge, int* side) {
  PAGED_REQUIRE(mg);
  return guarded([&] {
    const paged::HalfEdge h = mg->mg.assign(e);
    if (edge) *edge = h.edge;
    if (side) *side = h.side;
  });
}

paged_status paged_master_reveal(paged_master* mg, int64_t edge, int side, int64_t* out,
                                 size_t len, size_t* count) {
  PAGED_REQUIRE(mg);
  PAGED_REQUIRE(count);
  std::vector<paged::EdgeId> adopters;
  const paged_status s = guarded([&] { adopters = mg->mg.reveal({edge, side}); });
  if (s != PAGED_OK) return s;
  *count = adopters.size();
  if (adopters.size() > len || (!out && !adopters.empty())) {
    return fail(PAGED_E_BUFFER, "adopter buffer too small; the reveal was applied");
  }
  for (size_t i = 0; i < adopters.size(); ++i) out[i] = adopters[i];
  return PAGED_OK;
}

paged_status paged_master_resolve(paged_master* mg, int64_t e, int64_t* out) {
  PAGED_REQUIRE(mg);
  PAGED_REQUIRE(out);
  return guarded([&] { *out = mg->mg.resolve_endpoint(e); });
}

paged_status paged_master_expose(paged_master* mg, int64_t edge, int side, int64_t budget,
                                 int64_t* tree_size, int64_t* en_count, int* capped) {
  PAGED_REQUIRE(mg);
  return guarded([&] {
    const paged::ExposeResult r = mg->mg.expose({edge, side}, budget);
    if (tree_size) *tree_size = static_cast<int64_t>(r.tree.size());
    if (en_count) *en_count = r.en_count;
    if (capped) *capped = r.capped;
  });
}

paged_status paged_master_search(paged_master* mg, int64_t v0, int64_t reveal_cap,
                                 int64_t round_cap, double ec_threshold,
                                 paged_search_result* out) {
  PAGED_REQUIRE(mg);
  PAGED_REQUIRE(out);
  return guarded([&] {
    paged::SearchOptions opts;
    opts.reveal_cap = reveal_cap;
    opts.round_cap = round_cap;
    opts.ec_threshold = ec_threshold;
    const paged::ComponentResult r = mg->mg.component_search(v0, opts);
    out->verdict = r.verdict == paged::Verdict::kSmall   ? PAGED_SMALL
                   : r.verdict == paged::Verdict::kLarge ? PAGED_LARGE
                                                         : PAGED_UNDECIDED;
    out->edge_count = static_cast<int64_t>(r.edges.size());
    out->rounds = r.rounds;
    out->revealed_in_ec = r.revealed_in_Ec;
    out->identity_violations = r.identity_violations;
  });
}

paged_status paged_master_realize(paged_master* mg, paged_graph** out) {
  PAGED_REQUIRE(mg);
  PAGED_REQUIRE(out);
  return guarded([&] { *out = new paged_graph{mg->mg.realize_full()}; });
}

paged_status paged_cmj_simulate(double alpha, double tau_max, uint64_t seed,
                                int64_t birth_cap, paged_cmj_trace** out) {
  PAGED_REQUIRE(out);
  return guarded([&] {
    *out = new paged_cmj_trace{paged::simulate_cmj(alpha, tau_max, seed, birth_cap)};
  });
}

void paged_cmj_free(paged_cmj_trace* t) { delete t; }

paged_status paged_cmj_alive(const paged_cmj_trace* t, double tau, int64_t* out) {
  PAGED_REQUIRE(t);
  PAGED_REQUIRE(out);
  return guarded([&] { *out = t->trace.alive_at(tau); });
}

paged_status paged_cmj_born(const paged_cmj_trace* t, double tau, int64_t* out) {
  PAGED_REQUIRE(t);
  PAGED_REQUIRE(out);
  return guarded([&] { *out = t->trace.born_before(tau); });
}

paged_status paged_run_command(const char* command, const char* config_json,
                               unsigned threads, paged_artifacts** out) {
  PAGED_REQUIRE(command);
  PAGED_REQUIRE(out);
  return guarded([&] {
    const auto j = nlohmann::json::parse(config_json ? config_json : "{}");
    const paged::ExperimentConfig config = paged::ExperimentConfig::from_json(j);
    *out = new paged_artifacts{paged::run_command(command, config, threads)};
  });
}

size_t paged_artifacts_count(const paged_artifacts* a) { return a ? a->items.size() : 0; }

const char* paged_artifact_name(const paged_artifacts* a, size_t i) {
  return a && i < a->items.size() ? a->items[i].name.c_str() : nullptr;
}

const char* paged_artifact_content(const paged_artifacts* a, size_t i) {
  return a && i < a->items.size() ? a->items[i].content.c_str() : nullptr;
}

void paged_artifacts_free(paged_artifacts* a) { delete a; }

}  // extern "C"
