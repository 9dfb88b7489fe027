#ifndef PAGED_PAGED_H
#define PAGED_PAGED_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PAGED_API __declspec(dllexport)
#else
#define PAGED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum paged_status {
  PAGED_OK = 0,
  PAGED_E_PARAMETER = 1,
  PAGED_E_UNDEFINED = 2,
  PAGED_E_EVALUATION = 3,
  PAGED_E_QUERY = 4,
  PAGED_E_PROTOCOL = 5,
  PAGED_E_ASSIGNMENT = 6,
  PAGED_E_DEPLETED = 7,
  PAGED_E_CONFIG = 8,
  PAGED_E_RUN = 9,
  PAGED_E_FIT = 10,
  PAGED_E_NULL = 11,
  PAGED_E_BUFFER = 12,
  PAGED_E_INTERNAL = 13
} paged_status;

typedef enum paged_depleted_policy {
  PAGED_RESAMPLE = 0,
  PAGED_ABORT = 1
} paged_depleted_policy;

typedef enum paged_verdict {
  PAGED_SMALL = 0,
  PAGED_LARGE = 1,
  PAGED_UNDECIDED = 2
} paged_verdict;

typedef struct paged_theory paged_theory;
typedef struct paged_sigma paged_sigma;
typedef struct paged_graph paged_graph;
typedef struct paged_master paged_master;
typedef struct paged_cmj_trace paged_cmj_trace;
typedef struct paged_artifacts paged_artifacts;

typedef struct paged_constants {
  double p, alpha, gamma, mu, zeta, beta;
  double eta, lambda1, lambda2, lambda3, lambda4;
  /* 0 when the constant is undefined for this regime */
  int has_eta, has_lambda12, has_lambda34;
} paged_constants;

typedef struct paged_search_result {
  paged_verdict verdict;
  int64_t edge_count;
  int64_t rounds;
  int64_t revealed_in_ec;
  int64_t identity_violations;
} paged_search_result;

/* Message for the last failing call on this thread; never NULL. */
PAGED_API const char* paged_last_error(void);
PAGED_API const char* paged_status_name(paged_status status);
PAGED_API const char* paged_version(void);

/* theory */
PAGED_API paged_status paged_solve_p0(double* out);
PAGED_API paged_status paged_solve_zeta(double alpha, double* out);
PAGED_API paged_status paged_theory_new(double p, int m, paged_theory** out);
PAGED_API void paged_theory_free(paged_theory* t);
PAGED_API paged_status paged_theory_constants(const paged_theory* t, paged_constants* out);
PAGED_API paged_status paged_theory_q(const paged_theory* t, double tau, double* out);
PAGED_API paged_status paged_theory_p(const paged_theory* t, double tau, double* out);
/* Writes x_0..x_{k_max} into out[0..k_max]. */
PAGED_API paged_status paged_theory_degree_law(const paged_theory* t, int k_max,
                                               double tol, double* out, size_t len);
PAGED_API paged_status paged_gq_pmf(int m, double p, double q, int64_t k, double* out);

/* sigma and the on-line process */
PAGED_API paged_status paged_sigma_draw(double p, int64_t n, int m, int seed_graph_n,
                                        uint64_t seed, paged_depleted_policy policy,
                                        int retry_cap, paged_sigma** out);
PAGED_API void paged_sigma_free(paged_sigma* s);
PAGED_API paged_status paged_sigma_info(const paged_sigma* s, int64_t* one_n,
                                        int64_t* nu_n, int* attempts);

PAGED_API paged_status paged_process_run(const paged_sigma* s, uint64_t seed,
                                         paged_graph** out);
PAGED_API void paged_graph_free(paged_graph* g);
PAGED_API paged_status paged_graph_range(const paged_graph* g, int64_t* one,
                                         int64_t* nu, int* m);
PAGED_API paged_status paged_graph_degree(const paged_graph* g, int64_t v, int64_t* out);
PAGED_API paged_status paged_graph_endpoint(const paged_graph* g, int64_t e, int64_t* out);

/* master graph */
PAGED_API paged_status paged_master_new(const paged_sigma* s, uint64_t seed,
                                        paged_master** out);
PAGED_API void paged_master_free(paged_master* mg);
PAGED_API paged_status paged_master_omega(const paged_master* mg, int64_t e, int64_t* out);
PAGED_API paged_status paged_master_assign(paged_master* mg, int64_t e,
                                           int64_t* edge, int* side);
/* Adopters are written to out when it is large enough; *count always
   receives the number of adopters. */
PAGED_API paged_status paged_master_reveal(paged_master* mg, int64_t edge, int side,
                                           int64_t* out, size_t len, size_t* count);
PAGED_API paged_status paged_master_resolve(paged_master* mg, int64_t e, int64_t* out);
PAGED_API paged_status paged_master_expose(paged_master* mg, int64_t edge, int side,
                                           int64_t budget, int64_t* tree_size,
                                           int64_t* en_count, int* capped);
PAGED_API paged_status paged_master_search(paged_master* mg, int64_t v0,
                                           int64_t reveal_cap, int64_t round_cap,
                                           double ec_threshold,
                                           paged_search_result* out);
PAGED_API paged_status paged_master_realize(paged_master* mg, paged_graph** out);

/* CMJ traces */
PAGED_API paged_status paged_cmj_simulate(double alpha, double tau_max, uint64_t seed,
                                          int64_t birth_cap, paged_cmj_trace** out);
PAGED_API void paged_cmj_free(paged_cmj_trace* t);
PAGED_API paged_status paged_cmj_alive(const paged_cmj_trace* t, double tau, int64_t* out);
PAGED_API paged_status paged_cmj_born(const paged_cmj_trace* t, double tau, int64_t* out);

/* experiments: command is theory, simulate, cmj or master; config is a JSON
   object (missing keys take defaults). threads = 0 picks a default. */
PAGED_API paged_status paged_run_command(const char* command, const char* config_json,
                                         unsigned threads, paged_artifacts** out);
PAGED_API size_t paged_artifacts_count(const paged_artifacts* a);
PAGED_API const char* paged_artifact_name(const paged_artifacts* a, size_t i);
PAGED_API const char* paged_artifact_content(const paged_artifacts* a, size_t i);
PAGED_API void paged_artifacts_free(paged_artifacts* a);

#ifdef __cplusplus
}
#endif

#endif
