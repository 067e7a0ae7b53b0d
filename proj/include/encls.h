#ifndef ENCLS_H
#define ENCLS_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Return codes shared with the CLI: 0 success, 1 pipeline failure,
 * 2 bad usage or configuration. Functions returning pointers yield NULL on
 * failure. encls_last_error() describes the most recent failure on the
 * calling thread. */
#define ENCLS_OK 0
#define ENCLS_ERR_RUN 1
#define ENCLS_ERR_CONFIG 2

const char* encls_version(void);
const char* encls_last_error(void);

/* Frees any buffer an encls_* function handed out through a char**. */
void encls_buffer_free(char* p);

/* ---- CNF formulas ---- */

typedef struct encls_formula encls_formula;

encls_formula* encls_formula_parse_dimacs(const char* text);
void encls_formula_free(encls_formula* f);
int encls_formula_num_vars(const encls_formula* f);
long encls_formula_num_clauses(const encls_formula* f);
/* Serializes back to DIMACS. */
int encls_formula_write_dimacs(const encls_formula* f, char** text_out);

/* ---- encodings ---- */

/* Encodes raw instance text under the named scheme ("coloring", "dfvs",
 * "bddt"). Pass bound < 0 to use the scheme's upper-bound heuristic; the
 * bound actually used lands in *bound_out. The two output buffers are owned
 * by the caller. */
int encls_encode(const char* scheme, const char* instance_text, long bound,
                 char** dimacs_out, char** varmap_json_out, long* bound_out);

/* ---- local search ---- */

/* Runs WalkSAT; assignment_out must hold num_vars ints and receives +1/-1
 * per variable (index v-1). *found_out is 1 when a model was found. */
int encls_walksat(const encls_formula* f, unsigned long long seed,
                  double timeout_seconds, double noise, int* assignment_out,
                  int* found_out);

/* ---- solving ---- */

#define ENCLS_SAT 0
#define ENCLS_UNSAT 1
#define ENCLS_TIMEOUT 2

/* Complete backtracking solver with phase preferences. phases may be NULL
 * or hold num_vars entries (+1/-1, 0 = no preference). model_out may be
 * NULL; otherwise it must hold num_vars ints and is filled on SAT. */
int encls_mini_solve(const encls_formula* f, const int* phases,
                     double timeout_seconds, int* status_out, int* model_out);

/* ---- pipeline ---- */

/* Runs one pipeline verb (encode, split, gather, refine, evaluate, baseline,
 * report) against a full JSON configuration. `encode` takes args:
 * {instance_path, out_dir[, bound]}; the other verbs take none. Progress is
 * written to stdout, errors to stderr. Returns the exit code. */
int encls_run_verb(const char* verb, const char* config_json,
                   const char* const* args, size_t nargs);

/* Asks a running pipeline verb to stop at the next safe point; partial
 * state stays on disk. Safe to call from a signal handler. */
void encls_request_stop(void);

#ifdef __cplusplus
}
#endif

#endif /* ENCLS_H */
