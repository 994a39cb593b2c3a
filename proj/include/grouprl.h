/* grouprl.h — public C interface of the grouprl shared library.
 *
 * All functions return grl_status (GRL_OK on success) unless noted; the
 * message for the most recent failure on the calling thread is available
 * via grl_last_error().  Handles are opaque and freed with their matching
 * grl_*_free function.
 *
 * Configuration strings are newline-separated `key = value` pairs with `#`
 * comments.  Recognized keys are documented in the README; `preset` selects
 * a built-in experiment (fig4, fig5a, fig5b) whose fields can be overridden
 * by later lines.
 */
#ifndef GROUPRL_H
#define GROUPRL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum grl_status {
  GRL_OK = 0,
  GRL_ERR_INVALID_ARGUMENT = 1,
  GRL_ERR_INVALID_DATA = 2,
  GRL_ERR_INCONSISTENT = 3,
  GRL_ERR_UNDEFINED = 4,
  GRL_ERR_OUT_OF_REGIME = 5,
  GRL_ERR_INSTABILITY = 6,
  GRL_ERR_IO = 7,
  GRL_ERR_BUFFER_TOO_SMALL = 8,
  GRL_ERR_UNKNOWN = 99
} grl_status;

const char* grl_version(void);
/* Message of the most recent error on this thread (empty when none). */
const char* grl_last_error(void);

/* ---- finite groups ---------------------------------------------------- */
typedef struct grl_group grl_group;

grl_status grl_group_create_cyclic(int n, grl_group** out);
/* kind: "symmetric" | "alternating" */
grl_status grl_group_create_permutation(const char* kind, int n, grl_group** out);
void grl_group_free(grl_group* g);

int grl_group_order(const grl_group* g);
int grl_group_identity(const grl_group* g);
int grl_group_compose(const grl_group* g, int a, int b);
int grl_group_inverse(const grl_group* g, int a);
int grl_group_act(const grl_group* g, int elem, int state);
int grl_group_abelian(const grl_group* g);
/* 1 = simple, 0 = not simple, -1 = not determined (order above scan cap) */
int grl_group_simple(const grl_group* g);

/* ---- position space and reasoning instances --------------------------- */
typedef struct grl_space grl_space;

grl_status grl_space_create(int dpos, uint64_t seed, grl_space** out);
void grl_space_free(grl_space* s);
int grl_space_dpos(const grl_space* s);
int grl_space_align(const grl_space* s, int prompt_pos);

/* Samples one instance into caller buffers: transitions[horizon],
 * prompt_pos[horizon], answer_pos[horizon+1], states[horizon]. */
grl_status grl_sample_instance(const grl_group* g, const grl_space* s, int horizon,
                               uint64_t seed, int* transitions, int* prompt_pos, int* answer_pos,
                               int* y0, int* states);
/* Writes a semicolon-separated violation list (empty string = valid). */
grl_status grl_validate_instance(const grl_group* g, const grl_space* s, int horizon,
                                 const int* transitions, const int* prompt_pos,
                                 const int* answer_pos, int y0, const int* states, char* report,
                                 size_t report_len);

/* ---- trainers ---------------------------------------------------------- */
typedef struct grl_trainer grl_trainer;

grl_status grl_trainer_create(const char* config, grl_trainer** out);
void grl_trainer_free(grl_trainer* t);

/* Advances up to `iters` iterations (capped by the configured total),
 * buffering one JSON evaluation record per eval cadence. */
grl_status grl_trainer_run(grl_trainer* t, long long iters);
/* Pops the oldest buffered record into buf; returns 1, or 0 when empty. */
int grl_trainer_poll_record(grl_trainer* t, char* buf, size_t buflen);
long long grl_trainer_iteration(const grl_trainer* t);
long long grl_trainer_total_iters(const grl_trainer* t);
int grl_trainer_num_lengths(const grl_trainer* t);
int grl_trainer_length(const grl_trainer* t, int idx);
int grl_trainer_group_order(const grl_trainer* t);

grl_status grl_trainer_save_checkpoint(const grl_trainer* t, const char* path);
grl_status grl_trainer_load_checkpoint(grl_trainer* t, const char* path);

/* ---- reduced learning dynamics ----------------------------------------- */
typedef struct grl_dynamics grl_dynamics;

/* Runs the reduced (q, r) integrator described by the configuration and
 * returns a handle over the recorded timeline. */
grl_status grl_dynamics_run(const char* config, grl_dynamics** out);
void grl_dynamics_free(grl_dynamics* dyn);

int grl_dynamics_num_lengths(const grl_dynamics* dyn);
int grl_dynamics_length(const grl_dynamics* dyn, int idx);
long long grl_dynamics_rows(const grl_dynamics* dyn);
int grl_dynamics_diverged(const grl_dynamics* dyn);
/* j_center, j_exact, grad_q are caller arrays of num_lengths doubles. */
grl_status grl_dynamics_row(const grl_dynamics* dyn, long long idx, long long* t, double* q,
                            double* r, double* j_center, double* j_exact, double* grad_q);
/* Transition table and regime label as a JSON object. */
grl_status grl_dynamics_report_json(const grl_dynamics* dyn, double ratio,
                                    double grokking_threshold, char* buf, size_t buflen);

/* Critical threshold of the attention score gap for J_L >= 1 - xi
 * (attention_mode: attn_L >= 1 - xi). */
grl_status grl_critical_q(int horizon, double xi, int d, int cb, int attention_mode,
                          double* value, double* paper_form, double* first_order);

/* ---- curve analysis ----------------------------------------------------- */
/* rewards is row-major [num_lengths][num_points]; writes the transition
 * table and regime label as JSON. */
grl_status grl_analyze_curves(int d, int num_lengths, const int* lengths, long long num_points,
                              const long long* iterations, const double* rewards, double ratio,
                              double grokking_threshold, char* buf, size_t buflen);

/* ---- verification ------------------------------------------------------- */
typedef void (*grl_check_cb)(const char* name, int pass, const char* detail, void* user);

/* Runs the invariant suites (full_level != 0 adds the long acceptance
 * checks).  Returns the number of failed checks through *failures. */
grl_status grl_verify(int full_level, const char* data_dir, uint64_t seed, grl_check_cb cb,
                      void* user, int* failures);

/* Stable 64-bit hash of a configuration string: key order, comments and
 * whitespace do not affect it. */
uint64_t grl_config_hash(const char* config);

#ifdef __cplusplus
}
#endif

#endif /* GROUPRL_H */
