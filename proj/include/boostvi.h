/* C API of the boosting variational inference library.
 *
 * Every function returns a status code (BV_OK on success); the most recent
 * error message for the calling thread is available through bv_last_error().
 * Handles are opaque and must be released with their _close function.
 */
#ifndef BOOSTVI_H
#define BOOSTVI_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define BV_OK 0
#define BV_ERR_RUNTIME 1
#define BV_ERR_CONFIG 2
#define BV_ERR_ARGUMENT 3

typedef struct bv_experiment bv_experiment;
typedef struct bv_result bv_result;

typedef struct bv_trace_row {
    long long t;
    double objective;
    double objective_stderr;
    double gamma;
    double gap;
    double gap_stderr;
    double lmo_value;
    long long active_atoms;
    double wallclock_ms;
} bv_trace_row;

const char* bv_version(void);

/* Message of the last failing call on this thread ("" if none). */
const char* bv_last_error(void);

/* Parses and validates a configuration file. */
int bv_experiment_open(const char* config_path, bv_experiment** out);
int bv_experiment_set_seed(bv_experiment* exp, unsigned long long seed);
int bv_experiment_set_output_dir(bv_experiment* exp, const char* dir);
const char* bv_experiment_algorithm(const bv_experiment* exp);
const char* bv_experiment_output_dir(const bv_experiment* exp);

/* 1 when the two configurations differ in solver.algorithm only. */
int bv_experiment_same_except_algorithm(const bv_experiment* a, const bv_experiment* b);
void bv_experiment_close(bv_experiment* exp);

/* Runs the experiment and writes trace.csv / summary.json / resolved.cfg
 * under the output directory. On BV_ERR_RUNTIME a result holding the partial
 * trace may still be returned (check *out for non-NULL). */
int bv_experiment_run(bv_experiment* exp, bv_result** out);

long long bv_result_row_count(const bv_result* res);
int bv_result_row(const bv_result* res, long long index, bv_trace_row* out);
const char* bv_result_trace_path(const bv_result* res);
const char* bv_result_summary_path(const bv_result* res);
const char* bv_result_config_snapshot_path(const bv_result* res);
const char* bv_result_summary_json(const bv_result* res);
void bv_result_close(bv_result* res);

/* Constants report plus quadrature spot checks. Returns BV_ERR_RUNTIME when
 * a check failed (the report is still produced). Free with bv_free. */
int bv_verify(const char* config_path, int as_json, char** out_report);

void bv_free(char* p);

#ifdef __cplusplus
}
#endif

#endif /* BOOSTVI_H */
