/*
 * C API of the inference-primitive optimization library.
 *
 * All functions returning infprim_status set a thread-local error message
 * readable through infprim_last_error() on failure. Handles are opaque and
 * freed with their matching *_free function; passing NULL to a free function
 * is a no-op.
 */
#ifndef INFPRIM_H
#define INFPRIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum infprim_status {
    INFPRIM_OK = 0,
    INFPRIM_ERR_INVALID_ARGUMENT = 1,
    INFPRIM_ERR_DOMAIN = 2,
    INFPRIM_ERR_INDEX = 3,
    INFPRIM_ERR_IO = 4,
    INFPRIM_ERR_PARSE = 5,
    INFPRIM_ERR_EMPTY_ELITE = 6,
    INFPRIM_ERR_DEGENERATE = 7,
    INFPRIM_ERR_INTERNAL = 8
} infprim_status;

typedef struct infprim_problem infprim_problem;
typedef struct infprim_protocol infprim_protocol;
typedef struct infprim_run infprim_run;

const char* infprim_last_error(void);
const char* infprim_status_name(infprim_status status);

/* ---- problems (text instance format, "ising v1") ---- */

infprim_status infprim_problem_read(const char* path, infprim_problem** out);
infprim_status infprim_problem_write(const infprim_problem* problem, const char* path);
/* Fully connected random instance; fix_last_down != 0 also pins the last spin
 * down, producing the symmetry-broken (n-1)-spin problem. */
infprim_status infprim_problem_sk(int n, uint64_t seed, int fix_last_down,
                                  infprim_problem** out);
void infprim_problem_free(infprim_problem* problem);

int infprim_problem_num_spins(const infprim_problem* problem);
/* spins: len entries, each +1 or -1 */
infprim_status infprim_problem_energy(const infprim_problem* problem, const int8_t* spins,
                                      int len, double* out);
infprim_status infprim_problem_ground_energy(const infprim_problem* problem, int cap,
                                             double* out);
infprim_status infprim_problem_write_ground_states(const infprim_problem* problem, int cap,
                                                   const char* path);

/* ---- protocols (JSON documents) ---- */

infprim_status infprim_protocol_read(const char* path, infprim_protocol** out);
infprim_status infprim_protocol_parse(const char* text, infprim_protocol** out);
/* Canonical serialized form; free the returned string with infprim_string_free. */
infprim_status infprim_protocol_to_json(const infprim_protocol* protocol, char** out);
void infprim_protocol_free(infprim_protocol* protocol);
void infprim_string_free(char* s);

/* ---- protocol runs ---- */

/* seed_override >= 0 replaces the protocol file seed; workers_override >= 1
 * replaces the worker count. */
infprim_status infprim_run_protocol(const infprim_problem* problem,
                                    const infprim_protocol* protocol, int64_t seed_override,
                                    int workers_override, infprim_run** out);
double infprim_run_best_energy(const infprim_run* run);
int infprim_run_rounds(const infprim_run* run);
/* buf must hold at least num_spins entries */
infprim_status infprim_run_best_config(const infprim_run* run, int8_t* buf, int len);
infprim_status infprim_run_write_events(const infprim_run* run, const char* path);
/* header_comment (may be NULL) is prepended verbatim before the CSV header */
infprim_status infprim_run_write_summary(const infprim_run* run, const char* header_comment,
                                         const char* path);
/* raw reads (read,energy,s0..s{n-1}) of the member holding the best energy */
infprim_status infprim_run_write_reads(const infprim_run* run, const char* path);
void infprim_run_free(infprim_run* run);

/* ---- experiments ---- */

infprim_status infprim_gen_instances(int n, int count, uint64_t seed, const char* out_dir);

/* Full solve pipeline: runs the protocol file against the instance file and
 * writes <out_prefix>.events.log, <out_prefix>.summary.csv,
 * <out_prefix>.best.txt and, when dump_reads != 0, <out_prefix>.reads.csv.
 * seed_override < 0 and workers_override < 1 keep the protocol file values. */
infprim_status infprim_solve_files(const char* instance_path, const char* protocol_path,
                                   int64_t seed_override, int workers_override,
                                   const char* out_prefix, int dump_reads);

infprim_status infprim_oracle_files(const char* instance_path, const char* out_path, int cap);

infprim_status infprim_bp_files(const char* instance_path, double temperature, int max_iters,
                                double damping, double tolerance, const char* out_csv);

typedef struct infprim_calibration_config {
    int instances;
    int n;
    int reads;
    int bins;
    int tau;
    int trotter_slices;
    double temperature;
    uint64_t seed;
} infprim_calibration_config;

infprim_status infprim_calibration_run(const infprim_calibration_config* config,
                                       const char* out_csv);

infprim_status infprim_bp_csv(const infprim_problem* problem, double temperature, int max_iters,
                              double damping, double tolerance, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* INFPRIM_H */
