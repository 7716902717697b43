#ifndef RUBBER_ROPE_H
#define RUBBER_ROPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum RrStatus {
  RR_STATUS_OK = 0,
  // A required pointer argument was null.
  RR_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  RR_STATUS_INVALID_UTF8 = 2,
  // A value lies outside the mathematical domain.
  RR_STATUS_DOMAIN = 3,
  // An API precondition was violated.
  RR_STATUS_CONTRACT = 4,
  // A distribution string did not parse.
  RR_STATUS_PARSE = 5,
  // An output buffer was too small.
  RR_STATUS_BUFFER_TOO_SMALL = 6,
  // An internal panic was caught.
  RR_STATUS_PANIC = 7,
} RrStatus;

typedef enum RrSolveMethod {
  RR_SOLVE_METHOD_EXACT_RATIONAL = 0,
  RR_SOLVE_METHOD_COMPENSATED_SUM = 1,
  RR_SOLVE_METHOD_DIGAMMA_ASYMPTOTIC = 2,
} RrSolveMethod;

// Trajectory records of a batch, in substream order.
typedef struct RrBatch RrBatch;

// A process: initial length plus the step and stretch laws.
typedef struct RrProcess RrProcess;

typedef struct RrTrajectory {
  uint64_t substream_id;
  // Zero when `censored` is set.
  uint64_t hitting_time;
  bool censored;
  uint64_t cap;
  double final_fraction;
} RrTrajectory;

// Missing values are NaN.
typedef struct RrMeanEstimate {
  double mean;
  double ci_lo;
  double ci_hi;
  uint64_t n_used;
  // Set when censored records were dropped; the mean is then biased low.
  bool censored_warning;
} RrMeanEstimate;

typedef struct RrHarmonicInverse {
  // False when the answer does not fit in `u64`; only `log10_m` is then set.
  bool has_m;
  uint64_t m;
  double log10_m;
  double log10_error;
  bool certified;
} RrHarmonicInverse;

typedef struct RrSolveReport {
  // False when the hitting time does not fit in `u64`.
  bool has_hitting_time;
  uint64_t hitting_time;
  double log10_hitting_time;
  double log10_error;
  enum RrSolveMethod method;
  double error_bound;
  bool certified;
} RrSolveReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a
// successful call. Valid until the next call into this library on the
// same thread; do not free.
const char *rr_last_error(void);

// Library version as a static NUL-terminated string.
const char *rr_version(void);

// Creates a process from an initial length and two distribution strings
// such as `"exponential:mean=1"` or `"pareto:scale=1,shape=2.5"`.
//
// Infinite-mean laws are rejected unless `exploration` is true.
//
// # Safety
// `step` and `stretch` must be null or NUL-terminated strings. `out` must
// be null or valid for a pointer write.
enum RrStatus rr_process_new(double l0,
                             const char *step,
                             const char *stretch,
                             bool exploration,
                             struct RrProcess **out);

// # Safety
// `process` must be null or a pointer from [`rr_process_new`] not yet freed.
void rr_process_free(struct RrProcess *process);

// Simulates one trajectory until the end is reached or `cap` seconds pass.
//
// # Safety
// `process` must be a live handle and `out` valid for a write.
enum RrStatus rr_simulate_trajectory(const struct RrProcess *process,
                                     uint64_t substream_id,
                                     uint64_t master_seed,
                                     uint64_t cap,
                                     struct RrTrajectory *out);

// Simulates substreams `0 .. n_trajectories` on up to `threads` threads.
// The records do not depend on `threads`.
//
// # Safety
// `process` must be a live handle and `out` valid for a pointer write.
enum RrStatus rr_batch_run(const struct RrProcess *process,
                           uint64_t n_trajectories,
                           uint64_t master_seed,
                           uint64_t cap,
                           size_t threads,
                           struct RrBatch **out);

// # Safety
// `batch` must be null or a pointer from [`rr_batch_run`] not yet freed.
void rr_batch_free(struct RrBatch *batch);

// Number of records, or 0 when `batch` is null.
//
// # Safety
// `batch` must be null or a live handle.
size_t rr_batch_len(const struct RrBatch *batch);

// # Safety
// `batch` must be a live handle and `out` valid for a write.
enum RrStatus rr_batch_get(const struct RrBatch *batch, size_t index, struct RrTrajectory *out);

// Mean of the non-censored hitting times with a normal-approximation
// interval at level `confidence`.
//
// # Safety
// `batch` must be a live handle and `out` valid for a write.
enum RrStatus rr_batch_mean_hitting_time(const struct RrBatch *batch,
                                         double confidence,
                                         struct RrMeanEstimate *out);

// Writes the empirical `P(T > n)` for `n = 0 ..= horizon` into `out`,
// which must hold at least `horizon + 1` values.
//
// # Safety
// `batch` must be a live handle and `out` valid for `out_len` writes.
enum RrStatus rr_batch_survival(const struct RrBatch *batch,
                                uint64_t horizon,
                                double *out,
                                size_t out_len);

// `H_m = 1 + 1/2 + ... + 1/m`.
//
// # Safety
// `out` must be valid for a write.
enum RrStatus rr_harmonic_number(uint64_t m, double *out);

// Smallest `m` with `H_m >= c`.
//
// # Safety
// `out` must be valid for a write.
enum RrStatus rr_invert_harmonic(double c, struct RrHarmonicInverse *out);

// Hitting time of the constant process with initial length `l0`, step `x`
// and stretch `stretch`.
//
// # Safety
// `out` must be valid for a write.
enum RrStatus rr_solve(double l0, double x, double stretch, struct RrSolveReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RUBBER_ROPE_H */
