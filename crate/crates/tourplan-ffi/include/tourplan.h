/* C interface to the tourplan itinerary solver.
 *
 * Conventions:
 *  - Handles are opaque; create them through tp_* constructors and release
 *    them with the matching tp_*_free. Freeing NULL is a no-op; accessors
 *    on NULL return zeros.
 *  - Fallible calls return a TpStatus; on anything but TP_STATUS_OK the
 *    output pointer is untouched and tp_last_error_message() describes the
 *    failure (thread-local buffer, valid until the next failing call on
 *    the same thread).
 *  - Strings returned through out-pointers are NUL-terminated UTF-8 owned
 *    by the caller; release them with tp_string_free.
 *  - Panics never cross the boundary; they surface as TP_STATUS_INTERNAL.
 */

#ifndef TOURPLAN_H
#define TOURPLAN_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum TpStatus {
  TP_STATUS_OK = 0,
  TP_STATUS_NULL_POINTER = 1,
  TP_STATUS_INVALID_ARGUMENT = 2,
  TP_STATUS_LOAD_FAILED = 3,
  TP_STATUS_INTERNAL = 4,
} TpStatus;

/* Opaque handle to a loaded problem instance. */
typedef struct TpInstance TpInstance;

/* Opaque handle to a finished solve; self-contained, so the instance may
 * be freed first. */
typedef struct TpSolution TpSolution;

/* Message describing the most recent failure on this thread ("" if none). */
const char *tp_last_error_message(void);

/* Loads an instance from a JSON file. */
TpStatus tp_instance_load(const char *path, TpInstance **out);

/* Generates a seeded synthetic instance (identical seeds give identical
 * instances). Requires n_pois >= 1, days >= 1 and a positive finite c_max
 * (minutes per day). */
TpStatus tp_instance_generate(uint64_t n_pois, uint64_t days, uint64_t seed,
                              double c_max, TpInstance **out);

/* Number of schedulable PoIs (opening windows), anchors excluded. */
uint64_t tp_instance_candidate_count(const TpInstance *inst);

/* Number of daily itineraries the instance plans for. */
uint64_t tp_instance_day_count(const TpInstance *inst);

void tp_instance_free(TpInstance *inst);

/* Runs the solver. max_iter bounds consecutive non-improving iterations;
 * time_limit_secs must be positive and finite; radius_km <= 0 (or
 * non-finite) lifts the candidate radius limit; use_clustering != 0 groups
 * candidates by walkability and keeps each day's visits cluster-contiguous.
 */
TpStatus tp_solve(const TpInstance *inst, uint64_t max_iter,
                  double time_limit_secs, double radius_km,
                  int32_t use_clustering, TpSolution **out);

/* Sum of scores over all scheduled visits. */
double tp_solution_total_score(const TpSolution *sol);

/* Number of mobility-preference violations across all days. */
uint64_t tp_solution_violation_count(const TpSolution *sol);

/* Number of daily itineraries in the solution. */
uint64_t tp_solution_day_count(const TpSolution *sol);

/* Number of scheduled PoI visits across all days. */
uint64_t tp_solution_visit_count(const TpSolution *sol);

/* Search iterations the solver ran. */
uint64_t tp_solution_iterations(const TpSolution *sol);

/* Wall-clock seconds the solve took. */
double tp_solution_elapsed_secs(const TpSolution *sol);

/* Copies the solution as pretty-printed JSON into a fresh string owned by
 * the caller (release with tp_string_free). */
TpStatus tp_solution_to_json(const TpSolution *sol, char **out);

void tp_string_free(char *text);

void tp_solution_free(TpSolution *sol);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TOURPLAN_H */
