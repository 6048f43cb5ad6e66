#ifndef RBL_H
#define RBL_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RblStatus {
  RBL_STATUS_OK = 0,
  RBL_STATUS_NULL_POINTER = 1,
  RBL_STATUS_INVALID_ARGUMENT = 2,
  RBL_STATUS_BUFFER_TOO_SMALL = 3,
  RBL_STATUS_INTERNAL = 4,
} RblStatus;

/**
 * A recursive tree on `n + 1` vertices labeled in insertion order.
 */
typedef struct RblTree RblTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *rbl_last_error_message(void);

/**
 * Uniform random recursive tree with `n` edges, drawn from `seed`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RblStatus rbl_tree_generate_urrt(size_t n, uint64_t seed, struct RblTree **out);

/**
 * Preferential attachment tree with `n` edges and parameter `beta > 0`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RblStatus rbl_tree_generate_pa(size_t n, double beta, uint64_t seed, struct RblTree **out);

/**
 * Tree from the parents of vertices `1..=n`; each parent must precede its child.
 *
 * # Safety
 * `parents` must point to `n` readable values (it may be null when `n == 0`);
 * `out` must be a valid pointer.
 */
enum RblStatus rbl_tree_from_parents(const uint32_t *parents, size_t n, struct RblTree **out);

/**
 * # Safety
 * `tree` must come from this library and not be freed twice. Null is a no-op.
 */
void rbl_tree_free(struct RblTree *tree);

/**
 * # Safety
 * `tree` and `out` must be valid pointers.
 */
enum RblStatus rbl_tree_num_vertices(const struct RblTree *tree, size_t *out);

/**
 * Copies the parents of vertices `1..=n` into `buf` (capacity `len`).
 *
 * # Safety
 * `tree` must be valid; `buf` must hold `len` writable values.
 */
enum RblStatus rbl_tree_parents(const struct RblTree *tree, uint32_t *buf, size_t len);

/**
 * Broadcasts a uniform root bit with flip probability `q`, writing one value
 * per vertex: `1`, `-1`, or `0` for a bit hidden by `leaves_only`.
 *
 * # Safety
 * `tree` must be valid; `buf` must hold `len` writable values.
 */
enum RblStatus rbl_assign_bits(const struct RblTree *tree,
                               double q,
                               uint64_t seed,
                               bool leaves_only,
                               int8_t *buf,
                               size_t len);

/**
 * Estimates the root bit from the tree shape and the bits in `bits`
 * (`1`, `-1`, or `0` for hidden; any hidden bit selects the leaves-only
 * variant). Labels are shuffled with `seed` before the estimator sees them.
 * `estimator` is one of `majority`, `centroid`, `bayes`, `structured`.
 *
 * # Safety
 * `tree` must be valid; `bits` must hold one value per vertex; `estimator`
 * must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum RblStatus rbl_estimate(const struct RblTree *tree,
                            const int8_t *bits,
                            size_t len,
                            const char *estimator_name,
                            uint64_t seed,
                            int8_t *out);

/**
 * Posterior probability that each vertex is the root, given only the shape.
 *
 * # Safety
 * `tree` must be valid; `buf` must hold `len` writable values.
 */
enum RblStatus rbl_root_posterior(const struct RblTree *tree, double *buf, size_t len);

/**
 * Writes the one or two centroids into `buf[0..2]` and their number to `count`.
 *
 * # Safety
 * `tree` and `count` must be valid; `buf` must hold two writable values.
 */
enum RblStatus rbl_centroids(const struct RblTree *tree, size_t *buf, size_t *count);

/**
 * Exact error probability of an estimator on URRTs with `n <= 7` edges.
 *
 * # Safety
 * `estimator` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RblStatus rbl_exhaustive_risk(size_t n,
                                   double q,
                                   const char *estimator_name,
                                   bool leaves_only,
                                   double *out);

/**
 * Runs an experiment described by a JSON configuration and returns the
 * results as a JSON array in `*out`, to be released with [`rbl_string_free`].
 * `threads == 0` uses the default thread pool.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RblStatus rbl_run_experiment_json(const char *config_json, size_t threads, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is a no-op.
 */
void rbl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RBL_H */
