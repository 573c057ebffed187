#ifndef MARKOFF_H
#define MARKOFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum MarkoffStatus {
  MARKOFF_STATUS_OK = 0,
  MARKOFF_STATUS_NULL_POINTER = 1,
  MARKOFF_STATUS_NOT_PRIME = 2,
  MARKOFF_STATUS_NOT_A_VERTEX = 3,
  /**
   * p exceeds the dense-graph size guard.
   */
  MARKOFF_STATUS_TOO_LARGE = 4,
  /**
   * The output buffer is too small; the required length was written.
   */
  MARKOFF_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * The two vertices lie in different components.
   */
  MARKOFF_STATUS_UNREACHABLE = 6,
  MARKOFF_STATUS_PATH_TOO_LONG = 7,
  MARKOFF_STATUS_OUT_OF_RANGE = 8,
  /**
   * A Rust panic was caught at the boundary.
   */
  MARKOFF_STATUS_PANIC = 9,
} MarkoffStatus;

/**
 * Opaque graph handle.
 */
typedef struct MarkoffGraph MarkoffGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Deterministic primality test for any 64-bit value.
 */
bool markoff_is_prime(uint64_t n);

/**
 * Whether the prime `p` divides `size`.
 *
 * # Safety
 * `out` must be NULL or point to writable storage for a `bool`.
 */
enum MarkoffStatus markoff_chen_verdict(uint64_t size, uint64_t p, bool *out);

/**
 * Builds the Markoff graph mod `p`. With `penner_checks`, the Penner
 * identities are evaluated as well (p > 3 only).
 *
 * # Safety
 * `out` must be NULL or point to writable storage for a handle pointer.
 */
enum MarkoffStatus markoff_graph_new(uint64_t p, bool penner_checks, struct MarkoffGraph **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `graph` must be NULL or a handle from [`markoff_graph_new`] that has not
 * been freed.
 */
void markoff_graph_free(struct MarkoffGraph *graph);

/**
 * The prime, or 0 for a NULL handle.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
uint64_t markoff_graph_prime(const struct MarkoffGraph *graph);

/**
 * Number of vertices, or 0 for a NULL handle.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
uint64_t markoff_graph_vertex_count(const struct MarkoffGraph *graph);

/**
 * Number of connected components, or 0 for a NULL handle.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
uint64_t markoff_graph_component_count(const struct MarkoffGraph *graph);

/**
 * # Safety
 * `graph` must be NULL or a live handle.
 */
bool markoff_graph_is_connected(const struct MarkoffGraph *graph);

/**
 * Every component size is divisible by p.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
bool markoff_graph_chen_ok_all(const struct MarkoffGraph *graph);

/**
 * Writes 1 if every Penner identity held, 0 if one failed, and -1 when
 * they were not evaluated.
 *
 * # Safety
 * `graph` must be NULL or a live handle; `out` NULL or writable.
 */
enum MarkoffStatus markoff_graph_penner_ok(const struct MarkoffGraph *graph, int32_t *out);

/**
 * Component sizes, largest first. `*written` receives the number of
 * components even when the buffer is too small.
 *
 * # Safety
 * `buf` must have room for `cap` values; `written` must be writable.
 */
enum MarkoffStatus markoff_graph_component_sizes(const struct MarkoffGraph *graph,
                                                 uint64_t *buf,
                                                 size_t cap,
                                                 size_t *written);

/**
 * Coordinates of the vertex at dense position `index` (ascending code
 * order), written to `out[0..3]`.
 *
 * # Safety
 * `out` must have room for three values.
 */
enum MarkoffStatus markoff_graph_vertex_at(const struct MarkoffGraph *graph,
                                           uint64_t index,
                                           uint64_t *out);

/**
 * Index of the component containing `coords`; components are numbered by
 * their smallest vertex code.
 *
 * # Safety
 * `coords` must point to three values; `out` must be writable.
 */
enum MarkoffStatus markoff_graph_component_of(const struct MarkoffGraph *graph,
                                              const uint64_t *coords,
                                              uint64_t *out);

/**
 * A shortest move sequence (moves numbered 1 to 3) from `from` to `to`,
 * lexicographically smallest among shortest ones. Returns
 * `MARKOFF_STATUS_UNREACHABLE` across components.
 *
 * # Safety
 * `from` and `to` must point to three values each; `moves` must have room
 * for `cap` bytes; `written` must be writable.
 */
enum MarkoffStatus markoff_graph_path(const struct MarkoffGraph *graph,
                                      const uint64_t *from,
                                      const uint64_t *to,
                                      uint8_t *moves,
                                      size_t cap,
                                      size_t *written);

/**
 * Lifts `coords` to an integer Markoff triple by replaying a path from
 * (1, 1, 1). On success `*out` receives a string `"a1,a2,a3"` in decimal,
 * to be released with [`markoff_string_free`].
 *
 * # Safety
 * `coords` must point to three values; `out` must be writable.
 */
enum MarkoffStatus markoff_graph_lift(const struct MarkoffGraph *graph,
                                      const uint64_t *coords,
                                      size_t max_moves,
                                      char **out);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void markoff_string_free(char *s);

/**
 * Static description of a status code.
 */
const char *markoff_status_message(enum MarkoffStatus status);

/**
 * Description of the last failure on this thread, or "" after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *markoff_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MARKOFF_H */
