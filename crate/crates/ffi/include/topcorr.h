#ifndef TOPCORR_H
#define TOPCORR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TopcorrStatus {
  TOPCORR_STATUS_OK = 0,
  TOPCORR_STATUS_NULL_ARGUMENT = 1,
  TOPCORR_STATUS_INVALID_UTF8 = 2,
  // Malformed input or an unreadable file.
  TOPCORR_STATUS_SCHEMA = 3,
  // Valid input on which the operation is not defined.
  TOPCORR_STATUS_PRECONDITION = 4,
  // A search ran out of budget.
  TOPCORR_STATUS_BUDGET = 5,
  TOPCORR_STATUS_PANIC = 6,
} TopcorrStatus;

// A unitary equivalence `X(E) → X(F)` built from a certificate.
typedef struct TopcorrEquivalence TopcorrEquivalence;

// A validated topological graph.
typedef struct TopcorrGraph TopcorrGraph;

// Residuals of a seeded verification run.
typedef struct TopcorrReport {
  size_t samples;
  uint64_t seed;
  double isometry;
  double left_module;
  double right_module;
  double continuity;
} TopcorrReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call on the same thread.
const char *topcorr_last_error(void);

// # Safety
// `s` is null or a string returned by this library and not yet freed.
void topcorr_string_free(char *s);

// Parses and validates a graph document.
//
// # Safety
// `json` is a nul-terminated string; `out` is writable.
enum TopcorrStatus topcorr_graph_from_json(const char *json, struct TopcorrGraph **out);

// Reads and validates a graph file.
//
// # Safety
// `path` is a nul-terminated string; `out` is writable.
enum TopcorrStatus topcorr_graph_read(const char *path, struct TopcorrGraph **out);

// # Safety
// `g` is null or a handle from this library and not yet freed.
void topcorr_graph_free(struct TopcorrGraph *g);

// Canonical JSON of the graph.
//
// # Safety
// `g` is a live handle; `out` is writable.
enum TopcorrStatus topcorr_graph_to_json(const struct TopcorrGraph *g, char **out);

// Vertex and segment counts of `E⁰` and `E¹`.
//
// # Safety
// `g` is a live handle; the out-pointers are writable.
enum TopcorrStatus topcorr_graph_sizes(const struct TopcorrGraph *g,
                                       size_t *base_vertices,
                                       size_t *base_segments,
                                       size_t *edge_vertices,
                                       size_t *edge_segments);

// `|E¹_v|` at a vertex id or `seg@t`.
//
// # Safety
// `g` is a live handle; `point` is a nul-terminated string; `out` is writable.
enum TopcorrStatus topcorr_fiber_dimension(const struct TopcorrGraph *g,
                                           const char *point,
                                           size_t *out);

// Decides local conjugacy of two discrete graphs. On a positive verdict the
// certificate JSON is written to `certificate` (if non-null); otherwise it
// receives null.
//
// # Safety
// `e` and `f` are live handles; `conjugate` is writable; `certificate` is
// null or writable.
enum TopcorrStatus topcorr_decide_discrete(const struct TopcorrGraph *e,
                                           const struct TopcorrGraph *f,
                                           bool *conjugate,
                                           char **certificate);

// Builds the admissible cover and the unitary equivalence for a certificate.
//
// # Safety
// `e` and `f` are live handles; `certificate_json` is a nul-terminated
// string; `out` is writable.
enum TopcorrStatus topcorr_equivalence_new(const struct TopcorrGraph *e,
                                           const struct TopcorrGraph *f,
                                           const char *certificate_json,
                                           struct TopcorrEquivalence **out);

// # Safety
// `eq` is null or a handle from this library and not yet freed.
void topcorr_equivalence_free(struct TopcorrEquivalence *eq);

// Number of flip unitaries in the composition.
//
// # Safety
// `eq` is a live handle; `out` is writable.
enum TopcorrStatus topcorr_equivalence_flips(const struct TopcorrEquivalence *eq, size_t *out);

// Seeded residual check of isometry, bimodule compatibility and continuity.
//
// # Safety
// `eq` is a live handle; `out` is writable.
enum TopcorrStatus topcorr_equivalence_verify(const struct TopcorrEquivalence *eq,
                                              size_t samples,
                                              uint64_t seed,
                                              struct TopcorrReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPCORR_H */
