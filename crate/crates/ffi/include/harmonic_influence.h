#ifndef HARMONIC_INFLUENCE_H
#define HARMONIC_INFLUENCE_H

#include <stdint.h>
#include <stddef.h>
#include <stdbool.h>

// Status codes returned by every fallible call.
typedef enum HiStatus {
  HI_OK = 0,
  HI_NULL_POINTER = 1,
  HI_INVALID_ARGUMENT = 2,
  HI_INVALID_GRAPH = 3,
  HI_IO_ERROR = 4,
  HI_SOLVE_ERROR = 5,
  HI_KEY_MISMATCH = 6,
  HI_BUFFER_TOO_SMALL = 7,
} HiStatus;

// Opaque graph handle.
typedef struct HiGraph HiGraph;

// Opaque message-state handle.
typedef struct HiMessageState HiMessageState;

// One undirected edge; node 0 is the field node.
typedef struct HiEdge {
  uint32_t u;
  uint32_t v;
  double weight;
} HiEdge;

// Result summary of a message-passing run.
typedef struct HiRunSummary {
  uint64_t stop_round;
  // 0 = stopped on tolerance, 1 = hit the round cap.
  int32_t stop_reason;
  uint64_t w_convergence_round;
  uint64_t h_convergence_round;
  double max_w_increase;
} HiRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes of the last error message on this thread.
size_t hi_last_error_length(void);

// Copies the last error message (NUL terminated) into `buf`.
//
// # Safety
// `buf` must point to at least `len` writable bytes.
enum HiStatus hi_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *hi_version(void);

// Builds a validated graph over nodes {0 (field), 1, ..., n}.
//
// # Safety
// `edges` must point to `n_edges` readable elements and `out` must be a
// valid location for a pointer.
enum HiStatus hi_graph_build(uint32_t n,
                             const struct HiEdge *edges,
                             size_t n_edges,
                             struct HiGraph **out);

// Loads a SNAP-style `u v` edge list, attaching the field node to every
// node at `field_weight`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid location.
enum HiStatus hi_graph_load_edge_list(const char *path, double field_weight, struct HiGraph **out);

// Loads a weighted graph file in the save format (`n` header, `i j w`).
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid location.
enum HiStatus hi_graph_load_file(const char *path, struct HiGraph **out);

// Number of non-field nodes, or 0 for a null handle.
//
// # Safety
// `g` must be a live handle from this library or null.
uint32_t hi_graph_node_count(const struct HiGraph *g);

// Number of undirected edges, field edges included.
//
// # Safety
// `g` must be a live handle from this library or null.
size_t hi_graph_edge_count(const struct HiGraph *g);

// Frees a graph handle; null is allowed.
//
// # Safety
// `g` must have come from this library and not be freed twice.
void hi_graph_free(struct HiGraph *g);

// Exact influence of one leader.
//
// # Safety
// `g` must be a live handle, `out` a valid location.
enum HiStatus hi_exact_influence(const struct HiGraph *g, uint32_t leader, double *out);

// Exact influence of every leader, written to `out[0..n]` where index k
// holds the influence of node k + 1.
//
// # Safety
// `out` must point to at least `len` writable doubles.
enum HiStatus hi_exact_influence_all(const struct HiGraph *g, double *out, size_t len);

// Fresh message state with the standard initialization.
//
// # Safety
// `g` must be a live handle, `out` a valid location.
enum HiStatus hi_mpa_init(const struct HiGraph *g, struct HiMessageState **out);

// Advances the state by one synchronous round, in place.
//
// # Safety
// Both handles must be live and belong together.
enum HiStatus hi_mpa_step(const struct HiGraph *g, struct HiMessageState *s);

// Runs until both stopping criteria hold or `max_rounds` rounds passed,
// updating the state in place and filling `summary` when non-null.
//
// # Safety
// `g` and `s` must be live handles; `summary` may be null.
enum HiStatus hi_mpa_run(const struct HiGraph *g,
                         struct HiMessageState *s,
                         double eps_w,
                         double eps_h,
                         uint64_t max_rounds,
                         struct HiRunSummary *summary);

// Round counter of a state, or 0 for a null handle.
//
// # Safety
// `s` must be a live handle or null.
uint64_t hi_state_round(const struct HiMessageState *s);

// Influence estimate of one leader on the current messages.
//
// # Safety
// Handles must be live; `out` must be a valid location.
enum HiStatus hi_estimate(const struct HiGraph *g,
                          const struct HiMessageState *s,
                          uint32_t leader,
                          double *out);

// Influence estimates of all leaders, written as in
// [`hi_exact_influence_all`].
//
// # Safety
// `out` must point to at least `len` writable doubles.
enum HiStatus hi_estimate_all(const struct HiGraph *g,
                              const struct HiMessageState *s,
                              double *out,
                              size_t len);

// Rekeys a state onto a new graph: surviving edges keep their messages,
// removed edges are dropped, new edges start from (1, 1) with null field
// messages. Writes a fresh handle to `out`.
//
// # Safety
// All handles must be live; `out` must be a valid location.
enum HiStatus hi_apply_change(const struct HiGraph *old_graph,
                              const struct HiMessageState *s,
                              const struct HiGraph *new_graph,
                              struct HiMessageState **out);

// Frees a state handle; null is allowed.
//
// # Safety
// `s` must have come from this library and not be freed twice.
void hi_state_free(struct HiMessageState *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARMONIC_INFLUENCE_H */
