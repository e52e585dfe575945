/* Builds the three-node path graph, computes exact influences, runs the
 * message passing algorithm, and prints both. Compile with:
 *
 *   cargo build -p harmonic-influence-ffi --release
 *   cc examples/influence_demo.c -Iinclude \
 *      -L../../target/release -lharmonic_influence_ffi -lm -o influence_demo
 */
#include "harmonic_influence.h"
#include <stdio.h>

int main(void) {
    HiEdge edges[] = {{0, 1, 1.0}, {1, 2, 1.0}};
    HiGraph *g = NULL;
    if (hi_graph_build(2, edges, 2, &g) != HI_OK) {
        char msg[256];
        hi_last_error_message(msg, sizeof msg);
        fprintf(stderr, "graph: %s\n", msg);
        return 1;
    }

    double exact[2];
    hi_exact_influence_all(g, exact, 2);

    HiMessageState *s = NULL;
    HiRunSummary summary;
    hi_mpa_init(g, &s);
    hi_mpa_run(g, s, 1e-10, 1e-9, 200000, &summary);
    double est[2];
    hi_estimate_all(g, s, est, 2);

    printf("stopped after %llu rounds\n", (unsigned long long)summary.stop_round);
    for (unsigned i = 0; i < 2; i++) {
        printf("node %u: exact %.6f, estimate %.6f\n", i + 1, exact[i], est[i]);
    }

    hi_state_free(s);
    hi_graph_free(g);
    return 0;
}
