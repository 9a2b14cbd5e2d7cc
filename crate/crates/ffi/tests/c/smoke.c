#include <math.h>
#include <stdio.h>
#include "wdistill.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (line %d)\n", #cond, __LINE__); return 1; } } while (0)

int main(void) {
    WdState *s = NULL;
    CHECK(wd_state_noisy_w(WD_CHANNEL_DEPHASING, 0.75, &s) == WD_STATUS_OK);

    double f = 0.0;
    CHECK(wd_state_fidelity(s, &f) == WD_STATUS_OK);
    CHECK(fabs(f - 0.75) < 1e-12);

    WdState *out = NULL;
    WdStep step;
    double fp = 0.0, p = 0.0;
    CHECK(wd_run_p(s, &out, &step) == WD_STATUS_OK);
    CHECK(wd_dephasing_map(0.75, &fp, &p) == WD_STATUS_OK);
    CHECK(fabs(step.fidelity - fp) < 1e-12 && fabs(step.p_success - p) < 1e-12);
    CHECK(step.subprotocol == WD_SUBPROTOCOL_P);

    WdTrajectory *t = NULL;
    CHECK(wd_distill_run(s, 200, 0.99, WD_PLACEMENT_PER_PARTY, &t) == WD_STATUS_OK);
    WdClassification c;
    CHECK(wd_trajectory_classification(t, &c) == WD_STATUS_OK);
    CHECK(c == WD_CLASSIFICATION_W);
    size_t steps = 0;
    CHECK(wd_trajectory_steps(t, &steps) == WD_STATUS_OK && steps > 0);

    WdState *bad = NULL;
    CHECK(wd_state_noisy_w(WD_CHANNEL_DEPHASING, 0.1, &bad) == WD_STATUS_INVALID_INPUT);
    char msg[128];
    CHECK(wd_last_error_message(msg, sizeof msg) > 0);

    printf("ok %s steps=%zu\n", wd_version(), steps);
    wd_trajectory_free(t);
    wd_state_free(out);
    wd_state_free(s);
    return 0;
}
