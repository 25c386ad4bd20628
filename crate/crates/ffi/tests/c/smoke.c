#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "sharpfront.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        enum SfStatus st_ = (call);                                        \
        if (st_ != SF_OK) {                                                \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_,             \
                    sf_last_error() ? sf_last_error() : "(none)");         \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    SfModel *model = NULL;
    SfState *state = NULL;
    size_t n1 = 0, n2 = 0;

    CHECK(sf_model_new("qg", NULL, 32, 32, 0.0, 4, &model));
    CHECK(sf_model_grid(model, &n1, &n2));
    CHECK(sf_state_new_scenario(model, "shear", &state));

    double dt = 0.0;
    CHECK(sf_stable_dt(model, state, 0.5, 0.05, &dt));
    for (int k = 0; k < 10; ++k) {
        CHECK(sf_step(model, state, dt));
    }

    double *theta = malloc(n1 * n2 * sizeof(double));
    CHECK(sf_state_copy_field(state, "theta", theta, n1 * n2));
    double err = 0.0;
    for (size_t i = 0; i < n1; ++i) {
        double x1 = 2.0 * M_PI * (double)i / (double)n1;
        for (size_t j = 0; j < n2; ++j) {
            double d = fabs(theta[i * n2 + j] - cos(x1));
            if (d > err) err = d;
        }
    }
    free(theta);

    if (sf_state_copy_field(state, "theta", NULL, 3) != SF_BUFFER_SIZE) {
        fprintf(stderr, "expected SF_BUFFER_SIZE\n");
        return 1;
    }

    sf_state_free(state);
    sf_model_free(model);
    sf_model_free(NULL);
    printf("steady shear drift %.3e\n", err);
    return err < 1e-10 ? 0 : 2;
}
