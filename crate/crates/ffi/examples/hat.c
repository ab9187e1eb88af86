/* Energy of the hat function on two cells; prints "phi=6 j=0.16..." */
#include <stdio.h>
#include "kirchhoff.h"

int main(void) {
    KhOperators *ops = NULL;
    KhLaw *law = NULL;
    KhNonlinearity *f = NULL;
    if (kh_operators_interval(2, 1.0, &ops) != KH_STATUS_OK ||
        kh_law_affine(1.0, 1.0, &law) != KH_STATUS_OK ||
        kh_nonlinearity_specimen("linear", &f) != KH_STATUS_OK) {
        fprintf(stderr, "setup failed: %s\n", kh_last_error_message());
        return 1;
    }
    double u[1] = {1.0};
    double phi = 0.0, j = 0.0;
    kh_phi(ops, law, u, 1, &phi);
    kh_j(ops, f, u, 1, &j);
    printf("phi=%.12g j=%.12g\n", phi, j);

    double bad = 0.0;
    if (kh_h1_norm(ops, u, 3, &bad) != KH_STATUS_SHAPE) {
        return 2;
    }
    kh_nonlinearity_free(f);
    kh_law_free(law);
    kh_operators_free(ops);
    return 0;
}
