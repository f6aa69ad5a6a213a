#include <math.h>
#include <stdio.h>

#include "degenwell.h"

int main(void) {
    DwPotential *p = NULL;
    if (dw_potential_from_json("{\"family\":\"power\",\"params\":{\"exponent\":2}}", &p) != DW_STATUS_OK) {
        return 1;
    }
    DwSpectrum *s = NULL;
    if (dw_eigensolve(p, 1e-3, 3, 0, &s) != DW_STATUS_OK) {
        return 2;
    }
    double values[3];
    size_t len = 0;
    if (dw_spectrum_eigenvalues(s, 0, values, 3, &len) != DW_STATUS_OK || len != 3) {
        return 3;
    }
    for (size_t i = 0; i < 3; i++) {
        double want = (2.0 * i + 1.0) * 1e-3;
        if (fabs(values[i] - want) > 1e-4 * want) {
            return 4;
        }
    }
    DwPotential *bad = NULL;
    if (dw_potential_from_json("{\"family\":\"nope\"}", &bad) != DW_STATUS_INVALID_ARGUMENT || bad != NULL) {
        return 5;
    }
    char msg[256];
    if (dw_last_error_message(msg, sizeof msg) == 0) {
        return 6;
    }
    printf("%s %.12f %s\n", dw_version(), values[0] / 1e-3, msg);
    dw_spectrum_free(s);
    dw_potential_free(p);
    return 0;
}
