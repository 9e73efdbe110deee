#include <math.h>
#include <stdio.h>
#include "spinharm.h"

int main(void) {
    double k[3] = {0.0, 0.0, 1.0};
    double q[4];
    if (sh_quat_from_vector(k, q) != SH_STATUS_OK) return 1;
    if (fabs(q[0] - cos(0.5)) > 1e-14 || fabs(q[3] - sin(0.5)) > 1e-14) return 2;

    double g[3] = {0.0, 0.0, 2.0}, out[3];
    if (sh_gibbs_compose(g, g, out) != SH_STATUS_GIBBS_SINGULARITY) return 3;
    char msg[128];
    if (sh_last_error_message(msg, sizeof msg) == 0) return 4;

    ShGrid *grid = NULL;
    if (sh_grid_new(8, 6, 10, SH_GROUP_SU2, &grid) != SH_STATUS_OK) return 5;
    size_t len = 0;
    double ws = 0.0;
    sh_grid_info(grid, &len, &ws);
    if (len != 480 || fabs(ws - 1.0) > 1e-12) return 6;
    sh_grid_free(grid);

    double chi, eps;
    sh_character(2, 0.0, &chi, &eps);
    if (fabs(eps - 9.0) > 1e-12) return 7;
    printf("ok %s\n", sh_version());
    return 0;
}
