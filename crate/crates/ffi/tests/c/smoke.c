#include <stdio.h>
#include "maee.h"

int main(void) {
    MaeeScenario *s = NULL;
    if (maee_scenario_new("[scenario]\nn_tx = 1\n", 1, &s) != MAEE_STATUS_CONFIG || s != NULL) return 1;
    if (maee_last_error_message() == NULL) return 2;
    if (maee_scenario_new(NULL, 1, &s) != MAEE_STATUS_OK) return 3;
    uintptr_t n = 0, m = 0, k = 0;
    if (maee_scenario_dims(s, &n, &m, &k) != MAEE_STATUS_OK || n != 16 || m != 4 || k != 4) return 4;
    maee_scenario_free(s);
    printf("%s\n", maee_version());
    return 0;
}
