/* Reconstructs a machine from a short binary string and prints its measures. */
#include <stdio.h>

#include "botdyn.h"

int main(void) {
    unsigned char symbols[4000];
    unsigned state = 0, x = 12345;
    for (size_t i = 0; i < sizeof symbols; i++) {
        x = x * 1103515245u + 12345u;
        /* golden mean: a 1 is always followed by a 0 */
        symbols[i] = (state == 0 && ((x >> 16) & 1)) ? 1 : 0;
        state = symbols[i];
    }

    BotdynMachine *machine = NULL;
    BotdynStatus status = botdyn_machine_reconstruct(symbols, sizeof symbols, 2, botdyn_params_default(), &machine);
    if (status != BOTDYN_STATUS_OK) {
        fprintf(stderr, "reconstruct failed (%d): %s\n", status, botdyn_last_error_message());
        return 1;
    }
    size_t n = 0;
    double c = 0.0, h = 0.0;
    botdyn_machine_num_states(machine, &n);
    botdyn_machine_complexity(machine, &c);
    botdyn_machine_entropy_rate(machine, &h);
    printf("states=%zu C=%.4f h=%.4f\n", n, c, h);

    status = botdyn_machine_num_states(NULL, &n);
    printf("null handle -> %d (%s)\n", status, botdyn_last_error_message());

    botdyn_machine_free(machine);
    return 0;
}
