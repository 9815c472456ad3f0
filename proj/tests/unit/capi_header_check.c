/* The public header must compile as C. */
#include "cherry/cherry.h"

#include <stdio.h>

int main(void) {
  cf_sim_params* params = cf_sim_params_default();
  cf_ledger* ledger = NULL;
  cf_status s = cf_simulate_season(params, 1, 2, &ledger);
  if (s != CF_OK) {
    fprintf(stderr, "%s\n", cf_last_error());
    return 1;
  }
  size_t n = cf_ledger_size(ledger);
  cf_ledger_free(ledger);
  cf_sim_params_free(params);
  return n == 20 ? 0 : 1;
}
