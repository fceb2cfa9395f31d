/* The public header must compile as plain C. */
#include "sgkl/sgkl.h"

int main(void) {
  sgkl_dataset* d = 0;
  sgkl_status s = sgkl_dataset_load_dir("/nonexistent", &d);
  return s == SGKL_ERR_IO && d == 0 && sgkl_last_error()[0] != '\0' ? 0 : 1;
}
