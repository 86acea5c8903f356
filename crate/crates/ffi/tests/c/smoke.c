#include <math.h>
#include <stdio.h>
#include <string.h>

#include "countfact.h"

#define CHECK(cond)                                             \
  do {                                                          \
    if (!(cond)) {                                              \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      return 1;                                                 \
    }                                                           \
  } while (0)

int main(void) {
  double r[3];
  CHECK(cf_wallis_coeffs(3, r, 3) == CF_STATUS_OK);
  CHECK(r[0] == 1.0 && r[1] == 0.5 && r[2] == 0.375);
  CHECK(cf_wallis_coeffs(3, r, 2) == CF_STATUS_BUFFER_TOO_SMALL);
  CHECK(strlen(cf_last_error_message()) > 0);

  CfFactorization *f = NULL;
  CHECK(cf_factorization_new(CF_METHOD_NSR, 2, &f) == CF_STATUS_OK);
  double maxse = 0.0;
  CHECK(cf_factorization_maxse(f, &maxse) == CF_STATUS_OK);
  CHECK(fabs(maxse - 1.1755705045849463) < 1e-12);

  double left[4];
  CHECK(cf_factorization_dense_left(f, left, 4) == CF_STATUS_OK);
  CHECK(fabs(left[0] - sqrt(5.0) / 2.0) < 1e-15);
  CHECK(left[1] == 0.0);

  double err = 1.0;
  CHECK(cf_factorization_verify(f, &err) == CF_STATUS_OK);
  CHECK(err < 1e-12);
  cf_factorization_free(f);

  CHECK(cf_factorization_new(7, 4, &f) == CF_STATUS_INVALID_ARGUMENT);
  CHECK(f == NULL);
  CHECK(cf_factorization_new(CF_METHOD_SQRT, 0, &f) == CF_STATUS_INVALID_ARGUMENT);
  CHECK(strcmp(cf_status_message(CF_STATUS_NULL_POINTER), "null pointer argument") == 0);
  printf("ok\n");
  return 0;
}
