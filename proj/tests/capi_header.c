/* Copyright 2026 The sqkit Authors
 * SPDX-License-Identifier: Apache-2.0 */

/* The public header must compile as C. */

#include <stdio.h>

#include "sqkit/sqkit.h"

int main(void) {
  const double params[11] = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const double p[3] = {2, 0, 0};
  sqk_superquadric* sq = NULL;
  double d = 0;
  if (sqk_superquadric_create(params, &sq) != SQK_OK) return 1;
  if (sqk_radial_distance(sq, p, &d) != SQK_OK || d != 1.0) return 1;
  sqk_superquadric_free(sq);
  printf("sqkit %s\n", sqk_version());
  return 0;
}
