// SPDX-License-Identifier: Apache-2.0
//
// Closed-form determinant and inverse for d x d matrices with d <= 3, generic
// in the scalar type so that Jets flow through the metric algebra.

#pragma once

namespace kgspec
{

template <class T>
T small_det(int d, const T *a)
{
  if (d == 1)
  {
    return a[0];
  }
  if (d == 2)
  {
    return a[0] * a[3] - a[1] * a[2];
  }
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

template <class T>
void small_inverse(int d, const T *a, T *out)
{
  const T det = small_det(d, a);
  const T inv = T(1.0) / det;
  if (d == 1)
  {
    out[0] = inv;
    return;
  }
  if (d == 2)
  {
    out[0] = a[3] * inv;
    out[1] = -a[1] * inv;
    out[2] = -a[2] * inv;
    out[3] = a[0] * inv;
    return;
  }
  out[0] = (a[4] * a[8] - a[5] * a[7]) * inv;
  out[1] = (a[2] * a[7] - a[1] * a[8]) * inv;
  out[2] = (a[1] * a[5] - a[2] * a[4]) * inv;
  out[3] = (a[5] * a[6] - a[3] * a[8]) * inv;
  out[4] = (a[0] * a[8] - a[2] * a[6]) * inv;
  out[5] = (a[2] * a[3] - a[0] * a[5]) * inv;
  out[6] = (a[3] * a[7] - a[4] * a[6]) * inv;
  out[7] = (a[1] * a[6] - a[0] * a[7]) * inv;
  out[8] = (a[0] * a[4] - a[1] * a[3]) * inv;
}

}  // namespace kgspec
