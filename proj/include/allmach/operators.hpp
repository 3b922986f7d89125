#pragma once

#include <algorithm>
#include <cmath>

#include "allmach/core.hpp"

namespace allmach {

// (-v[i+2] + 8 v[i+1] - 8 v[i-1] + v[i-2]) / (12 h) on interior nodes.
inline Field central_d4(const Field& v, int axis, const Grid& g) {
  Field out(g);
  const std::ptrdiff_t s = v.step(axis);
  const double inv = 1.0 / (12.0 * g.spacing(axis));
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double* p = v.ptr(i, j);
      out(i, j) = (-p[2 * s] + 8.0 * p[s] - 8.0 * p[-s] + p[-2 * s]) * inv;
    }
  return out;
}

// B_x = D4_y A_z, B_y = -D4_x A_z on interior nodes.
inline void curl_to_b(const Field& az, const Grid& g, Field& bx, Field& by) {
  const std::ptrdiff_t sy = az.step(1);
  const double ix = 1.0 / (12.0 * g.dx), iy = 1.0 / (12.0 * g.dy);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double* p = az.ptr(i, j);
      bx(i, j) = (-p[2 * sy] + 8.0 * p[sy] - 8.0 * p[-sy] + p[-2 * sy]) * iy;
      by(i, j) = -(-p[2] + 8.0 * p[1] - 8.0 * p[-1] + p[-2]) * ix;
    }
}

// Nodal D4_x B_x + D4_y B_y with the curl's stencil.
inline Field div_b_field(const Field& bx, const Field& by, const Grid& g) {
  Field out(g);
  const std::ptrdiff_t sy = by.step(1);
  const double ix = 1.0 / (12.0 * g.dx), iy = 1.0 / (12.0 * g.dy);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double* a = bx.ptr(i, j);
      const double* b = by.ptr(i, j);
      out(i, j) = (-a[2] + 8.0 * a[1] - 8.0 * a[-1] + a[-2]) * ix +
                  (-b[2 * sy] + 8.0 * b[sy] - 8.0 * b[-sy] + b[-2 * sy]) * iy;
    }
  return out;
}

// Interior max of |div B| as computed by div_b_field.
inline double div_b_monitor(const Field& bx, const Field& by, const Grid& g) {
  const Field d = div_b_field(bx, by, g);
  double m = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) m = std::max(m, std::abs(d(i, j)));
  return m;
}

}  // namespace allmach
