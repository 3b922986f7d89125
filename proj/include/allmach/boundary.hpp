#pragma once

#include "allmach/core.hpp"

namespace allmach {

enum class Bc { Periodic, Reflective };

// Per-axis boundary kinds. The A_z gradients describe a linear background
// carried by the potential: A_z = periodic part + gx*x + gy*y. On periodic
// axes the ghosts continue that line, which is the first-order extrapolation
// the potential needs when the background field is uniform.
struct Boundary {
  Bc x = Bc::Periodic;
  Bc y = Bc::Periodic;
  double az_grad_x = 0.0;
  double az_grad_y = 0.0;

  bool all_periodic(int dim) const {
    return x == Bc::Periodic && (dim == 1 || y == Bc::Periodic);
  }
};

enum class Parity { Even, Odd };

namespace detail {

// Fill the halo of one line of n interior values spaced `step` apart, given a
// pointer to interior node 0. `jump` is added per period crossed upward.
inline void fill_line(double* v0, std::ptrdiff_t step, int n, int g, Bc bc, Parity par,
                      Centering c, double jump) {
  const double sgn = par == Parity::Odd ? -1.0 : 1.0;
  auto at = [&](int k) -> double& { return v0[k * step]; };
  if (bc == Bc::Periodic) {
    for (int k = 1; k <= g; ++k) {
      at(-k) = at(n - k) - jump;
      at(n - 1 + k) = at(k - 1) + jump;
    }
    return;
  }
  if (c == Centering::Cell) {
    for (int k = 0; k < g; ++k) {
      at(-1 - k) = sgn * at(k);
      at(n + k) = sgn * at(n - 1 - k);
    }
  } else {
    for (int k = 1; k <= g; ++k) {
      at(-k) = sgn * at(k);
      at(n - 1 + k) = sgn * at(n - 1 - k);
    }
  }
}

}  // namespace detail

// Fills the x halo on interior rows first, then the y halo on every column, so
// corners are consistent for both periodic and mirrored sides.
inline void fill_ghosts(Field& f, const Grid& g, const Boundary& bc, Parity px,
                        Parity py = Parity::Even, double jump_x = 0.0, double jump_y = 0.0) {
  for (int j = 0; j < g.ny; ++j)
    detail::fill_line(&f(0, j), 1, g.nx, g.gx(), bc.x, px, g.centering, jump_x);
  if (g.dim == 2) {
    for (int i = -g.gx(); i < g.nx + g.gx(); ++i)
      detail::fill_line(&f(i, 0), f.step(1), g.ny, g.gy(), bc.y, py, g.centering, jump_y);
  }
}

// Wall parity of each conserved slot: the normal momentum and the tangential
// magnetic components flip sign, everything else mirrors.
inline Parity wall_parity(int var, int axis) {
  if (axis == 0) return (var == Qx || var == By || var == Bz) ? Parity::Odd : Parity::Even;
  return (var == Qy || var == Bx || var == Bz) ? Parity::Odd : Parity::Even;
}

inline void fill_potential_ghosts(Field& az, const Grid& g, const Boundary& bc) {
  fill_ghosts(az, g, bc, Parity::Even, Parity::Even, bc.az_grad_x * g.lx(),
              bc.az_grad_y * g.ly());
}

inline void apply_boundary(State& s, const Boundary& bc) {
  for (int k = 0; k < kVars; ++k)
    fill_ghosts(s[k], s.grid, bc, wall_parity(k, 0), wall_parity(k, 1));
  if (s.has_potential()) fill_potential_ghosts(s.az, s.grid, bc);
}

}  // namespace allmach
