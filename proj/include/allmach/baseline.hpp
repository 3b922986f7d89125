#pragma once

#include "allmach/integrator.hpp"

namespace allmach {

// Time derivative of the full explicit system: every flux slot from the
// characteristic sweep with the eps-capped LF speed, momentum pressure p/eps^2.
// With constrained transport in 2D, A_z follows the HJ Hamiltonian and the
// B_x, B_y slots are left to the curl. `s` must be synced.
inline State erk_rhs(const State& s, const Model& m, bool with_ct = true,
                     StepDiagnostics* diag = nullptr) {
  const Grid& g = m.grid;
  const EpsilonParams& ep = m.ep;
  if (!(ep.eps > 0.0)) throw DomainError("explicit baseline requires eps > 0");
  const bool ct = with_ct && g.dim == 2;
  State rate(g);
  std::array<bool, kVars> wanted;
  wanted.fill(true);
  if (ct) wanted[Bx] = wanted[By] = false;
  for (int axis = 0; axis < g.dim; ++axis) {
    const double alpha = max_signal_speed(s, ep, axis);
    div_cw(s, axis, ep, 1.0 / ep.eps2(), alpha, rate.u, wanted, -1.0, axis > 0,
           diag ? &diag->sweep : nullptr);
  }
  if (ct) {
    Field mx(g), px(g), my(g), py(g);
    hj_gradients(s.az, 0, g, mx, px);
    hj_gradients(s.az, 1, g, my, py);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double u = s[Qx](i, j) / s[Rho](i, j);
        const double v = s[Qy](i, j) / s[Rho](i, j);
        rate.az(i, j) = -(lf_hamiltonian([u](double d) { return u * d; }, mx(i, j), px(i, j),
                                         std::abs(u)) +
                          lf_hamiltonian([v](double d) { return v * d; }, my(i, j), py(i, j),
                                         std::abs(v)));
      }
  }
  return rate;
}

namespace detail {

// out = a * u0 + b * (u1 + dt * L(u1)) over all slots that the scheme evolves.
inline void ssp_combine(State& out, double a, const State& u0, double b, const State& u1,
                        double dt, const State& l1, bool ct) {
  auto mix = [&](Field& o, const Field& f0, const Field& f1, const Field& lf) {
    auto& ov = o.raw();
    for (std::size_t n = 0; n < ov.size(); ++n)
      ov[n] = a * f0.raw()[n] + b * (f1.raw()[n] + dt * lf.raw()[n]);
  };
  for (int k = 0; k < kVars; ++k) {
    if (ct && (k == Bx || k == By)) continue;
    mix(out[k], u0[k], u1[k], l1[k]);
  }
  if (ct) mix(out.az, u0.az, u1.az, l1.az);
}

}  // namespace detail

// Three-stage strong-stability-preserving RK step.
inline State ssp_rk3_step(const State& un_in, const Model& m, double dt, bool with_ct = true,
                          StepDiagnostics* diag = nullptr) {
  const bool ct = with_ct && m.grid.dim == 2;
  State u0 = un_in;
  sync(u0, m.bc, ct);
  State u1 = u0, u2 = u0, u3 = u0;
  detail::ssp_combine(u1, 0.0, u0, 1.0, u0, dt, erk_rhs(u0, m, ct, diag), ct);
  sync(u1, m.bc, ct);
  detail::ssp_combine(u2, 0.75, u0, 0.25, u1, dt, erk_rhs(u1, m, ct, diag), ct);
  sync(u2, m.bc, ct);
  detail::ssp_combine(u3, 1.0 / 3.0, u0, 2.0 / 3.0, u2, dt, erk_rhs(u2, m, ct, diag), ct);
  sync(u3, m.bc, ct);
  check_admissible(u3, m.ep);
  return u3;
}

// Explicit step size from the true (uncapped) fast speed.
inline double compute_dt_explicit(const State& s, const Model& m, double cfl,
                                  DtLaw law = DtLaw::Cfl, double dt_max = 0.1) {
  std::array<double, 2> sp{0.0, 0.0};
  for (int axis = 0; axis < m.grid.dim; ++axis) sp[axis] = max_true_signal_speed(s, m.ep, axis);
  return dt_from_speeds(m.grid, sp, cfl, law, dt_max);
}

}  // namespace allmach
