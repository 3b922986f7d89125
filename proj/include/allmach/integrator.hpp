#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "allmach/boundary.hpp"
#include "allmach/core.hpp"
#include "allmach/eigensystem.hpp"
#include "allmach/elliptic.hpp"
#include "allmach/operators.hpp"
#include "allmach/tableau.hpp"
#include "allmach/weno.hpp"

namespace allmach {

// Everything a step needs besides the state: grid, Mach/gamma, boundaries.
struct Model {
  Grid grid;
  EpsilonParams ep;
  Boundary bc;
  double elliptic_tol = 1e-12;
};

struct StepDiagnostics {
  int elliptic_solves = 0;
  int elliptic_iterations = 0;
  double elliptic_residual = 0.0;
  CharSweepStats sweep;
};

// Fills halos; in 2D first rebuilds B_x, B_y as the curl of A_z unless the
// caller evolves B directly.
inline void sync(State& s, const Boundary& bc, bool derive_b = true) {
  if (s.has_potential() && derive_b) {
    fill_potential_ghosts(s.az, s.grid, bc);
    curl_to_b(s.az, s.grid, s[Bx], s[By]);
  }
  apply_boundary(s, bc);
}

// Slots advanced by flux differences. In 2D B_x, B_y follow from A_z.
inline std::array<bool, kVars> evolved_slots(int dim) {
  return {true, true, true, true, dim == 1, dim == 1, true, true};
}

// Right-hand side pieces of one stage: -div F1 (rho, q, B), -G (A_z),
// -div F2 (E) from the explicit state, and -div F_SI (q, E) from the implicit
// one. Kept apart so stage sums never re-evaluate a sweep.
struct StageRates {
  std::array<Field, kVars> f1;
  Field g;
  Field f2;
  std::array<Field, kVars> si;

  explicit StageRates(const Grid& grid) {
    for (auto& f : f1) f = Field(grid);
    for (auto& f : si) f = Field(grid);
    f2 = Field(grid);
    if (grid.dim == 2) g = Field(grid);
  }

  // Total rate of slot k (k = kVars means A_z) at storage index n.
  double total(int k, std::size_t n) const {
    if (k == kVars) return g.raw()[n];
    if (k == En) return f2.raw()[n] + si[En].raw()[n];
    return f1[k].raw()[n] + si[k].raw()[n];
  }
};

struct StageWorkspace {
  std::vector<State> ue, ui;
  std::vector<StageRates> rates;
  std::vector<bool> explicit_done, implicit_done;

  StageWorkspace(const Grid& g, int s) {
    ue.assign(s, State(g));
    ui.assign(s, State(g));
    rates.assign(s, StageRates(g));
    explicit_done.assign(s, false);
    implicit_done.assign(s, false);
  }
};

namespace detail {

inline std::vector<int> stage_slots(int dim) {
  std::vector<int> k;
  const auto ev = evolved_slots(dim);
  for (int v = 0; v < kVars; ++v)
    if (ev[v]) k.push_back(v);
  if (dim == 2) k.push_back(kVars);
  return k;
}

inline Field& slot(State& s, int k) { return k == kVars ? s.az : s[k]; }
inline const Field& slot(const State& s, int k) { return k == kVars ? s.az : s[k]; }

// out = base + dt * sum_j coef[j] * K_j over the evolved slots (whole arrays,
// halos are refreshed by the caller).
inline void combine(State& out, const State& base, double dt, const std::vector<double>& coef,
                    const std::vector<StageRates>& rates) {
  const int dim = base.grid.dim;
  for (int k : stage_slots(dim)) {
    const auto& b = slot(base, k).raw();
    auto& o = slot(out, k).raw();
    for (std::size_t n = 0; n < b.size(); ++n) {
      double acc = 0.0;
      for (std::size_t j = 0; j < coef.size(); ++j)
        if (coef[j] != 0.0) acc += coef[j] * rates[j].total(k, n);
      o[n] = b[n] + dt * acc;
    }
  }
  if (dim == 2) {
    out[Bx] = base[Bx];
    out[By] = base[By];
  }
}

inline void fill_state_slot(Field& f, const Grid& g, const Boundary& bc, int var) {
  fill_ghosts(f, g, bc, wall_parity(var, 0), wall_parity(var, 1));
}

}  // namespace detail

inline double lf_speed(const State& s, const EpsilonParams& ep, int axis) {
  return max_signal_speed(s, ep, axis);
}

// Explicit pieces f1, g, f2 at a synced explicit state.
inline void explicit_rates(const State& ue, const Model& m, StageRates& r,
                           StepDiagnostics* diag = nullptr) {
  const Grid& g = m.grid;
  const EpsilonParams& ep = m.ep;
  const double e2 = ep.eps2();
  auto wanted = evolved_slots(g.dim);
  wanted[En] = false;
  for (int axis = 0; axis < g.dim; ++axis) {
    const double alpha = lf_speed(ue, ep, axis);
    div_cw(ue, axis, ep, ep.pressure_alpha(), alpha, r.f1, wanted, -1.0, axis > 0,
           diag ? &diag->sweep : nullptr);
    Field flux(g);
    auto& fl = flux.raw();
    const auto& rho = ue[Rho].raw();
    for (std::size_t n = 0; n < fl.size(); ++n) {
      if (!(rho[n] != 0.0)) continue;
      const double ir = 1.0 / rho[n];
      const double u[3] = {ue[Qx].raw()[n] * ir, ue[Qy].raw()[n] * ir, ue[Qz].raw()[n] * ir};
      const double b[3] = {ue[Bx].raw()[n], ue[By].raw()[n], ue[Bz].raw()[n]};
      const double b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
      const double ub = u[0] * b[0] + u[1] * b[1] + u[2] * b[2];
      fl[n] = e2 * (0.5 * b2 * u[axis] - ub * b[axis]);
    }
    div_w(flux, ue[En], alpha, axis, g, r.f2, -1.0, axis > 0);
  }
  if (g.dim == 2) {
    Field mx(g), px(g), my(g), py(g);
    hj_gradients(ue.az, 0, g, mx, px);
    hj_gradients(ue.az, 1, g, my, py);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double u = ue[Qx](i, j) / ue[Rho](i, j);
        const double v = ue[Qy](i, j) / ue[Rho](i, j);
        const double hx = lf_hamiltonian([u](double d) { return u * d; }, mx(i, j), px(i, j),
                                         std::abs(u));
        const double hy = lf_hamiltonian([v](double d) { return v * d; }, my(i, j), py(i, j),
                                         std::abs(v));
        r.g(i, j) = -(hx + hy);
      }
  }
}

namespace detail {

// -sum_axes div_W(hbar * q_axis) with zero LF speed; q halos must be filled.
inline void enthalpy_flux_rate(const State& q, const Field& hbar, const Grid& g, Field& out) {
  Field flux(g);
  Field zero(g);
  for (int axis = 0; axis < g.dim; ++axis) {
    const auto& qa = q[Qx + axis].raw();
    for (std::size_t n = 0; n < qa.size(); ++n) flux.raw()[n] = hbar.raw()[n] * qa[n];
    div_w(flux, zero, 0.0, axis, g, out, -1.0, axis > 0);
  }
}

}  // namespace detail

// Implicit stage: given U_E (synced, with f1/g/f2 in r) and U_*, produces U_I
// and the F_SI pieces of r. dta = dt * a_ii.
inline void implicit_stage(const State& ue, const State& ustar, double dta, const Model& m,
                           State& ui, StageRates& r, StepDiagnostics* diag = nullptr) {
  const Grid& g = m.grid;
  const EpsilonParams& ep = m.ep;
  const double theta = ep.implicit_weight();
  for (int k : detail::stage_slots(g.dim)) {
    const auto& b = detail::slot(ustar, k).raw();
    auto& o = detail::slot(ui, k).raw();
    if (k == kVars) {
      for (std::size_t n = 0; n < b.size(); ++n) o[n] = b[n] + dta * r.g.raw()[n];
    } else if (k == En) {
      for (std::size_t n = 0; n < b.size(); ++n) o[n] = b[n] + dta * r.f2.raw()[n];
    } else {
      for (std::size_t n = 0; n < b.size(); ++n) o[n] = b[n] + dta * r.f1[k].raw()[n];
    }
  }
  // ui now holds rho_I, q**, E**, A_I and B_I (or B_z,I).
  Field hbar(g);
  const Field pe = pressure_field(ue, ep);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) hbar(i, j) = (ue[En](i, j) + pe(i, j)) / ui[Rho](i, j);
  fill_ghosts(hbar, g, m.bc, Parity::Even, Parity::Even);
  for (int k = Qx; k <= Qz; ++k) r.si[k].fill(0.0);

  if (dta > 0.0 && theta > 0.0) {
    for (int k = Qx; k <= Qz; ++k) detail::fill_state_slot(ui[k], g, m.bc, k);
    Field div_hq(g);
    detail::enthalpy_flux_rate(ui, hbar, g, div_hq);
    const double pbar = mean_pressure(pe, g);
    const double e2 = ep.eps2();
    HelmholtzProblem pb;
    pb.m = e2 / (ep.gamma - 1.0);
    pb.w = theta * dta * dta;
    pb.hbar = hbar;
    pb.bc = m.bc;
    pb.rhs = Field(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double rho = ue[Rho](i, j);
        const double q2 = ue[Qx](i, j) * ue[Qx](i, j) + ue[Qy](i, j) * ue[Qy](i, j) +
                          ue[Qz](i, j) * ue[Qz](i, j);
        const double b2 = ue[Bx](i, j) * ue[Bx](i, j) + ue[By](i, j) * ue[By](i, j) +
                          ue[Bz](i, j) * ue[Bz](i, j);
        const double e_circ = ui[En](i, j) + dta * div_hq(i, j);
        pb.rhs(i, j) = e_circ - pbar / (ep.gamma - 1.0) - e2 * (0.5 * q2 / rho + 0.5 * b2);
      }
    SolveReport rep;
    Field p2 = solve(pb, g, m.elliptic_tol, &rep);
    if (diag) {
      ++diag->elliptic_solves;
      diag->elliptic_iterations += rep.iterations;
      diag->elliptic_residual = std::max(diag->elliptic_residual, rep.residual);
    }
    fill_ghosts(p2, g, m.bc, Parity::Even, Parity::Even);
    Field zero(g);
    for (int axis = 0; axis < g.dim; ++axis) {
      Field& s = r.si[Qx + axis];
      div_w(p2, zero, 0.0, axis, g, s, -theta);
      auto& q = ui[Qx + axis].raw();
      for (std::size_t n = 0; n < q.size(); ++n) q[n] += dta * s.raw()[n];
    }
  }
  for (int k = Qx; k <= Qz; ++k) detail::fill_state_slot(ui[k], g, m.bc, k);
  detail::enthalpy_flux_rate(ui, hbar, g, r.si[En]);
  auto& e = ui[En].raw();
  for (std::size_t n = 0; n < e.size(); ++n) e[n] += dta * r.si[En].raw()[n];
}

// U_E^{(i)} = U^n + dt sum_{j<i} a~_ij K_j, synced, with its explicit rates.
inline void imex_stage_explicit(StageWorkspace& ws, const State& un, const ButcherPair& t, int i,
                                const Model& m, double dt, StepDiagnostics* diag = nullptr) {
  for (int j = 0; j < i; ++j)
    if (!ws.implicit_done[j]) throw std::logic_error("stage read before it was computed");
  std::vector<double> coef(i);
  for (int j = 0; j < i; ++j) coef[j] = t.At(i, j);
  detail::combine(ws.ue[i], un, dt, coef, ws.rates);
  sync(ws.ue[i], m.bc);
  explicit_rates(ws.ue[i], m, ws.rates[i], diag);
  ws.explicit_done[i] = true;
}

inline void imex_stage_implicit(StageWorkspace& ws, const State& un, const ButcherPair& t, int i,
                                const Model& m, double dt, StepDiagnostics* diag = nullptr) {
  if (!ws.explicit_done[i]) throw std::logic_error("implicit stage before explicit stage");
  std::vector<double> coef(i);
  for (int j = 0; j < i; ++j) coef[j] = t.A(i, j);
  State ustar(m.grid);
  detail::combine(ustar, un, dt, coef, ws.rates);
  if (m.grid.dim == 2) {
    ws.ui[i][Bx] = ws.ue[i][Bx];
    ws.ui[i][By] = ws.ue[i][By];
  }
  implicit_stage(ws.ue[i], ustar, dt * t.A(i, i), m, ws.ui[i], ws.rates[i], diag);
  ws.implicit_done[i] = true;
}

// One IMEX-RK step. Stiffly accurate pairs return the last implicit stage,
// others the b-weighted sum; B is re-derived from A_z in 2D. Throws
// PositivityError if the new state is not admissible.
inline State imex_step(const State& un_in, const ButcherPair& t, const Model& m, double dt,
                       StepDiagnostics* diag = nullptr) {
  State un = un_in;
  sync(un, m.bc);
  StageWorkspace ws(m.grid, t.s);
  for (int i = 0; i < t.s; ++i) {
    imex_stage_explicit(ws, un, t, i, m, dt, diag);
    imex_stage_implicit(ws, un, t, i, m, dt, diag);
  }
  State out(m.grid);
  if (t.stiffly_accurate) {
    out = ws.ui[t.s - 1];
  } else {
    for (int i = 0; i < t.s; ++i)
      if (!ws.implicit_done[i]) throw std::logic_error("b-weighted sum with missing stage rates");
    detail::combine(out, un, dt, t.b, ws.rates);
  }
  sync(out, m.bc);
  check_admissible(out, m.ep);
  return out;
}

// The first-order semi-implicit scheme written out directly: explicit
// rho, A (or B), momentum predictor, pressure-perturbation solve, momentum
// correction, energy update.
inline State si_first_order_step(const State& un_in, const Model& m, double dt,
                                 StepDiagnostics* diag = nullptr) {
  const Grid& g = m.grid;
  const EpsilonParams& ep = m.ep;
  State un = un_in;
  sync(un, m.bc);
  StageRates r(g);
  explicit_rates(un, m, r, diag);

  State next = un;
  for (int k : detail::stage_slots(g.dim)) {
    if (k == En) continue;
    auto& o = detail::slot(next, k).raw();
    const auto& rate = k == kVars ? r.g.raw() : r.f1[k].raw();
    for (std::size_t n = 0; n < o.size(); ++n) o[n] = o[n] + dt * rate[n];
  }
  // next: rho^{n+1}, q*, A^{n+1} (or B^{n+1}); E still E^n.
  Field hbar(g);
  const Field pn = pressure_field(un, ep);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) hbar(i, j) = (un[En](i, j) + pn(i, j)) / next[Rho](i, j);
  fill_ghosts(hbar, g, m.bc, Parity::Even, Parity::Even);

  Field estar(g);
  for (std::size_t n = 0; n < estar.raw().size(); ++n)
    estar.raw()[n] = un[En].raw()[n] + dt * r.f2.raw()[n];
  const double theta = ep.implicit_weight();
  if (theta > 0.0) {
    for (int k = Qx; k <= Qz; ++k) detail::fill_state_slot(next[k], g, m.bc, k);
    Field div_hq(g);
    detail::enthalpy_flux_rate(next, hbar, g, div_hq);
    const double e2 = ep.eps2();
    HelmholtzProblem pb;
    pb.m = e2 / (ep.gamma - 1.0);
    pb.w = theta * dt * dt;
    pb.hbar = hbar;
    pb.bc = m.bc;
    pb.rhs = Field(g);
    const double pbar = mean_pressure(pn, g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double rho = un[Rho](i, j);
        const double q2 = un[Qx](i, j) * un[Qx](i, j) + un[Qy](i, j) * un[Qy](i, j) +
                          un[Qz](i, j) * un[Qz](i, j);
        const double b2 = un[Bx](i, j) * un[Bx](i, j) + un[By](i, j) * un[By](i, j) +
                          un[Bz](i, j) * un[Bz](i, j);
        pb.rhs(i, j) =
            estar(i, j) + dt * div_hq(i, j) - pbar / (ep.gamma - 1.0) - e2 * (0.5 * q2 / rho + 0.5 * b2);
      }
    SolveReport rep;
    Field p2 = solve(pb, g, m.elliptic_tol, &rep);
    if (diag) {
      ++diag->elliptic_solves;
      diag->elliptic_iterations += rep.iterations;
      diag->elliptic_residual = std::max(diag->elliptic_residual, rep.residual);
    }
    fill_ghosts(p2, g, m.bc, Parity::Even, Parity::Even);
    Field zero(g), grad(g);
    for (int axis = 0; axis < g.dim; ++axis) {
      div_w(p2, zero, 0.0, axis, g, grad, -theta);
      auto& q = next[Qx + axis].raw();
      for (std::size_t n = 0; n < q.size(); ++n) q[n] += dt * grad.raw()[n];
    }
  }
  for (int k = Qx; k <= Qz; ++k) detail::fill_state_slot(next[k], g, m.bc, k);
  Field div_hq(g);
  detail::enthalpy_flux_rate(next, hbar, g, div_hq);
  for (std::size_t n = 0; n < estar.raw().size(); ++n)
    next[En].raw()[n] = estar.raw()[n] + dt * div_hq.raw()[n];
  sync(next, m.bc);
  check_admissible(next, ep);
  return next;
}

enum class DtLaw { Cfl, Accuracy };

// dt = cfl / sum_axes(max speed / h) with h = dx or dx^{5/3}, capped at dt_max.
inline double dt_from_speeds(const Grid& g, const std::array<double, 2>& speed, double cfl,
                             DtLaw law, double dt_max) {
  if (!(cfl > 0.0)) throw DomainError("cfl must be positive");
  double denom = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    const double h = g.spacing(axis);
    denom += speed[axis] / (law == DtLaw::Accuracy ? std::pow(h, 5.0 / 3.0) : h);
  }
  if (!(denom > 0.0)) return dt_max;
  return std::min(cfl / denom, dt_max);
}

inline double compute_dt(const State& s, const Model& m, double cfl, DtLaw law = DtLaw::Cfl,
                         double dt_max = 0.1) {
  std::array<double, 2> sp{0.0, 0.0};
  for (int axis = 0; axis < m.grid.dim; ++axis) sp[axis] = max_signal_speed(s, m.ep, axis);
  return dt_from_speeds(m.grid, sp, cfl, law, dt_max);
}

}  // namespace allmach
