#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "allmach/boundary.hpp"
#include "allmach/core.hpp"
#include "allmach/integrator.hpp"
#include "allmach/operators.hpp"

namespace allmach {

struct ProblemSpec {
  std::string name;
  int dim = 1;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 0;
  double gamma = 5.0 / 3.0;
  double eps = 1.0;
  double t_final = 1.0;
  Boundary bc;
  Centering centering = Centering::Vertex;
  int default_nx = 100, default_ny = 1;
  DtLaw default_dt_law = DtLaw::Cfl;
  // Primitive state at a point (in 2D B_x, B_y are replaced by the discrete
  // curl of `potential`).
  std::function<Primitive(double, double)> initial;
  std::function<double(double, double)> potential;
  // Exact primitive state and potential at (x, y, t), when known.
  std::function<Primitive(double, double, double)> exact;
  std::function<double(double, double, double)> exact_potential;

  EpsilonParams params() const { return EpsilonParams(eps, gamma); }
  bool has_exact() const { return static_cast<bool>(exact); }
};

inline const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names = {
      "alfven1d",    "eps_accuracy1d", "shock_tube", "alfven2d",         "eps_accuracy2d",
      "orszag_tang", "blast_wave",     "field_loop", "kelvin_helmholtz"};
  return names;
}

namespace detail {

constexpr double kPi = std::numbers::pi;

inline Primitive alfven_profile(double xi) {
  const double s = std::sin(2 * kPi * xi), c = std::cos(2 * kPi * xi);
  Primitive p;
  p.rho = 1.0;
  p.u = 0.0;
  p.v = 0.1 * s;
  p.w = 0.1 * c;
  p.bx = 1.0;
  p.by = 0.1 * s;
  p.bz = 0.1 * c;
  p.p = 0.1;
  return p;
}

// Rotates the 1D circularly polarized wave so it travels along -(cos t, sin t).
inline Primitive alfven_rotated(double x, double y, double t, double th) {
  const double ct = std::cos(th), st = std::sin(th);
  const Primitive a = alfven_profile(x * ct + y * st + t);
  Primitive p = a;
  p.u = a.u * ct - a.v * st;
  p.v = a.u * st + a.v * ct;
  p.bx = a.bx * ct - a.by * st;
  p.by = a.bx * st + a.by * ct;
  return p;
}

inline double kh_eta(double y) {
  if (y >= -9.0 / 32 && y < -7.0 / 32) return 0.5 * (1.0 + std::sin(16 * kPi * (y + 0.25)));
  if (y >= -7.0 / 32 && y <= 7.0 / 32) return 1.0;
  if (y > 7.0 / 32 && y <= 9.0 / 32) return 0.5 * (1.0 - std::sin(16 * kPi * (y - 0.25)));
  return 0.0;
}

}  // namespace detail

// `eps` overrides the problem's Mach number; well-prepared data depend on it.
inline ProblemSpec make_problem(const std::string& name, std::optional<double> eps = {}) {
  using detail::kPi;
  ProblemSpec s;
  s.name = name;
  auto mach = [&](double dflt) { return eps ? *eps : dflt; };
  if (name == "alfven1d") {
    s.gamma = 5.0 / 3.0;
    s.eps = 1.0;
    s.t_final = 1.0;
    s.default_nx = 160;
    s.default_dt_law = DtLaw::Accuracy;
    s.initial = [](double x, double) { return detail::alfven_profile(x); };
    s.exact = [](double x, double, double t) { return detail::alfven_profile(x + t); };
  } else if (name == "eps_accuracy1d") {
    s.gamma = 1.4;
    s.eps = mach(1e-6);
    s.t_final = 0.05;
    s.default_nx = 80;
    s.default_dt_law = DtLaw::Accuracy;
    s.initial = [e2 = s.eps * s.eps, g = s.gamma](double x, double) {
      const double sn = std::sin(2 * kPi * x), cs = std::cos(2 * kPi * x);
      Primitive p;
      p.rho = 1.0 + e2 * sn * sn;
      p.p = std::pow(p.rho, g);
      p.u = e2 * sn;
      p.v = sn + e2 * cs;
      p.w = 0.0;
      p.bx = 0.5;
      p.by = (1.0 + e2) * sn;
      p.bz = (1.0 + e2) * cs;
      return p;
    };
  } else if (name == "shock_tube") {
    s.gamma = 2.0;
    s.eps = 1.0;
    s.t_final = 0.1;
    s.default_nx = 200;
    s.centering = Centering::Cell;
    s.bc.x = Bc::Reflective;
    s.initial = [](double x, double) {
      return x < 0.5 ? Primitive{1.0, 0, 0, 0, 0.75, 1.0, 0, 1.0}
                     : Primitive{0.125, 0, 0, 0, 0.75, -1.0, 0, 0.1};
    };
  } else if (name == "alfven2d") {
    const double th = kPi / 4;
    s.dim = 2;
    s.xmax = 1.0 / std::cos(th);
    s.ymax = 1.0 / std::sin(th);
    s.gamma = 5.0 / 3.0;
    s.eps = 1.0;
    s.t_final = 1.0;
    s.default_nx = s.default_ny = 32;
    s.default_dt_law = DtLaw::Accuracy;
    s.bc.az_grad_x = -std::sin(th);
    s.bc.az_grad_y = std::cos(th);
    s.exact = [th](double x, double y, double t) { return detail::alfven_rotated(x, y, t, th); };
    s.initial = [th](double x, double y) { return detail::alfven_rotated(x, y, 0.0, th); };
    s.exact_potential = [th](double x, double y, double t) {
      const double xi = x * std::cos(th) + y * std::sin(th);
      const double eta = -x * std::sin(th) + y * std::cos(th);
      return eta + 0.1 / (2 * kPi) * std::cos(2 * kPi * (xi + t));
    };
    s.potential = [f = s.exact_potential](double x, double y) { return f(x, y, 0.0); };
  } else if (name == "eps_accuracy2d") {
    s.dim = 2;
    s.ymax = 1.0;
    s.gamma = 1.4;
    s.eps = mach(1e-6);
    s.t_final = 0.01;
    s.default_nx = s.default_ny = 32;
    s.default_dt_law = DtLaw::Accuracy;
    s.initial = [e2 = s.eps * s.eps, g = s.gamma](double x, double y) {
      const double sp = std::sin(2 * kPi * (x + y)), cp = std::cos(2 * kPi * (x + y));
      const double sm = std::sin(2 * kPi * (x - y));
      Primitive p;
      p.rho = 1.0 + e2 * sp * sp;
      p.p = std::pow(p.rho, g);
      p.u = sm + e2 * sp;
      p.v = sm + e2 * cp;
      p.w = 0.0;
      p.bx = -sp / std::sqrt(2.0);
      p.by = sp / std::sqrt(2.0);
      p.bz = cp;
      return p;
    };
    s.potential = [](double x, double y) {
      return std::cos(2 * kPi * (x + y)) / (2 * std::sqrt(2.0) * kPi);
    };
  } else if (name == "orszag_tang") {
    s.dim = 2;
    s.xmax = s.ymax = 2 * kPi;
    s.gamma = 5.0 / 3.0;
    s.eps = 1.0;
    s.t_final = 2.0;
    s.default_nx = s.default_ny = 192;
    const double g = s.gamma;
    s.initial = [g](double x, double y) {
      return Primitive{g * g, -std::sin(y), std::sin(x), 0, -std::sin(y), std::sin(2 * x), 0, g};
    };
    s.potential = [](double x, double y) { return 0.5 * std::cos(2 * x) + std::cos(y); };
  } else if (name == "blast_wave") {
    const double th = kPi / 4;
    s.dim = 2;
    s.xmin = s.ymin = -0.5;
    s.xmax = s.ymax = 0.5;
    s.gamma = 5.0 / 3.0;
    s.eps = 0.9;
    s.t_final = 0.02;
    s.default_nx = s.default_ny = 200;
    s.bc.az_grad_x = -5.0 * std::sqrt(2.0);
    s.bc.az_grad_y = 5.0 * std::sqrt(2.0);
    s.initial = [th](double x, double y) {
      const double r = std::hypot(x, y);
      return Primitive{1.0, 0, 0, 0, 10 * std::sin(th), 10 * std::cos(th), 0,
                       r <= 0.125 ? 100.0 : 10.0};
    };
    s.potential = [](double x, double y) { return 5.0 * std::sqrt(2.0) * (-x + y); };
  } else if (name == "field_loop") {
    s.dim = 2;
    s.xmin = -1.0;
    s.xmax = 1.0;
    s.ymin = -0.5;
    s.ymax = 0.5;
    s.gamma = 5.0 / 3.0;
    s.eps = 0.1;
    s.t_final = std::sqrt(5.0);
    s.default_nx = 256;
    s.default_ny = 128;
    s.initial = [](double, double) {
      const double v0 = 1.0;
      return Primitive{1.0, v0 * (-2.0 / std::sqrt(5.0)), v0 / std::sqrt(5.0), 0, 0, 0, 0, 1.0};
    };
    s.potential = [](double x, double y) {
      const double r = std::hypot(x, y);
      return r <= 0.3 ? 1e-3 * (0.3 - r) : 0.0;
    };
  } else if (name == "kelvin_helmholtz") {
    s.dim = 2;
    s.xmax = 2.0;
    s.ymin = -0.5;
    s.ymax = 0.5;
    s.gamma = 1.4;
    s.eps = 1e-6;
    s.t_final = 0.8;
    s.default_nx = 256;
    s.default_ny = 128;
    s.bc.az_grad_y = 0.1;
    const double g = s.gamma;
    s.initial = [g](double x, double y) {
      return Primitive{g, 1.0 - 2.0 * detail::kh_eta(y), 0.1 * std::sin(2 * kPi * x), 0, 0.1, 0,
                       0, 1.0};
    };
    s.potential = [](double, double y) { return 0.1 * y; };
  } else {
    throw DomainError("unknown problem '" + name + "'");
  }
  if (s.dim == 1) s.ymax = 0.0;
  s.eps = mach(s.eps);
  if (s.eps < 0.0) throw DomainError("epsilon must be >= 0");
  return s;
}

inline Grid make_grid(const ProblemSpec& s, int nx, int ny = 0) {
  if (s.dim == 1) return make_grid_1d(nx, s.xmin, s.xmax, s.centering);
  return make_grid_2d(nx, ny > 0 ? ny : nx, s.xmin, s.xmax, s.ymin, s.ymax, s.centering);
}

inline Model make_model(const ProblemSpec& s, const Grid& g) {
  Model m;
  m.grid = g;
  m.ep = s.params();
  m.bc = s.bc;
  return m;
}

namespace detail {

// Samples a primitive state; in 2D with a potential, B_x and B_y come from the
// discrete curl so the field is divergence free under the monitor.
inline State sample_state(const ProblemSpec& s, const Grid& g,
                          const std::function<Primitive(double, double)>& prim,
                          const std::function<double(double, double)>& pot, bool curl_b) {
  State st(g);
  const EpsilonParams ep = s.params();
  if (g.dim == 2 && pot) {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) st.az(i, j) = pot(g.x(i), g.y(j));
    fill_potential_ghosts(st.az, g, s.bc);
    if (curl_b) curl_to_b(st.az, g, st[Bx], st[By]);
  }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      Primitive p = prim(g.x(i), g.y(j));
      if (g.dim == 2 && pot && curl_b) {
        p.bx = st[Bx](i, j);
        p.by = st[By](i, j);
      }
      st.set_node(i, j, to_conserved(p, ep));
    }
  apply_boundary(st, s.bc);
  return st;
}

}  // namespace detail

inline State initial_state(const ProblemSpec& s, const Grid& g) {
  return detail::sample_state(s, g, s.initial, s.potential, true);
}

// Exact state at time t (B sampled analytically, not through the curl).
inline std::optional<State> exact_solution(const ProblemSpec& s, const Grid& g, double t) {
  if (!s.has_exact()) return std::nullopt;
  auto prim = [&](double x, double y) { return s.exact(x, y, t); };
  std::function<double(double, double)> pot;
  if (s.exact_potential) pot = [&](double x, double y) { return s.exact_potential(x, y, t); };
  return detail::sample_state(s, g, prim, pot, false);
}

}  // namespace allmach
