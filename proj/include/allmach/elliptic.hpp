#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "allmach/boundary.hpp"
#include "allmach/core.hpp"

namespace allmach {

struct ConvergenceError : std::runtime_error {
  int iterations = 0;
  double residual = 0.0;
  ConvergenceError(const std::string& what, int it, double res)
      : std::runtime_error(what), iterations(it), residual(res) {}
};

// m p - w div(H grad p) with the coefficient H given at nodes.
struct HelmholtzProblem {
  Field hbar;
  double w = 0.0;
  double m = 0.0;
  Field rhs;
  Boundary bc;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // ||L p - rhs||_inf / ||rhs||_inf
};

// Fourth-order symmetric discretization D = -G^T diag(H_half) G per axis,
// where G is the staggered gradient (p[i-1] - 27 p[i] + 27 p[i+1] - p[i+2])/(24h)
// at i+1/2 and H_half the four-point interpolant (guarded to stay positive).
// Periodic boundaries only.
class HelmholtzOperator {
 public:
  HelmholtzOperator(const HelmholtzProblem& pb, const Grid& g)
      : g_(g), m_(pb.m), w_(pb.w), bc_(pb.bc) {
    if (pb.m < 0.0 || pb.w < 0.0) throw DomainError("negative Helmholtz weight");
    if (pb.m == 0.0 && pb.w == 0.0) throw DomainError("degenerate Helmholtz operator");
    if (w_ > 0.0) {
      if (!bc_.all_periodic(g.dim))
        throw DomainError("implicit pressure solve supports periodic boundaries only");
      Field h = pb.hbar;
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
          if (!(h(i, j) > 0.0)) throw DomainError("nonpositive enthalpy coefficient");
      fill_ghosts(h, g, bc_, Parity::Even, Parity::Even);
      for (int axis = 0; axis < g.dim; ++axis) face_[axis] = faces(h, axis);
    }
    diag_ = Field(g);
    const double c = 1.0 / 576.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double d = m_;
        for (int axis = 0; axis < g.dim && w_ > 0.0; ++axis) {
          const Field& hf = face_[axis];
          const std::ptrdiff_t s = hf.step(axis);
          const double* f = hf.ptr(i, j);  // face i+1/2
          const double hh = g.spacing(axis) * g.spacing(axis);
          d += w_ * c / hh * (f[s] + 729.0 * f[0] + 729.0 * f[-s] + f[-2 * s]);
        }
        diag_(i, j) = d;
      }
  }

  // out = L p on interior nodes; fills p's halo first.
  void apply(Field& p, Field& out) const {
    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i) out(i, j) = m_ * p(i, j);
    if (w_ == 0.0) return;
    fill_ghosts(p, g_, bc_, Parity::Even, Parity::Even);
    for (int axis = 0; axis < g_.dim; ++axis) {
      const Field& hf = face_[axis];
      const std::ptrdiff_t s = p.step(axis);
      const double inv = 1.0 / (24.0 * g_.spacing(axis));
      for (int j = 0; j < g_.ny; ++j)
        for (int i = 0; i < g_.nx; ++i) {
          const double* q = p.ptr(i, j);
          const double* f = hf.ptr(i, j);
          // fluxes at i-3/2, i-1/2, i+1/2, i+3/2
          auto flux = [&](int k) {
            return f[k * s] *
                   (q[(k - 1) * s] - 27.0 * q[k * s] + 27.0 * q[(k + 1) * s] - q[(k + 2) * s]) * inv;
          };
          const double div = (flux(-2) - 27.0 * flux(-1) + 27.0 * flux(0) - flux(1)) * inv;
          out(i, j) -= w_ * div;
        }
    }
  }

  const Field& diagonal() const { return diag_; }
  double mass_weight() const { return m_; }
  double stiffness_weight() const { return w_; }
  const Grid& grid() const { return g_; }

 private:
  Field faces(const Field& h, int axis) const {
    Field f(g_);
    const std::ptrdiff_t s = h.step(axis);
    const int lo = -2, hi = g_.count(axis);
    for (int j = (axis == 1 ? lo : 0); j < (axis == 1 ? hi + 1 : g_.ny); ++j)
      for (int i = (axis == 0 ? lo : 0); i < (axis == 0 ? hi + 1 : g_.nx); ++i) {
        const double* c = h.ptr(i, j);
        const double a = c[0], b = c[s];
        double v = (-c[-s] + 9.0 * a + 9.0 * b - c[2 * s]) / 16.0;
        if (!(v >= 0.5 * std::min(a, b))) v = 0.5 * (a + b);
        f(i, j) = v;
      }
    return f;
  }

  Grid g_;
  double m_, w_;
  Boundary bc_;
  std::array<Field, 2> face_;
  Field diag_;
};

inline HelmholtzOperator assemble(const HelmholtzProblem& pb, const Grid& g) {
  return HelmholtzOperator(pb, g);
}

namespace detail {

inline double dot_interior(const Field& a, const Field& b) {
  double t = 0.0;
  for (int j = 0; j < a.ny(); ++j) {
    double r = 0.0;
    for (int i = 0; i < a.nx(); ++i) r += a(i, j) * b(i, j);
    t += r;
  }
  return t;
}

inline double max_abs_interior(const Field& a) {
  double m = 0.0;
  for (int j = 0; j < a.ny(); ++j)
    for (int i = 0; i < a.nx(); ++i) m = std::max(m, std::abs(a(i, j)));
  return m;
}

inline void remove_mean(Field& a) {
  const double mu = mean_value(a);
  for (int j = 0; j < a.ny(); ++j)
    for (int i = 0; i < a.nx(); ++i) a(i, j) -= mu;
}

}  // namespace detail

// Solves L p = rhs. With w > 0 the constant mode is decoupled (L 1 = m 1):
// its amplitude is mean(rhs)/m (zero when m = 0) and the remainder is found
// by Jacobi-preconditioned CG restricted to zero-mean fields.
inline Field solve(const HelmholtzOperator& op, const Field& rhs, double tol = 1e-12,
                   SolveReport* report = nullptr) {
  const Grid& g = op.grid();
  Field p(g);
  const double m = op.mass_weight();
  const double rnorm = detail::max_abs_interior(rhs);
  if (report) *report = SolveReport{};
  if (rnorm == 0.0) return p;
  if (op.stiffness_weight() == 0.0) {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) p(i, j) = rhs(i, j) / m;
    return p;
  }
  const double mean_rhs = mean_value(rhs);
  Field r = rhs;
  detail::remove_mean(r);
  const Field& diag = op.diagonal();
  Field z(g), d(g), q(g);
  auto precondition = [&] {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) z(i, j) = r(i, j) / diag(i, j);
    detail::remove_mean(z);
  };
  precondition();
  d = z;
  double rz = detail::dot_interior(r, z);
  const long cap = 10L * g.interior_count();
  // The zero-mean residual carries the convergence test; the mean part is exact.
  const double target = tol * rnorm;
  int it = 0;
  double res = detail::max_abs_interior(r);
  while (res > target) {
    if (it >= cap) throw ConvergenceError("pressure solve did not converge", it, res / rnorm);
    op.apply(d, q);
    const double dq = detail::dot_interior(d, q);
    if (!(dq > 0.0)) throw ConvergenceError("pressure operator lost definiteness", it, res / rnorm);
    const double alpha = rz / dq;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        p(i, j) += alpha * d(i, j);
        r(i, j) -= alpha * q(i, j);
      }
    precondition();
    const double rz_new = detail::dot_interior(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) d(i, j) = z(i, j) + beta * d(i, j);
    res = detail::max_abs_interior(r);
    ++it;
  }
  detail::remove_mean(p);
  const double shift = m > 0.0 ? mean_rhs / m : 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) p(i, j) += shift;
  if (report) {
    report->iterations = it;
    report->residual = res / rnorm;
  }
  return p;
}

inline Field solve(const HelmholtzProblem& pb, const Grid& g, double tol = 1e-12,
                   SolveReport* report = nullptr) {
  return solve(assemble(pb, g), pb.rhs, tol, report);
}

}  // namespace allmach
