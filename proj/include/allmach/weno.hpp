#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "allmach/core.hpp"
#include "allmach/eigensystem.hpp"

namespace allmach {

inline constexpr double kWenoEps = 1e-6;

struct Stencil5 {
  double a, b, c, d, e;  // upwind to downwind
};

inline std::array<double, 3> weno5_weights(double a, double b, double c, double d, double e) {
  const double t0 = a - 2 * b + c, s0 = a - 4 * b + 3 * c;
  const double t1 = b - 2 * c + d, s1 = b - d;
  const double t2 = c - 2 * d + e, s2 = 3 * c - 4 * d + e;
  const double beta0 = 13.0 / 12.0 * t0 * t0 + 0.25 * s0 * s0;
  const double beta1 = 13.0 / 12.0 * t1 * t1 + 0.25 * s1 * s1;
  const double beta2 = 13.0 / 12.0 * t2 * t2 + 0.25 * s2 * s2;
  const double g0 = 0.1 / ((kWenoEps + beta0) * (kWenoEps + beta0));
  const double g1 = 0.6 / ((kWenoEps + beta1) * (kWenoEps + beta1));
  const double g2 = 0.3 / ((kWenoEps + beta2) * (kWenoEps + beta2));
  const double inv = 1.0 / (g0 + g1 + g2);
  return {g0 * inv, g1 * inv, g2 * inv};
}

// Jiang-Shu reconstruction at the right interface of c.
inline double weno5(double a, double b, double c, double d, double e) {
  const auto w = weno5_weights(a, b, c, d, e);
  const double q0 = (2 * a - 7 * b + 11 * c) / 6.0;
  const double q1 = (-b + 5 * c + 2 * d) / 6.0;
  const double q2 = (2 * c + 5 * d - e) / 6.0;
  return w[0] * q0 + w[1] * q1 + w[2] * q2;
}

inline double weno5(const Stencil5& s) { return weno5(s.a, s.b, s.c, s.d, s.e); }

// The optimal-weight limit of weno5 (fifth-order linear scheme).
inline double weno5_linear(double a, double b, double c, double d, double e) {
  return (2 * a - 13 * b + 47 * c + 27 * d - 3 * e) / 60.0;
}

struct SplitFluxPair {
  std::vector<double> plus, minus;
};

inline SplitFluxPair lf_split(const std::vector<double>& f, const std::vector<double>& v,
                              double lf_alpha) {
  if (lf_alpha < 0.0) throw DomainError("negative Lax-Friedrichs speed");
  if (f.size() != v.size()) throw DomainError("flux/variable size mismatch");
  SplitFluxPair s{std::vector<double>(f.size()), std::vector<double>(f.size())};
  for (std::size_t k = 0; k < f.size(); ++k) {
    s.plus[k] = 0.5 * (f[k] + lf_alpha * v[k]);
    s.minus[k] = 0.5 * (f[k] - lf_alpha * v[k]);
  }
  return s;
}

// Numerical flux at the interface between line entries k and k+1, from the LF
// split of f and v with upwind/downwind WENO5 stencils.
inline double weno_interface_flux(const double* f, const double* v, int k, double alpha) {
  auto p = [&](int m) { return 0.5 * (f[m] + alpha * v[m]); };
  auto n = [&](int m) { return 0.5 * (f[m] - alpha * v[m]); };
  return weno5(p(k - 2), p(k - 1), p(k), p(k + 1), p(k + 2)) +
         weno5(n(k + 3), n(k + 2), n(k + 1), n(k), n(k - 1));
}

// Interface fluxes of one line. f and v hold n + 6 entries (three halo nodes on
// each side); fhat receives n + 1 values, fhat[m] living at interface m - 1/2.
inline void weno_line_fluxes(const double* f, const double* v, int n, double alpha, double* fhat) {
  for (int m = 0; m <= n; ++m) fhat[m] = weno_interface_flux(f, v, m + 2, alpha);
}

namespace detail {

// Gathers the line through interior node (i0, j0) along `axis` including halo.
inline void gather(const Field& src, int axis, int fixed, int n, int g, double* dst) {
  const double* p = axis == 0 ? src.ptr(-g, fixed) : src.ptr(fixed, -g);
  const std::ptrdiff_t st = src.step(axis);
  for (int k = 0; k < n + 2 * g; ++k) dst[k] = p[k * st];
}

inline int lines(const Grid& g, int axis) { return axis == 0 ? g.ny : g.nx; }

inline double& at_line(Field& f, int axis, int fixed, int k) {
  return axis == 0 ? f(k, fixed) : f(fixed, k);
}

}  // namespace detail

// Component-wise WENO flux divergence (f_{i+1/2} - f_{i-1/2})/dx of a nodal
// flux. Halos of flux and var must be filled along the axis. With accumulate
// set, scale * divergence is added to out instead of overwriting it.
inline void div_w(const Field& flux, const Field& var, double lf_alpha, int axis, const Grid& g,
                  Field& out, double scale = 1.0, bool accumulate = false) {
  if (lf_alpha < 0.0) throw DomainError("negative Lax-Friedrichs speed");
  const int n = g.count(axis);
  const int h = axis == 0 ? g.gx() : g.gy();
  const double inv = scale / g.spacing(axis);
  std::vector<double> f(n + 2 * h), v(n + 2 * h), fh(n + 1);
  for (int l = 0; l < detail::lines(g, axis); ++l) {
    detail::gather(flux, axis, l, n, h, f.data());
    detail::gather(var, axis, l, n, h, v.data());
    for (int m = 0; m <= n; ++m) fh[m] = weno_interface_flux(f.data(), v.data(), m + h - 1, lf_alpha);
    for (int i = 0; i < n; ++i) {
      double& o = detail::at_line(out, axis, l, i);
      const double d = (fh[i + 1] - fh[i]) * inv;
      o = accumulate ? o + d : d;
    }
  }
}

// Functional form: evaluates the nodal flux from the field, then differences.
template <class FluxFn>
Field div_w(const Field& var, FluxFn&& flux_of, double lf_alpha, int axis, const Grid& g) {
  Field f(g);
  for (std::size_t k = 0; k < f.raw().size(); ++k) f.raw()[k] = flux_of(var.raw()[k]);
  Field out(g);
  div_w(f, var, lf_alpha, axis, g, out);
  return out;
}

struct CharSweepStats {
  long interfaces = 0;
  long fallbacks = 0;
};

// Characteristic-wise WENO divergence of the full 8-component flux
// mhd_flux(., axis, ep, pc). The state halo must be filled along the axis.
// out[k] receives scale * divergence of slot k for every k in `wanted` (added
// to out[k] when accumulate is set).
inline void div_cw(const State& st, int axis, const EpsilonParams& ep, double pc,
                   double lf_alpha, std::array<Field, kVars>& out,
                   const std::array<bool, kVars>& wanted, double scale = 1.0,
                   bool accumulate = false, CharSweepStats* stats = nullptr) {
  if (lf_alpha < 0.0) throw DomainError("negative Lax-Friedrichs speed");
  const Grid& g = st.grid;
  const int n = g.count(axis);
  const int h = axis == 0 ? g.gx() : g.gy();
  const int len = n + 2 * h;
  const double inv = scale / g.spacing(axis);
  std::vector<Vec8> v(len), f(len);
  std::vector<Vec8> fh(n + 1);
  std::vector<double> line(len);
  for (int l = 0; l < detail::lines(g, axis); ++l) {
    for (int k = 0; k < kVars; ++k) {
      detail::gather(st[k], axis, l, n, h, line.data());
      for (int m = 0; m < len; ++m) v[m][k] = line[m];
    }
    for (int m = 0; m < len; ++m) f[m] = mhd_flux(v[m], axis, ep, pc);
    for (int m = 0; m <= n; ++m) {
      const int k0 = m + h - 1;  // left node of the interface
      Vec8 avg;
      for (int k = 0; k < kVars; ++k) avg[k] = 0.5 * (v[k0][k] + v[k0 + 1][k]);
      std::optional<CharBasis> cb;
      if (avg[Rho] > 0.0) {
        const double p = pressure_from_conserved(avg, ep);
        if (p > 0.0) cb = CharBasis::make(to_primitive(avg, ep), axis, ep.gamma);
      }
      if (stats) ++stats->interfaces;
      if (!cb) {
        if (stats) ++stats->fallbacks;
        for (int k = 0; k < kVars; ++k) {
          double fl[6], vl[6];
          for (int r = 0; r < 6; ++r) {
            fl[r] = f[k0 - 2 + r][k];
            vl[r] = v[k0 - 2 + r][k];
          }
          fh[m][k] = weno_interface_flux(fl, vl, 2, lf_alpha);
        }
        continue;
      }
      double w[6][8], gc[6][8];
      for (int r = 0; r < 6; ++r) {
        cb->to_char(v[k0 - 2 + r].data(), w[r]);
        cb->to_char(f[k0 - 2 + r].data(), gc[r]);
      }
      double gh[8];
      for (int c = 0; c < 8; ++c) {
        double fl[6], vl[6];
        for (int r = 0; r < 6; ++r) {
          fl[r] = gc[r][c];
          vl[r] = w[r][c];
        }
        gh[c] = weno_interface_flux(fl, vl, 2, lf_alpha);
      }
      cb->from_char(gh, fh[m].data());
    }
    for (int k = 0; k < kVars; ++k) {
      if (!wanted[k]) continue;
      for (int i = 0; i < n; ++i) {
        double& o = detail::at_line(out[k], axis, l, i);
        const double d = (fh[i + 1][k] - fh[i][k]) * inv;
        o = accumulate ? o + d : d;
      }
    }
  }
}

// Upwind-biased WENO approximations of dv/dx built from forward differences.
// minus uses the left-biased stencil, plus the right-biased one.
inline void hj_gradients(const Field& v, int axis, const Grid& g, Field& minus, Field& plus) {
  const int n = g.count(axis);
  const int h = axis == 0 ? g.gx() : g.gy();
  const double inv = 1.0 / g.spacing(axis);
  std::vector<double> line(n + 2 * h), d(n + 2 * h - 1);
  for (int l = 0; l < detail::lines(g, axis); ++l) {
    detail::gather(v, axis, l, n, h, line.data());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = (line[k + 1] - line[k]) * inv;
    for (int i = 0; i < n; ++i) {
      const int c = i + h;  // d[c + s] is the forward difference at node i + s
      detail::at_line(minus, axis, l, i) = weno5(d[c - 3], d[c - 2], d[c - 1], d[c], d[c + 1]);
      detail::at_line(plus, axis, l, i) = weno5(d[c + 2], d[c + 1], d[c], d[c - 1], d[c - 2]);
    }
  }
}

// Lax-Friedrichs numerical Hamiltonian HT((um + up)/2) - beta (up - um)/2.
template <class Ham>
double lf_hamiltonian(Ham&& ht, double um, double up, double beta) {
  return ht(0.5 * (um + up)) - beta * 0.5 * (up - um);
}

}  // namespace allmach
