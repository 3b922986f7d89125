#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "allmach/core.hpp"

namespace allmach {

struct WaveSpeeds {
  double a = 0, ca = 0, cs = 0, cf = 0;
};

// Slot permutation putting the sweep axis first: local (n, t1, t2) components
// are the cyclic shift of (x, y, z) starting at `axis`.
inline std::array<int, 3> axis_order(int axis) {
  switch (axis) {
    case 0: return {0, 1, 2};
    case 1: return {1, 2, 0};
    case 2: return {2, 0, 1};
  }
  throw DomainError("axis out of range");
}

inline double component(const Primitive& s, int c, bool magnetic) {
  if (magnetic) return c == 0 ? s.bx : (c == 1 ? s.by : s.bz);
  return c == 0 ? s.u : (c == 1 ? s.v : s.w);
}

namespace detail {

// Roots of c^4 - (a^2 + |B|^2/rho) c^2 + a^2 ca^2 = 0. The slow root is taken
// from the product identity to avoid cancellation.
inline WaveSpeeds magnetosonic(double a2, double rho, double bn, double b2) {
  WaveSpeeds w;
  const double ca2 = bn * bn / rho;
  const double s = a2 + b2 / rho;
  const double disc = std::max(s * s - 4.0 * a2 * ca2, 0.0);
  const double cf2 = 0.5 * (s + std::sqrt(disc));
  const double cs2 = cf2 > 0.0 ? a2 * ca2 / cf2 : 0.0;
  w.a = std::sqrt(a2);
  w.ca = std::sqrt(ca2);
  w.cf = std::sqrt(cf2);
  w.cs = std::sqrt(std::max(cs2, 0.0));
  return w;
}

inline void require_admissible(const Primitive& s) {
  if (!(s.rho > 0.0)) throw DomainError("nonpositive density");
  if (!(s.p > 0.0)) throw DomainError("nonpositive pressure");
}

}  // namespace detail

// Speeds of the dimensionless system; the sound speed carries the 1/eps.
inline WaveSpeeds wave_speeds(const Primitive& s, int axis, const EpsilonParams& ep) {
  detail::require_admissible(s);
  if (!(ep.eps > 0.0)) throw DomainError("uncapped speeds undefined at eps = 0");
  const double b2 = s.bx * s.bx + s.by * s.by + s.bz * s.bz;
  const double a2 = ep.gamma * s.p / (s.rho * ep.eps2());
  return detail::magnetosonic(a2, s.rho, component(s, axis, true), b2);
}

// Same quadratic with the sound speed capped at sqrt(gamma p / rho) for eps < 1.
inline WaveSpeeds capped_wave_speeds(const Primitive& s, int axis, const EpsilonParams& ep) {
  detail::require_admissible(s);
  const double b2 = s.bx * s.bx + s.by * s.by + s.bz * s.bz;
  const double cap = ep.sound_cap();
  const double a2 = cap * cap * ep.gamma * s.p / s.rho;
  return detail::magnetosonic(a2, s.rho, component(s, axis, true), b2);
}

// max over interior nodes of |u_n| + capped fast speed.
inline double max_signal_speed(const State& st, const EpsilonParams& ep, int axis) {
  double m = 0.0;
  for (int j = 0; j < st.grid.ny; ++j)
    for (int i = 0; i < st.grid.nx; ++i) {
      const Primitive s = to_primitive(st.node(i, j), ep);
      const double un = component(s, axis, false);
      m = std::max(m, std::abs(un) + capped_wave_speeds(s, axis, ep).cf);
    }
  return m;
}

// Same scan with the true fast speed; used by the explicit baseline's step.
inline double max_true_signal_speed(const State& st, const EpsilonParams& ep, int axis) {
  double m = 0.0;
  for (int j = 0; j < st.grid.ny; ++j)
    for (int i = 0; i < st.grid.nx; ++i) {
      const Primitive s = to_primitive(st.node(i, j), ep);
      m = std::max(m, std::abs(component(s, axis, false)) + wave_speeds(s, axis, ep).cf);
    }
  return m;
}

// Physical flux along `axis` of the conserved 8-vector. The pressure enters the
// momentum flux as pc * p so callers choose alpha (IMEX) or 1/eps^2 (explicit).
// The B slots carry the induction flux u_n B - B_n u.
inline Vec8 mhd_flux(const Vec8& c, int axis, const EpsilonParams& ep, double pc) {
  const double rho = c[Rho];
  const double e2 = ep.eps2();
  const double u[3] = {c[Qx] / rho, c[Qy] / rho, c[Qz] / rho};
  const double b[3] = {c[Bx], c[By], c[Bz]};
  const double b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
  const double q2 = c[Qx] * c[Qx] + c[Qy] * c[Qy] + c[Qz] * c[Qz];
  const double p = (ep.gamma - 1.0) * (c[En] - 0.5 * e2 * (q2 / rho + b2));
  const double un = u[axis], bn = b[axis];
  Vec8 f;
  f[Rho] = c[Qx + axis];
  for (int k = 0; k < 3; ++k) {
    f[Qx + k] = c[Qx + k] * un - b[k] * bn;
    f[Bx + k] = un * b[k] - bn * u[k];
  }
  f[Qx + axis] += pc * p + 0.5 * b2;
  f[Bx + axis] = 0.0;
  const double ub = u[0] * b[0] + u[1] * b[1] + u[2] * b[2];
  f[En] = (c[En] + p + 0.5 * e2 * b2) * un - e2 * bn * ub;
  return f;
}

// Characteristic basis of the eps = 1 flux Jacobian at an interface state,
// stored in closed form. Waves are ordered
//   u-cf, u-ca, u-cs, u (entropy), u (divergence), u+cs, u+ca, u+cf.
// The seven physical waves use the normalized primitive eigenvectors with
// alpha_f/alpha_s and beta_t switches for the degenerate points; the eighth
// column is e_Bn + B_n e_E, which completes an invertible basis (the exact
// Jacobian has a zero B_n row and no eigenvector there).
class CharBasis {
 public:
  int axis = 0;
  std::array<double, 8> lambda{};

  // Characteristic amplitudes of a conserved-variable vector (global slots).
  void to_char(const double* v, double* w) const {
    const auto& o = ord_;
    const double drho = v[Rho];
    const double dun = (v[Qx + o[0]] - un_ * drho) * irho_;
    const double dt1 = (v[Qx + o[1]] - ut1_ * drho) * irho_;
    const double dt2 = (v[Qx + o[2]] - ut2_ * drho) * irho_;
    const double dbn = v[Bx + o[0]], db1 = v[Bx + o[1]], db2 = v[Bx + o[2]];
    const double dp =
        gm1_ * (v[En] - (un_ * v[Qx + o[0]] + ut1_ * v[Qx + o[1]] + ut2_ * v[Qx + o[2]]) +
                half_u2_ * drho - (bn_ * dbn + bt1_ * db1 + bt2_ * db2));
    const double tu = b1_ * dt1 + b2_ * dt2;
    const double tb = b1_ * db1 + b2_ * db2;
    const double xf = af_ * cf_ * dun, yf = as_ * cs_ * sgn_ * tu;
    const double zf = as_ * a_ * isr_ * tb, pf = af_ * dp * irho_;
    const double xs = as_ * cs_ * dun, ys = af_ * cf_ * sgn_ * tu;
    const double zs = -af_ * a_ * isr_ * tb, ps = as_ * dp * irho_;
    const double ya = 0.5 * sgn_ * (b2_ * dt1 - b1_ * dt2);
    const double za = 0.5 * isr_ * (b1_ * db2 - b2_ * db1);
    w[0] = (-xf + yf + zf + pf) * inv2a2_;
    w[1] = -ya + za;
    w[2] = (-xs - ys + zs + ps) * inv2a2_;
    w[3] = drho - dp / a2_;
    w[4] = dbn;
    w[5] = (xs + ys + zs + ps) * inv2a2_;
    w[6] = ya + za;
    w[7] = (xf - yf + zf + pf) * inv2a2_;
  }

  // Inverse of to_char.
  void from_char(const double* w, double* v) const {
    const auto& o = ord_;
    const double fs = w[7] + w[0], fd = w[7] - w[0];
    const double ss = w[5] + w[2], sd = w[5] - w[2];
    const double as = w[6] + w[1], ad = w[6] - w[1];
    const double drho = rho_ * (af_ * fs + as_ * ss) + w[3];
    const double dun = af_ * cf_ * fd + as_ * cs_ * sd;
    const double tperp = sgn_ * (af_ * cf_ * sd - as_ * cs_ * fd);
    const double dt1 = tperp * b1_ + sgn_ * b2_ * ad;
    const double dt2 = tperp * b2_ - sgn_ * b1_ * ad;
    const double bperp = a_ * sr_ * (as_ * fs - af_ * ss);
    const double db1 = bperp * b1_ - b2_ * sr_ * as;
    const double db2 = bperp * b2_ + b1_ * sr_ * as;
    const double dbn = w[4];
    const double dp = gp_ * (af_ * fs + as_ * ss);
    v[Rho] = drho;
    v[Qx + o[0]] = un_ * drho + rho_ * dun;
    v[Qx + o[1]] = ut1_ * drho + rho_ * dt1;
    v[Qx + o[2]] = ut2_ * drho + rho_ * dt2;
    v[Bx + o[0]] = dbn;
    v[Bx + o[1]] = db1;
    v[Bx + o[2]] = db2;
    v[En] = half_u2_ * drho + rho_ * (un_ * dun + ut1_ * dt1 + ut2_ * dt2) + bn_ * dbn +
            bt1_ * db1 + bt2_ * db2 + dp / gm1_;
  }

  static std::optional<CharBasis> make(const Primitive& s, int axis, double gamma) {
    if (!(s.rho > 0.0) || !(s.p > 0.0) || !std::isfinite(s.rho) || !std::isfinite(s.p))
      return std::nullopt;
    CharBasis cb;
    cb.axis = axis;
    cb.ord_ = axis_order(axis);
    const auto& o = cb.ord_;
    cb.rho_ = s.rho;
    cb.irho_ = 1.0 / s.rho;
    cb.sr_ = std::sqrt(s.rho);
    cb.isr_ = 1.0 / cb.sr_;
    cb.un_ = component(s, o[0], false);
    cb.ut1_ = component(s, o[1], false);
    cb.ut2_ = component(s, o[2], false);
    cb.bn_ = component(s, o[0], true);
    cb.bt1_ = component(s, o[1], true);
    cb.bt2_ = component(s, o[2], true);
    cb.half_u2_ = 0.5 * (cb.un_ * cb.un_ + cb.ut1_ * cb.ut1_ + cb.ut2_ * cb.ut2_);
    cb.gm1_ = gamma - 1.0;
    cb.gp_ = gamma * s.p;
    cb.a2_ = gamma * s.p / s.rho;
    cb.inv2a2_ = 0.5 / cb.a2_;
    const double b2 = cb.bn_ * cb.bn_ + cb.bt1_ * cb.bt1_ + cb.bt2_ * cb.bt2_;
    const WaveSpeeds ws = detail::magnetosonic(cb.a2_, s.rho, cb.bn_, b2);
    cb.a_ = ws.a;
    cb.cf_ = ws.cf;
    cb.cs_ = ws.cs;
    cb.sgn_ = cb.bn_ >= 0.0 ? 1.0 : -1.0;
    const double bt = std::hypot(cb.bt1_, cb.bt2_);
    if (bt > 1e-12) {
      cb.b1_ = cb.bt1_ / bt;
      cb.b2_ = cb.bt2_ / bt;
    } else {
      cb.b1_ = cb.b2_ = 1.0 / std::sqrt(2.0);
    }
    const double cf2 = ws.cf * ws.cf, cs2 = ws.cs * ws.cs;
    const double den = cf2 - cs2;
    if (den > 1e-12 * (cb.a2_ + b2 / s.rho)) {
      cb.af_ = std::sqrt(std::clamp((cb.a2_ - cs2) / den, 0.0, 1.0));
      cb.as_ = std::sqrt(std::clamp((cf2 - cb.a2_) / den, 0.0, 1.0));
    } else {
      cb.af_ = 1.0;
      cb.as_ = 0.0;
    }
    cb.lambda = {cb.un_ - ws.cf, cb.un_ - ws.ca, cb.un_ - ws.cs, cb.un_,
                 cb.un_,         cb.un_ + ws.cs, cb.un_ + ws.ca, cb.un_ + ws.cf};
    for (double x : {cb.a_, cb.cf_, cb.cs_, cb.af_, cb.as_, cb.b1_, cb.b2_})
      if (!std::isfinite(x)) return std::nullopt;
    return cb;
  }

 private:
  std::array<int, 3> ord_{};
  double rho_ = 1, irho_ = 1, sr_ = 1, isr_ = 1;
  double un_ = 0, ut1_ = 0, ut2_ = 0, bn_ = 0, bt1_ = 0, bt2_ = 0, half_u2_ = 0;
  double gm1_ = 1, gp_ = 1, a_ = 1, a2_ = 1, inv2a2_ = 0.5;
  double cf_ = 1, cs_ = 0, sgn_ = 1, b1_ = 0, b2_ = 0, af_ = 1, as_ = 0;
};

using Mat8 = Eigen::Matrix<double, 8, 8>;

struct EigenBasis {
  Mat8 R, L;
  std::array<double, 8> D{};
};

// Dense view of the characteristic basis at an interface state given in
// conserved variables (pressure recovered with the eps-EOS).
inline std::optional<EigenBasis> eigen_basis(const Vec8& avg, int axis, const EpsilonParams& ep) {
  if (!(avg[Rho] > 0.0)) return std::nullopt;
  const auto cb = CharBasis::make(to_primitive(avg, ep), axis, ep.gamma);
  if (!cb) return std::nullopt;
  EigenBasis eb;
  for (int k = 0; k < 8; ++k) {
    double e[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    double col[8];
    e[k] = 1.0;
    cb->from_char(e, col);
    for (int r = 0; r < 8; ++r) eb.R(r, k) = col[r];
    cb->to_char(e, col);
    for (int r = 0; r < 8; ++r) eb.L(r, k) = col[r];
  }
  eb.D = cb->lambda;
  if (!eb.R.allFinite() || !eb.L.allFinite()) return std::nullopt;
  return eb;
}

}  // namespace allmach
