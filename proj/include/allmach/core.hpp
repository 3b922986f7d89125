#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace allmach {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Raised when a recovered density or pressure is nonpositive. Carries the node
// so solver diagnostics can point at it.
struct PositivityError : std::runtime_error {
  int i = 0, j = 0;
  double value = 0.0;
  PositivityError(const std::string& what, int i_, int j_, double v)
      : std::runtime_error(what), i(i_), j(j_), value(v) {}
};

enum class Centering { Vertex, Cell };

// Uniform structured grid. Node i sits at xmin + (i + offset) dx with offset 0
// for vertex-centered (periodic) grids and 1/2 for cell-centered ones. In 1D
// ny = 1 and there is no y halo.
struct Grid {
  int dim = 1;
  int nx = 0, ny = 1;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 0;
  double dx = 0, dy = 0;
  int ghost = 3;
  Centering centering = Centering::Vertex;

  int gx() const { return ghost; }
  int gy() const { return dim == 2 ? ghost : 0; }
  int stride() const { return nx + 2 * gx(); }
  int rows() const { return ny + 2 * gy(); }
  std::size_t size() const { return static_cast<std::size_t>(stride()) * rows(); }
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i + gx()) + static_cast<std::size_t>(j + gy()) * stride();
  }
  double offset() const { return centering == Centering::Cell ? 0.5 : 0.0; }
  double x(int i) const { return xmin + (i + offset()) * dx; }
  double y(int j) const { return dim == 2 ? ymin + (j + offset()) * dy : 0.0; }
  double lx() const { return xmax - xmin; }
  double ly() const { return ymax - ymin; }
  long interior_count() const { return static_cast<long>(nx) * ny; }
  double cell_volume() const { return dim == 2 ? dx * dy : dx; }
  double spacing(int axis) const { return axis == 0 ? dx : dy; }
  int count(int axis) const { return axis == 0 ? nx : ny; }
};

inline Grid make_grid_1d(int nx, double xmin, double xmax,
                         Centering c = Centering::Vertex, int ghost = 3) {
  if (nx < 1) throw DomainError("grid needs at least one node");
  if (!(xmax > xmin)) throw DomainError("empty domain");
  if (ghost < 3) throw DomainError("ghost width must be >= 3");
  Grid g;
  g.dim = 1;
  g.nx = nx;
  g.ny = 1;
  g.xmin = xmin;
  g.xmax = xmax;
  g.dx = (xmax - xmin) / nx;
  g.ghost = ghost;
  g.centering = c;
  return g;
}

inline Grid make_grid_2d(int nx, int ny, double xmin, double xmax, double ymin,
                         double ymax, Centering c = Centering::Vertex, int ghost = 3) {
  Grid g = make_grid_1d(nx, xmin, xmax, c, ghost);
  if (ny < 1) throw DomainError("grid needs at least one node");
  if (!(ymax > ymin)) throw DomainError("empty domain");
  g.dim = 2;
  g.ny = ny;
  g.ymin = ymin;
  g.ymax = ymax;
  g.dy = (ymax - ymin) / ny;
  return g;
}

// Scalar grid function including the halo.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& g, double value = 0.0)
      : nx_(g.nx), ny_(g.ny), gx_(g.gx()), gy_(g.gy()), stride_(g.stride()),
        data_(g.size(), value) {}

  double& operator()(int i, int j = 0) { return data_[idx(i, j)]; }
  double operator()(int i, int j = 0) const { return data_[idx(i, j)]; }

  double* ptr(int i, int j = 0) { return data_.data() + idx(i, j); }
  const double* ptr(int i, int j = 0) const { return data_.data() + idx(i, j); }

  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i + gx_) + static_cast<std::size_t>(j + gy_) * stride_;
  }
  // Distance in storage between neighbours along an axis.
  std::ptrdiff_t step(int axis) const { return axis == 0 ? 1 : stride_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int gx() const { return gx_; }
  int gy() const { return gy_; }
  bool empty() const { return data_.empty(); }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  template <class F>
  void for_interior(F&& f) {
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) f(i, j, (*this)(i, j));
  }

 private:
  int nx_ = 0, ny_ = 0, gx_ = 0, gy_ = 0, stride_ = 0;
  std::vector<double> data_;
};

// Conserved variable slots. The same ordering is used by every 8-vector in the
// library (states, fluxes, characteristic projections).
enum Var : int { Rho = 0, Qx, Qy, Qz, Bx, By, Bz, En };
inline constexpr int kVars = 8;
using Vec8 = std::array<double, kVars>;

struct EpsilonParams {
  double eps = 1.0;
  double gamma = 5.0 / 3.0;

  EpsilonParams() = default;
  EpsilonParams(double e, double g) : eps(e), gamma(g) {
    if (!(e >= 0.0)) throw DomainError("epsilon must be >= 0");
    if (!(g > 1.0)) throw DomainError("gamma must be > 1");
  }

  double eps2() const { return eps * eps; }
  // Weight of the explicit pressure in the momentum flux.
  double pressure_alpha() const { return eps < 1.0 ? 1.0 : 1.0 / eps2(); }
  // Weight (1 - alpha eps^2) of the implicit pressure-perturbation gradient.
  double implicit_weight() const { return eps < 1.0 ? 1.0 - eps2() : 0.0; }
  // Caps the sound speed so signal speeds stay O(1) as eps -> 0.
  double sound_cap() const { return eps > 1.0 ? 1.0 / eps : 1.0; }
};

struct Primitive {
  double rho = 1, u = 0, v = 0, w = 0, bx = 0, by = 0, bz = 0, p = 1;
};

inline double eos_total_energy(const Primitive& s, const EpsilonParams& ep) {
  if (!(s.rho > 0.0)) throw DomainError("nonpositive density");
  const double kin = s.rho * (s.u * s.u + s.v * s.v + s.w * s.w);
  const double mag = s.bx * s.bx + s.by * s.by + s.bz * s.bz;
  return s.p / (ep.gamma - 1.0) + 0.5 * ep.eps2() * (kin + mag);
}

inline double pressure_from_conserved(const Vec8& c, const EpsilonParams& ep) {
  if (!(c[Rho] > 0.0)) throw DomainError("nonpositive density");
  const double q2 = c[Qx] * c[Qx] + c[Qy] * c[Qy] + c[Qz] * c[Qz];
  const double b2 = c[Bx] * c[Bx] + c[By] * c[By] + c[Bz] * c[Bz];
  return (ep.gamma - 1.0) * (c[En] - 0.5 * ep.eps2() * (q2 / c[Rho] + b2));
}

inline Vec8 to_conserved(const Primitive& s, const EpsilonParams& ep) {
  return {s.rho, s.rho * s.u, s.rho * s.v, s.rho * s.w, s.bx, s.by, s.bz,
          eos_total_energy(s, ep)};
}

inline Primitive to_primitive(const Vec8& c, const EpsilonParams& ep) {
  Primitive s;
  s.rho = c[Rho];
  if (!(s.rho > 0.0)) throw DomainError("nonpositive density");
  s.u = c[Qx] / s.rho;
  s.v = c[Qy] / s.rho;
  s.w = c[Qz] / s.rho;
  s.bx = c[Bx];
  s.by = c[By];
  s.bz = c[Bz];
  s.p = pressure_from_conserved(c, ep);
  return s;
}

// Structure-of-arrays conserved state. In 2D az holds the vector potential and
// B_x, B_y are always derived from it; in 1D az is left empty.
struct State {
  Grid grid;
  std::array<Field, kVars> u;
  Field az;

  State() = default;
  explicit State(const Grid& g) : grid(g) {
    for (auto& f : u) f = Field(g);
    if (g.dim == 2) az = Field(g);
  }

  bool has_potential() const { return !az.empty(); }
  Field& operator[](int k) { return u[k]; }
  const Field& operator[](int k) const { return u[k]; }

  Vec8 node(int i, int j = 0) const {
    const std::size_t n = u[0].idx(i, j);
    Vec8 c;
    for (int k = 0; k < kVars; ++k) c[k] = u[k].raw()[n];
    return c;
  }
  void set_node(int i, int j, const Vec8& c) {
    const std::size_t n = u[0].idx(i, j);
    for (int k = 0; k < kVars; ++k) u[k].raw()[n] = c[k];
  }
};

inline double pressure_at(const State& s, int i, int j, const EpsilonParams& ep) {
  return pressure_from_conserved(s.node(i, j), ep);
}

inline Field pressure_field(const State& s, const EpsilonParams& ep) {
  Field p(s.grid);
  for (int j = 0; j < s.grid.ny; ++j)
    for (int i = 0; i < s.grid.nx; ++i) p(i, j) = pressure_at(s, i, j, ep);
  return p;
}

// Interior nodal average, accumulated row by row in a fixed order.
inline double mean_value(const Field& f) {
  double total = 0.0;
  for (int j = 0; j < f.ny(); ++j) {
    double row = 0.0;
    for (int i = 0; i < f.nx(); ++i) row += f(i, j);
    total += row;
  }
  return total / (static_cast<double>(f.nx()) * f.ny());
}

inline double mean_pressure(const Field& p, const Grid&) { return mean_value(p); }

inline double total_mass(const State& s) {
  return mean_value(s[Rho]) * s.grid.interior_count() * s.grid.cell_volume();
}

// Throws PositivityError on the first interior node with rho <= 0 or p <= 0.
inline void check_admissible(const State& s, const EpsilonParams& ep) {
  for (int j = 0; j < s.grid.ny; ++j)
    for (int i = 0; i < s.grid.nx; ++i) {
      const Vec8 c = s.node(i, j);
      if (!(c[Rho] > 0.0)) throw PositivityError("nonpositive density", i, j, c[Rho]);
      const double p = pressure_from_conserved(c, ep);
      if (!(p > 0.0)) throw PositivityError("nonpositive pressure", i, j, p);
    }
}

}  // namespace allmach
