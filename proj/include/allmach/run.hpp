#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "allmach/baseline.hpp"
#include "allmach/integrator.hpp"
#include "allmach/operators.hpp"
#include "allmach/problems.hpp"
#include "allmach/tableau.hpp"

namespace allmach {

enum class Scheme { Imex, Erk, Erkc };

inline Scheme parse_scheme(const std::string& s) {
  if (s == "imex") return Scheme::Imex;
  if (s == "erk") return Scheme::Erk;
  if (s == "erkc") return Scheme::Erkc;
  throw DomainError("unknown scheme '" + s + "' (imex | erk | erkc)");
}

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Imex: return "imex";
    case Scheme::Erk: return "erk";
    case Scheme::Erkc: return "erkc";
  }
  return "?";
}

inline DtLaw parse_dt_law(const std::string& s) {
  if (s == "cfl") return DtLaw::Cfl;
  if (s == "accuracy" || s == "accuracy-5/3") return DtLaw::Accuracy;
  throw DomainError("unknown dt law '" + s + "' (cfl | accuracy)");
}

struct RunConfig {
  std::string problem = "alfven1d";
  Scheme scheme = Scheme::Imex;
  std::string tableau = "si_sa3";
  std::string tableau_file;  // empty: built-in registry
  int nx = 0, ny = 0;        // 0: problem default
  double cfl = 0.25;
  std::optional<double> eps;
  std::optional<double> t_final;
  std::optional<DtLaw> dt_law;
  std::string out_dir;  // empty: nothing written
  int dump_every = 0;
  int max_steps = 0;  // 0: run to the final time
  double dt_max = 0.1;
  double elliptic_tol = 1e-12;
};

struct StepRecord {
  int step = 0;
  double t = 0, dt = 0;
  double div_b = 0;
  double mass = 0;
  double min_rho = 0, min_p = 0;
  int elliptic_iterations = 0;
};

struct SolverFailure : std::runtime_error {
  int step;
  SolverFailure(int s, const std::string& what)
      : std::runtime_error("step " + std::to_string(s) + ": " + what), step(s) {}
};

struct RunResult {
  ProblemSpec spec;
  Model model;
  State state;
  double t = 0;
  int steps = 0;
  std::vector<StepRecord> history;  // entry 0 is the initial state
  double max_div_b = 0;
  double min_rho = 0, min_p = 0;
  double mass0 = 0, mass = 0;
};

inline double div_b_max(const State& s) {
  if (s.grid.dim < 2) return 0.0;
  return div_b_monitor(s[Bx], s[By], s.grid);
}

inline StepRecord observe(const State& s, const EpsilonParams& ep, int step, double t, double dt) {
  StepRecord r;
  r.step = step;
  r.t = t;
  r.dt = dt;
  r.div_b = div_b_max(s);
  r.mass = total_mass(s);
  r.min_rho = r.min_p = std::numeric_limits<double>::infinity();
  for (int j = 0; j < s.grid.ny; ++j)
    for (int i = 0; i < s.grid.nx; ++i) {
      r.min_rho = std::min(r.min_rho, s[Rho](i, j));
      r.min_p = std::min(r.min_p, pressure_at(s, i, j, ep));
    }
  return r;
}

// ---- field dumps ----------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline std::vector<std::string> field_columns(int dim) {
  std::vector<std::string> c = {"x"};
  if (dim == 2) c.push_back("y");
  for (const char* n : {"rho", "u", "v", "w", "Bx", "By", "Bz", "p", "E"}) c.push_back(n);
  if (dim == 2)
    for (const char* n : {"Az", "divB", "vorticity", "M_ratio"}) c.push_back(n);
  return c;
}

// Vorticity v_x - u_y with fourth-order central differences. Velocity ghosts
// are filled with the state's boundary rules.
inline Field vorticity(const State& s, const Boundary& bc) {
  const Grid& g = s.grid;
  Field u(g), v(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      u(i, j) = s[Qx](i, j) / s[Rho](i, j);
      v(i, j) = s[Qy](i, j) / s[Rho](i, j);
    }
  fill_ghosts(u, g, bc, wall_parity(Qx, 0), wall_parity(Qx, 1));
  fill_ghosts(v, g, bc, wall_parity(Qy, 0), wall_parity(Qy, 1));
  Field vx = central_d4(v, 0, g);
  const Field uy = central_d4(u, 1, g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) vx(i, j) -= uy(i, j);
  return vx;
}

// Local sonic Mach number sqrt(u^2 + v^2)/sqrt(gamma p/rho) over its maximum.
inline Field mach_ratio(const State& s, const EpsilonParams& ep) {
  const Grid& g = s.grid;
  Field m(g);
  double top = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Primitive p = to_primitive(s.node(i, j), ep);
      m(i, j) = std::hypot(p.u, p.v) / std::sqrt(ep.gamma * p.p / p.rho);
      top = std::max(top, m(i, j));
    }
  if (top > 0.0)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) m(i, j) /= top;
  return m;
}

inline Table field_table(const State& s, const EpsilonParams& ep, const Boundary& bc,
                         const std::vector<std::pair<int, int>>* nodes = nullptr) {
  const Grid& g = s.grid;
  Table t;
  t.columns = field_columns(g.dim);
  Field divb, vort, mr;
  if (g.dim == 2) {
    divb = div_b_field(s[Bx], s[By], g);
    vort = vorticity(s, bc);
    mr = mach_ratio(s, ep);
  }
  auto row = [&](int i, int j) {
    const Primitive p = to_primitive(s.node(i, j), ep);
    std::vector<double> r = {g.x(i)};
    if (g.dim == 2) r.push_back(g.y(j));
    for (double v : {p.rho, p.u, p.v, p.w, p.bx, p.by, p.bz, p.p, s[En](i, j)}) r.push_back(v);
    if (g.dim == 2)
      for (double v : {s.az(i, j), divb(i, j), vort(i, j), mr(i, j)}) r.push_back(v);
    t.rows.push_back(std::move(r));
  };
  if (nodes) {
    for (auto [i, j] : *nodes) row(i, j);
  } else {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) row(i, j);
  }
  return t;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_table(const Table& t, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t c = 0; c < t.columns.size(); ++c) f << (c ? "," : "") << t.columns[c];
  f << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) f << (c ? "," : "") << format_double(r[c]);
    f << '\n';
  }
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

inline Table read_table(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty table " + path.string());
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) t.columns.push_back(c);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      double v = 0;
      auto [q, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw std::runtime_error("bad number in " + path.string());
      r.push_back(v);
      p = q;
      if (p < end && *p == ',') ++p;
    }
    if (r.size() != t.columns.size()) throw std::runtime_error("ragged row in " + path.string());
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline void emit_fields(const State& s, const EpsilonParams& ep, const Boundary& bc,
                        const std::filesystem::path& path) {
  write_table(field_table(s, ep, bc), path);
}

namespace detail {

inline int nearest(double v, double lo, double h, int n) {
  return std::clamp(static_cast<int>(std::lround((v - lo) / h)), 0, n - 1);
}

// Problem-specific 1D cuts: (file stem, nodes).
inline std::vector<std::pair<std::string, std::vector<std::pair<int, int>>>> cuts(
    const std::string& problem, const Grid& g) {
  std::vector<std::pair<std::string, std::vector<std::pair<int, int>>>> out;
  if (g.dim != 2) return out;
  if (problem == "orszag_tang") {
    const int j = nearest(0.625 * detail::kPi, g.ymin, g.dy, g.ny);
    std::vector<std::pair<int, int>> n;
    for (int i = 0; i < g.nx; ++i) n.emplace_back(i, j);
    out.emplace_back("cut_y0.625pi", std::move(n));
  } else if (problem == "blast_wave") {
    std::vector<std::pair<int, int>> n;
    for (int i = 0; i < g.nx; ++i) {
      const int j = nearest(0.5 - g.x(i), g.ymin, g.dy, g.ny);
      if (std::abs(g.x(i) + g.y(j) - 0.5) < 1e-9 * (g.dx + g.dy)) n.emplace_back(i, j);
    }
    out.emplace_back("cut_diagonal", std::move(n));
  } else if (problem == "field_loop") {
    const int i = nearest(0.2, g.xmin, g.dx, g.nx);
    std::vector<std::pair<int, int>> n;
    for (int j = 0; j < g.ny; ++j) n.emplace_back(i, j);
    out.emplace_back("cut_x0.2", std::move(n));
  }
  return out;
}

}  // namespace detail

// ---- error norms ------------------------------------------------------------

struct Norms {
  double l1 = 0, l2 = 0, linf = 0;
};

inline const char* slot_name(int k) {
  static const char* names[kVars] = {"rho", "rhou", "rhov", "rhow", "Bx", "By", "Bz", "E"};
  return names[k];
}

inline int slot_index(const std::string& name) {
  for (int k = 0; k < kVars; ++k)
    if (name == slot_name(k)) return k;
  throw DomainError("unknown variable '" + name + "'");
}

inline Norms error_norms(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw DomainError("error norms need equal nonempty sets");
  Norms n;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double e = std::abs(a[k] - b[k]);
    n.l1 += e;
    n.l2 += e * e;
    n.linf = std::max(n.linf, e);
  }
  n.l1 /= static_cast<double>(a.size());
  n.l2 = std::sqrt(n.l2 / static_cast<double>(a.size()));
  return n;
}

inline std::vector<double> interior_values(const Field& f) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(f.nx()) * f.ny());
  for (int j = 0; j < f.ny(); ++j)
    for (int i = 0; i < f.nx(); ++i) v.push_back(f(i, j));
  return v;
}

// Restricts a fine-grid field onto a coarse grid that nests with integer ratio
// r per axis. Vertex grids share nodes (fine index r*i); cell grids average
// the fine nodes bracketing the coarse centre (r*i + r/2 - 1, r*i + r/2 for
// even r).
inline std::vector<double> restrict_to(const Field& fine, const Grid& fg, const Grid& cg) {
  auto ratio = [](int f, int c) {
    if (c <= 0 || f % c != 0) throw DomainError("grids do not nest");
    return f / c;
  };
  const int rx = ratio(fg.nx, cg.nx);
  const int ry = cg.dim == 2 ? ratio(fg.ny, cg.ny) : 1;
  auto picks = [&](int r, int i) -> std::vector<int> {
    if (cg.centering == Centering::Vertex) return {r * i};
    if (r % 2 == 1) return {r * i + r / 2};
    return {r * i + r / 2 - 1, r * i + r / 2};
  };
  std::vector<double> out;
  for (int j = 0; j < cg.ny; ++j)
    for (int i = 0; i < cg.nx; ++i) {
      const auto px = picks(rx, i);
      const auto py = cg.dim == 2 ? picks(ry, j) : std::vector<int>{0};
      double s = 0;
      for (int b : py)
        for (int a : px) s += fine(a, b);
      out.push_back(s / static_cast<double>(px.size() * py.size()));
    }
  return out;
}

// ---- running ----------------------------------------------------------------

struct ResolvedRun {
  ProblemSpec spec;
  Grid grid;
  Model model;
  double t_final;
  DtLaw law;
};

inline ResolvedRun resolve(const RunConfig& c) {
  if (c.nx < 0 || c.ny < 0) throw DomainError("resolutions must be positive");
  if (!(c.cfl > 0.0)) throw DomainError("cfl must be positive");
  ResolvedRun r{make_problem(c.problem, c.eps), {}, {}, 0.0, DtLaw::Cfl};
  const int nx = c.nx > 0 ? c.nx : r.spec.default_nx;
  const int ny = c.ny > 0 ? c.ny : (r.spec.dim == 2 ? (c.nx > 0 ? c.nx : r.spec.default_ny) : 1);
  r.grid = make_grid(r.spec, nx, ny);
  r.model = make_model(r.spec, r.grid);
  r.model.elliptic_tol = c.elliptic_tol;
  r.t_final = c.t_final ? *c.t_final : r.spec.t_final;
  if (r.t_final < 0.0) throw DomainError("final time must be nonnegative");
  r.law = c.dt_law ? *c.dt_law : r.spec.default_dt_law;
  if (c.scheme != Scheme::Imex && !(r.spec.eps > 0.0))
    throw DomainError("explicit schemes need a positive Mach number");
  return r;
}

inline double step_size(const State& s, const Model& m, const RunConfig& c, DtLaw law) {
  return c.scheme == Scheme::Imex ? compute_dt(s, m, c.cfl, law, c.dt_max)
                                  : compute_dt_explicit(s, m, c.cfl, law, c.dt_max);
}

using StepObserver = std::function<void(const State&, const StepRecord&)>;

inline void write_summary(const RunResult& r, const RunConfig& c, const std::filesystem::path& p);

// Advances the configured problem to its final time (the last step is
// shortened to land on it). Writes diagnostics, dumps and a summary when an
// output directory is given.
inline RunResult run(const RunConfig& c, const StepObserver& observer = {}) {
  ResolvedRun rr = resolve(c);
  const ButcherPair tab = c.scheme == Scheme::Imex ? find_tableau(c.tableau, c.tableau_file)
                                                   : first_order_pair();
  const Model& m = rr.model;
  RunResult res;
  res.spec = rr.spec;
  res.model = m;
  res.state = initial_state(rr.spec, rr.grid);
  const bool ct = c.scheme != Scheme::Erk;

  namespace fs = std::filesystem;
  const bool files = !c.out_dir.empty();
  std::ofstream diag_csv;
  if (files) {
    fs::create_directories(c.out_dir);
    diag_csv.open(fs::path(c.out_dir) / "diagnostics.csv");
    if (!diag_csv) throw std::runtime_error("cannot write diagnostics in " + c.out_dir);
    diag_csv << "step,t,dt,divB_max,mass,min_rho,min_p,elliptic_iterations\n";
  }
  auto record = [&](const StepRecord& r) {
    res.history.push_back(r);
    res.max_div_b = std::max(res.max_div_b, r.div_b);
    res.min_rho = std::min(res.min_rho, r.min_rho);
    res.min_p = std::min(res.min_p, r.min_p);
    if (files)
      diag_csv << r.step << ',' << format_double(r.t) << ',' << format_double(r.dt) << ','
               << format_double(r.div_b) << ',' << format_double(r.mass) << ','
               << format_double(r.min_rho) << ',' << format_double(r.min_p) << ','
               << r.elliptic_iterations << '\n';
    if (observer) observer(res.state, r);
  };
  auto dump = [&](const std::string& stem) {
    emit_fields(res.state, m.ep, m.bc, fs::path(c.out_dir) / (stem + ".csv"));
  };

  StepRecord r0 = observe(res.state, m.ep, 0, 0.0, 0.0);
  res.min_rho = r0.min_rho;
  res.min_p = r0.min_p;
  res.mass0 = r0.mass;
  record(r0);
  if (files && c.dump_every > 0) dump("fields_000000");

  double t = 0.0;
  int n = 0;
  while (t < rr.t_final && (c.max_steps == 0 || n < c.max_steps)) {
    StepDiagnostics d;
    double dt = 0.0;
    try {
      dt = step_size(res.state, m, c, rr.law);
      bool last = false;
      if (t + dt >= rr.t_final) {
        dt = rr.t_final - t;
        last = true;
      }
      if (c.scheme == Scheme::Imex)
        res.state = imex_step(res.state, tab, m, dt, &d);
      else
        res.state = ssp_rk3_step(res.state, m, dt, ct, &d);
      t = last ? rr.t_final : t + dt;
    } catch (const PositivityError& e) {
      throw SolverFailure(n + 1, e.what());
    } catch (const ConvergenceError& e) {
      throw SolverFailure(n + 1, std::string(e.what()) + " (iterations " +
                                     std::to_string(e.iterations) + ", residual " +
                                     format_double(e.residual) + ")");
    } catch (const DomainError& e) {
      throw SolverFailure(n + 1, e.what());
    }
    ++n;
    StepRecord r = observe(res.state, m.ep, n, t, dt);
    r.elliptic_iterations = d.elliptic_iterations;
    record(r);
    if (files && c.dump_every > 0 && n % c.dump_every == 0) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "fields_%06d", n);
      dump(stem);
    }
  }
  res.t = t;
  res.steps = n;
  res.mass = res.history.back().mass;
  if (files) {
    dump("fields_final");
    for (const auto& [stem, nodes] : detail::cuts(rr.spec.name, rr.grid))
      write_table(field_table(res.state, m.ep, m.bc, &nodes), fs::path(c.out_dir) / (stem + ".csv"));
    write_summary(res, c, fs::path(c.out_dir) / "summary.txt");
  }
  return res;
}

inline std::optional<std::array<Norms, kVars>> exact_errors(const RunResult& r) {
  auto ex = exact_solution(r.spec, r.state.grid, r.t);
  if (!ex) return std::nullopt;
  std::array<Norms, kVars> out;
  for (int k = 0; k < kVars; ++k)
    out[k] = error_norms(interior_values(r.state[k]), interior_values((*ex)[k]));
  return out;
}

inline void write_summary(const RunResult& r, const RunConfig& c, const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  const Grid& g = r.state.grid;
  f << "problem " << r.spec.name << '\n'
    << "scheme " << scheme_name(c.scheme) << '\n';
  if (c.scheme == Scheme::Imex) f << "tableau " << c.tableau << '\n';
  f << "grid " << g.nx;
  if (g.dim == 2) f << 'x' << g.ny;
  f << '\n'
    << "epsilon " << format_double(r.spec.eps) << '\n'
    << "gamma " << format_double(r.spec.gamma) << '\n'
    << "cfl " << format_double(c.cfl) << '\n'
    << "t_final " << format_double(r.t) << '\n'
    << "steps " << r.steps << '\n'
    << "mass_initial " << format_double(r.mass0) << '\n'
    << "mass_final " << format_double(r.mass) << '\n'
    << "mass_relative_change " << format_double(std::abs(r.mass - r.mass0) / std::abs(r.mass0))
    << '\n';
  const double vol = g.cell_volume() * g.interior_count();
  for (int k : {Qx, Qy, Qz, En})
    f << "total_" << slot_name(k) << ' ' << format_double(mean_value(r.state[k]) * vol) << '\n';
  f << "max_divB " << format_double(r.max_div_b) << '\n'
    << "min_rho " << format_double(r.min_rho) << '\n'
    << "min_p " << format_double(r.min_p) << '\n';
  if (auto e = exact_errors(r)) {
    for (int k = 0; k < kVars; ++k)
      f << "error_" << slot_name(k) << " L1 " << format_double((*e)[k].l1) << " L2 "
        << format_double((*e)[k].l2) << " Linf " << format_double((*e)[k].linf) << '\n';
  }
}

// ---- convergence studies ----------------------------------------------------

struct ErrorReport {
  std::string variable;
  std::vector<int> n;
  std::vector<Norms> errors;
  std::vector<Norms> orders;  // orders[k] compares n[k] with n[k + 1]
};

// Runs every resolution (square in 2D) and measures `variable` against the
// exact solution or, when reference_n > 0, against a run at reference_n
// restricted to each coarse grid.
inline ErrorReport convergence_study(RunConfig base, const std::vector<int>& resolutions,
                                     const std::string& variable, int reference_n = 0) {
  const int k = slot_index(variable);
  base.out_dir.clear();
  ErrorReport rep;
  rep.variable = variable;
  std::optional<RunResult> ref;
  if (reference_n > 0) {
    RunConfig rc = base;
    rc.nx = reference_n;
    rc.ny = reference_n;
    ref = run(rc);
  }
  for (int n : resolutions) {
    RunConfig rc = base;
    rc.nx = n;
    rc.ny = n;
    const RunResult r = run(rc);
    const auto got = interior_values(r.state[k]);
    if (ref) {
      rep.errors.push_back(error_norms(got, restrict_to(ref->state[k], ref->state.grid,
                                                         r.state.grid)));
    } else {
      auto ex = exact_solution(r.spec, r.state.grid, r.t);
      if (!ex) throw DomainError("problem has no exact solution; give a reference resolution");
      rep.errors.push_back(error_norms(got, interior_values((*ex)[k])));
    }
    rep.n.push_back(n);
  }
  for (std::size_t i = 0; i + 1 < rep.n.size(); ++i) {
    const double ratio = std::log(static_cast<double>(rep.n[i + 1]) / rep.n[i]);
    auto ord = [&](double a, double b) { return std::log(a / b) / ratio; };
    rep.orders.push_back({ord(rep.errors[i].l1, rep.errors[i + 1].l1),
                          ord(rep.errors[i].l2, rep.errors[i + 1].l2),
                          ord(rep.errors[i].linf, rep.errors[i + 1].linf)});
  }
  return rep;
}

inline std::string format_report(const ErrorReport& r) {
  std::ostringstream o;
  char buf[160];
  o << "variable " << r.variable << '\n';
  std::snprintf(buf, sizeof buf, "%6s %12s %7s %12s %7s %12s %7s\n", "N", "L1", "order", "L2",
                "order", "Linf", "order");
  o << buf;
  for (std::size_t i = 0; i < r.n.size(); ++i) {
    if (i == 0) {
      std::snprintf(buf, sizeof buf, "%6d %12.3e %7s %12.3e %7s %12.3e %7s\n", r.n[i],
                    r.errors[i].l1, "--", r.errors[i].l2, "--", r.errors[i].linf, "--");
    } else {
      const Norms& q = r.orders[i - 1];
      std::snprintf(buf, sizeof buf, "%6d %12.3e %7.2f %12.3e %7.2f %12.3e %7.2f\n", r.n[i],
                    r.errors[i].l1, q.l1, r.errors[i].l2, q.l2, r.errors[i].linf, q.linf);
    }
    o << buf;
  }
  return o.str();
}

}  // namespace allmach
