#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "allmach/elliptic.hpp"

using namespace allmach;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

HelmholtzProblem problem(const Grid& g, double m, double w, double (*h)(double, double)) {
  HelmholtzProblem pb;
  pb.m = m;
  pb.w = w;
  pb.hbar = Field(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) pb.hbar(i, j) = h(g.x(i), g.y(j));
  pb.rhs = Field(g);
  return pb;
}

double const_h(double, double) { return 1.7; }
double var_h(double x, double y) {
  return 2.0 + 0.5 * std::sin(2 * kPi * x) * std::cos(2 * kPi * y);
}

Field random_field(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Field f(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) f(i, j) = u(rng);
  return f;
}

double max_diff(const Field& a, const Field& b) {
  double m = 0;
  for (int j = 0; j < a.ny(); ++j)
    for (int i = 0; i < a.nx(); ++i) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace

TEST_CASE("mass-only operator is a pointwise scaling") {
  const Grid g = make_grid_1d(16, 0, 1);
  HelmholtzProblem pb = problem(g, 1.0 / 0.4, 0.0, const_h);
  for (int i = 0; i < g.nx; ++i) pb.rhs(i) = std::cos(g.x(i)) + 0.1 * i;
  const Field p = solve(pb, g);
  for (int i = 0; i < g.nx; ++i) CHECK_THAT(p(i), WithinRel(pb.rhs(i) * 0.4, 1e-14));
}

TEST_CASE("Fourier symbol of the constant-coefficient operator") {
  double prev = 0;
  for (int n : {16, 32, 64}) {
    const Grid g = make_grid_1d(n, 0, 1);
    const double m = 0.3, w = 0.02, h = 1.7;
    const HelmholtzOperator op = assemble(problem(g, m, w, const_h), g);
    Field p(g), out(g);
    for (int i = 0; i < n; ++i) p(i) = std::sin(2 * kPi * g.x(i));
    op.apply(p, out);
    double e = 0;
    for (int i = 0; i < n; ++i)
      e = std::max(e, std::abs(out(i) - (m + w * h * 4 * kPi * kPi) * p(i)));
    if (prev > 0) CHECK(std::log2(prev / e) > 3.8);
    prev = e;
  }
  const Grid g = make_grid_2d(8, 6, 0, 1, 0, 1);
  const HelmholtzOperator op = assemble(problem(g, 0.0, 1.0, var_h), g);
  Field c(g, 4.2), out(g);
  op.apply(c, out);
  CHECK(max_diff(out, Field(g)) < 1e-12);
}

TEST_CASE("pure stiffness solve pins the mean to zero") {
  const Grid g = make_grid_1d(64, 0, 1);
  const double w = 0.05, h = 1.7;
  HelmholtzProblem pb = problem(g, 0.0, w, const_h);
  for (int i = 0; i < g.nx; ++i) pb.rhs(i) = std::sin(2 * kPi * g.x(i)) * w * h * 4 * kPi * kPi + 0.3;
  const Field p = solve(pb, g);
  CHECK(std::abs(mean_value(p)) < 1e-13);
  for (int i = 0; i < g.nx; ++i) CHECK_THAT(p(i), WithinAbs(std::sin(2 * kPi * g.x(i)), 2e-5));
}

TEST_CASE("manufactured solution is recovered to the solver tolerance") {
  std::mt19937_64 rng(4);
  const Grid g = make_grid_2d(24, 20, 0, 1, 0, 1);
  HelmholtzProblem pb = problem(g, 0.5, 3e-3, var_h);
  const HelmholtzOperator op = assemble(pb, g);
  Field star = random_field(g, rng), rhs(g);
  op.apply(star, rhs);
  SolveReport rep;
  const Field p = solve(op, rhs, 1e-12, &rep);
  CHECK(rep.residual <= 1e-12);
  CHECK(rep.iterations > 0);
  CHECK(max_diff(p, star) < 1e-9);
}

TEST_CASE("manufactured solution converges at fourth order under refinement") {
  // p* = sin(2 pi x) cos(2 pi y), H = var_h; rhs from the continuous operator.
  double prev = 0;
  const double m = 0.1, w = 0.01;
  for (int n : {16, 32, 64}) {
    const Grid g = make_grid_2d(n, n, 0, 1, 0, 1);
    HelmholtzProblem pb = problem(g, m, w, var_h);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double x = g.x(i), y = g.y(j);
        const double sx = std::sin(2 * kPi * x), cx = std::cos(2 * kPi * x);
        const double sy = std::sin(2 * kPi * y), cy = std::cos(2 * kPi * y);
        const double k = 2 * kPi;
        const double h = 2.0 + 0.5 * sx * cy;
        const double hx = 0.5 * k * cx * cy, hy = -0.5 * k * sx * sy;
        const double px = k * cx * cy, py = -k * sx * sy;
        const double lap = -2 * k * k * sx * cy;
        pb.rhs(i, j) = m * sx * cy - w * (h * lap + hx * px + hy * py);
      }
    const Field p = solve(pb, g);
    double e = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        e = std::max(e, std::abs(p(i, j) - std::sin(2 * kPi * g.x(i)) * std::cos(2 * kPi * g.y(j))));
    if (prev > 0) CHECK(std::log2(prev / e) >= 3.8);
    prev = e;
  }
}

TEST_CASE("operator is symmetric") {
  std::mt19937_64 rng(9);
  const Grid g = make_grid_2d(18, 14, 0, 2, 0, 1);
  const HelmholtzOperator op = assemble(problem(g, 0.2, 0.01, var_h), g);
  for (int n = 0; n < 10; ++n) {
    Field u = random_field(g, rng), v = random_field(g, rng), lu(g), lv(g);
    op.apply(u, lu);
    op.apply(v, lv);
    const double a = detail::dot_interior(lu, v), b = detail::dot_interior(u, lv);
    CHECK_THAT(a, WithinRel(b, 1e-12));
  }
}

TEST_CASE("solver is linear in the right-hand side") {
  std::mt19937_64 rng(21);
  const Grid g = make_grid_2d(16, 16, 0, 1, 0, 1);
  const HelmholtzOperator op = assemble(problem(g, 0.4, 0.005, var_h), g);
  const Field r1 = random_field(g, rng), r2 = random_field(g, rng);
  Field mix(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) mix(i, j) = 1.5 * r1(i, j) - 2.0 * r2(i, j);
  const double tol = 1e-12;
  const Field p1 = solve(op, r1, tol), p2 = solve(op, r2, tol), pm = solve(op, mix, tol);
  Field comb(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) comb(i, j) = 1.5 * p1(i, j) - 2.0 * p2(i, j);
  CHECK(max_diff(pm, comb) <= 10 * tol * detail::max_abs_interior(pm));
  // fixed inputs give the same bits
  CHECK(max_diff(solve(op, r1, tol), p1) == 0.0);
}

TEST_CASE("invalid problems are rejected") {
  const Grid g = make_grid_1d(8, 0, 1);
  HelmholtzProblem pb = problem(g, 1.0, 1.0, const_h);
  pb.hbar(3) = 0.0;
  CHECK_THROWS_AS(assemble(pb, g), DomainError);
  HelmholtzProblem walls = problem(g, 1.0, 1.0, const_h);
  walls.bc.x = Bc::Reflective;
  CHECK_THROWS_AS(assemble(walls, g), DomainError);
  CHECK_THROWS_AS(assemble(problem(g, 0.0, 0.0, const_h), g), DomainError);
}
