#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "allmach/boundary.hpp"
#include "allmach/problems.hpp"
#include "allmach/weno.hpp"

using namespace allmach;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

Field sampled(const Grid& g, double (*f)(double)) {
  Field v(g);
  for (int i = -g.gx(); i < g.nx + g.gx(); ++i) v(i) = f(g.x(i));
  return v;
}

double l1(const Field& a, double (*f)(double), const Grid& g) {
  double e = 0;
  for (int i = 0; i < g.nx; ++i) e += std::abs(a(i) - f(g.x(i)));
  return e / g.nx;
}

}  // namespace

TEST_CASE("weno5 reproduces constants") {
  for (double c : {0.0, 1.0, -3.7, 1e8}) CHECK(weno5(c, c, c, c, c) == c);
  CHECK(weno5(Stencil5{2, 2, 2, 2, 2}) == 2.0);
}

TEST_CASE("weno5 is exact on polynomials up to degree four") {
  // Point values of the primitive's derivative: with f the flux, the
  // reconstruction targets h(x_{i+1/2}) where (1/h) int h = f over each cell.
  // For h(x) = x^4 that means f_i = ((x_i+1/2)^5 - (x_i-1/2)^5)/5 on unit cells.
  auto cell_avg = [](double x) { return (std::pow(x + 0.5, 5) - std::pow(x - 0.5, 5)) / 5.0; };
  for (double shift : {0.0, 0.3, -2.0}) {
    const double a = cell_avg(shift - 2), b = cell_avg(shift - 1), c = cell_avg(shift),
                 d = cell_avg(shift + 1), e = cell_avg(shift + 2);
    const double exact = std::pow(shift + 0.5, 4);
    CHECK_THAT(weno5_linear(a, b, c, d, e), WithinAbs(exact, 1e-12));
  }
  // every candidate stencil is exact for quadratics, so any convex weights are
  auto quad = [](double x) { return x * x + 1.0 / 12.0 - 0.5 * x + 2.0; };  // averages of h = x^2 - x/2 + 2
  for (double shift : {0.0, 1.7}) {
    const double h = (shift + 0.5) * (shift + 0.5) - 0.5 * (shift + 0.5) + 2.0;
    CHECK_THAT(weno5(quad(shift - 2), quad(shift - 1), quad(shift), quad(shift + 1), quad(shift + 2)),
               WithinAbs(h, 1e-12));
  }
}

TEST_CASE("weno weights form a convex combination") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int n = 0; n < 10000; ++n) {
    const auto w = weno5_weights(u(rng), u(rng), u(rng), u(rng), u(rng));
    CHECK(w[0] >= 0);
    CHECK(w[1] >= 0);
    CHECK(w[2] >= 0);
    CHECK_THAT(w[0] + w[1] + w[2], WithinAbs(1.0, 1e-14));
  }
  const auto lin = weno5_weights(1, 1, 1, 1, 1);
  CHECK_THAT(lin[0], WithinAbs(0.1, 1e-15));
  CHECK_THAT(lin[1], WithinAbs(0.6, 1e-15));
}

TEST_CASE("Lax-Friedrichs splitting") {
  const std::vector<double> f = {1.0, -2.0, 3.0}, v = {0.5, 0.25, -1.0};
  const auto s0 = lf_split(f, v, 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    CHECK(s0.plus[k] == f[k] / 2);
    CHECK(s0.minus[k] == f[k] / 2);
  }
  const auto s = lf_split({0, 0, 0}, v, 2.0);
  for (std::size_t k = 0; k < v.size(); ++k) {
    CHECK(s.plus[k] == v[k]);
    CHECK(s.minus[k] == -v[k]);
  }
  const auto t = lf_split(f, v, 1.7);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(t.plus[k] + t.minus[k] == f[k]);
  CHECK_THROWS_AS(lf_split(f, v, -1.0), DomainError);
}

TEST_CASE("component-wise divergence of a linear flux converges at fifth order") {
  double prev = 0;
  for (int n : {20, 40, 80, 160}) {
    const Grid g = make_grid_1d(n, 0.0, 1.0);
    const Field v = sampled(g, [](double x) { return std::sin(2 * kPi * x); });
    Field out(g);
    div_w(v, v, 1.0, 0, g, out);
    const double e = l1(out, [](double x) { return 2 * kPi * std::cos(2 * kPi * x); }, g);
    if (n == 160) CHECK(std::log2(prev / e) >= 4.8);
    prev = e;
  }
}

TEST_CASE("free stream is preserved by every divergence operator") {
  for (double eps : {0.0, 1e-6, 1e-2, 1.0}) {
    const EpsilonParams ep(eps, 5.0 / 3.0);
    const Grid g = make_grid_2d(12, 10, 0, 1, 0, 1);
    State s(g);
    const Vec8 c = to_conserved({1.3, 0.4, -0.7, 0.2, 0.8, -0.6, 0.3, 2.0}, ep);
    for (int j = -3; j < g.ny + 3; ++j)
      for (int i = -3; i < g.nx + 3; ++i) s.set_node(i, j, c);
    for (int axis : {0, 1}) {
      std::array<Field, kVars> out;
      for (auto& f : out) f = Field(g);
      std::array<bool, kVars> all;
      all.fill(true);
      div_cw(s, axis, ep, ep.pressure_alpha(), 3.0, out, all);
      Field cw(g);
      div_w(s[En], s[Rho], 3.0, axis, g, cw);
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          for (int k = 0; k < kVars; ++k) CHECK(std::abs(out[k](i, j)) <= 1e-13);
          CHECK(std::abs(cw(i, j)) <= 1e-13);
        }
    }
  }
}

TEST_CASE("divergence telescopes to the boundary interface fluxes") {
  const Grid g = make_grid_1d(30, 0.0, 1.0);
  Field v(g), f(g);
  for (int i = -3; i < g.nx + 3; ++i) {
    v(i) = (i == 14) ? 5.0 : 1.0 + 0.1 * i;  // single-node spike on a ramp
    f(i) = v(i) * v(i);
  }
  Field out(g);
  div_w(f, v, 4.0, 0, g, out);
  double sum = 0;
  for (int i = 0; i < g.nx; ++i) {
    REQUIRE(std::isfinite(out(i)));
    sum += out(i) * g.dx;
  }
  // interface fluxes at -1/2 and n - 1/2 from the raw line (halo width 3)
  std::vector<double> fl(g.nx + 6), vl(g.nx + 6);
  for (int k = 0; k < g.nx + 6; ++k) {
    fl[k] = f(k - 3);
    vl[k] = v(k - 3);
  }
  const double left = weno_interface_flux(fl.data(), vl.data(), 2, 4.0);
  const double right = weno_interface_flux(fl.data(), vl.data(), g.nx + 2, 4.0);
  CHECK_THAT(sum, WithinAbs(right - left, 1e-12));
}

TEST_CASE("characteristic and component-wise sweeps agree on smooth data") {
  const ProblemSpec p = make_problem("alfven1d");
  const EpsilonParams ep = p.params();
  double prev = 0;
  for (int n : {40, 80, 160}) {
    const Grid g = make_grid(p, n);
    const State s = initial_state(p, g);
    const double alpha = max_signal_speed(s, ep, 0);
    std::array<Field, kVars> cw;
    for (auto& f : cw) f = Field(g);
    std::array<bool, kVars> all;
    all.fill(true);
    div_cw(s, 0, ep, 1.0, alpha, cw, all);
    double e = 0;
    for (int k : {Qy, Qz, By, Bz}) {
      Field flux(g), out(g);
      for (int i = -3; i < n + 3; ++i) flux(i) = mhd_flux(s.node(i), 0, ep, 1.0)[k];
      div_w(flux, s[k], alpha, 0, g, out);
      for (int i = 0; i < n; ++i) e = std::max(e, std::abs(out(i) - cw[k](i)));
    }
    if (prev > 0) CHECK(std::log2(prev / e) > 4.0);
    prev = e;
  }
}

TEST_CASE("characteristic sweep stays non-oscillatory at a shock-tube jump") {
  const ProblemSpec p = make_problem("shock_tube");
  const EpsilonParams ep = p.params();
  const Grid g = make_grid(p, 100);
  State s = initial_state(p, g);
  const double alpha = max_signal_speed(s, ep, 0);
  std::array<Field, kVars> rate;
  for (auto& f : rate) f = Field(g);
  std::array<bool, kVars> all;
  all.fill(true);
  CharSweepStats st;
  div_cw(s, 0, ep, 1.0, alpha, rate, all, 1.0, false, &st);
  CHECK(st.fallbacks == 0);
  CHECK(st.interfaces == 101);
  // one forward-Euler update with a small step must stay within the data range
  const double dt = 0.2 * g.dx / alpha;
  for (int i = 0; i < g.nx; ++i) {
    const double rho = s[Rho](i) - dt * rate[Rho](i);
    CHECK(rho >= 0.125 - 0.01 * 0.875);
    CHECK(rho <= 1.0 + 0.01 * 0.875);
  }
}

TEST_CASE("Hamilton-Jacobi gradients") {
  const Grid g = make_grid_1d(40, 0.0, 1.0);
  Field lin(g), m(g), p(g);
  for (int i = -3; i < g.nx + 3; ++i) lin(i) = 2.5 * g.x(i) - 1.0;
  hj_gradients(lin, 0, g, m, p);
  for (int i = 0; i < g.nx; ++i) {
    CHECK_THAT(m(i), WithinAbs(2.5, 1e-12));
    CHECK_THAT(p(i), WithinAbs(2.5, 1e-12));
  }
  double pm = 0, pp = 0;
  for (int n : {40, 80, 160}) {
    const Grid h = make_grid_1d(n, 0.0, 1.0);
    const Field v = sampled(h, [](double x) { return std::sin(2 * kPi * x); });
    Field a(h), b(h);
    hj_gradients(v, 0, h, a, b);
    auto d = [](double x) { return 2 * kPi * std::cos(2 * kPi * x); };
    const double em = l1(a, d, h), ep = l1(b, d, h);
    if (pm > 0) {
      CHECK(std::log2(pm / em) > 4.5);
      CHECK(std::log2(pp / ep) > 4.5);
    }
    pm = em;
    pp = ep;
  }
}

TEST_CASE("gradients bracket a kink without overshoot") {
  const Grid g = make_grid_1d(40, -1.0, 1.0);
  Field v(g), m(g), p(g);
  for (int i = -3; i < g.nx + 3; ++i) v(i) = std::abs(g.x(i));
  hj_gradients(v, 0, g, m, p);
  for (int i = 0; i < g.nx; ++i) {
    CHECK(m(i) >= -1.0 - 0.01);
    CHECK(m(i) <= 1.0 + 0.01);
    CHECK(p(i) >= -1.0 - 0.01);
    CHECK(p(i) <= 1.0 + 0.01);
  }
}

TEST_CASE("Lax-Friedrichs numerical Hamiltonian") {
  auto ht = [](double u) { return 3.0 * u; };
  CHECK(lf_hamiltonian(ht, 0.4, 0.4, 3.0) == ht(0.4));
  CHECK_THAT(lf_hamiltonian(ht, 0.2, 0.6, 3.5), WithinAbs(3.0 * 0.4 - 3.5 * 0.2, 1e-15));
  // field-loop velocity (1, 0.5)/sqrt(1.25) at one node: beta = |u|
  const double u = 2.0 / std::sqrt(5.0);
  auto hx = [u](double ax) { return u * ax; };
  CHECK_THAT(lf_hamiltonian(hx, -1.0, 1.0, std::abs(u)), WithinAbs(-u, 1e-15));
}
