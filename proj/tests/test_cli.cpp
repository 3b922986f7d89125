#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "allmach/run.hpp"

using namespace allmach;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("allmach_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void check_same_files(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  REQUIRE(!names.empty());
  for (const auto& n : names) {
    INFO(n);
    REQUIRE(fs::exists(b / n));
    CHECK(slurp(a / n) == slurp(b / n));
  }
}

}  // namespace

TEST_CASE("field dump has a header and one row per node") {
  const ProblemSpec s = make_problem("alfven1d");
  const Grid g = make_grid(s, 4);
  const State u = initial_state(s, g);
  const fs::path d = scratch("rows");
  emit_fields(u, s.params(), s.bc, d / "f.csv");
  std::ifstream f(d / "f.csv");
  std::vector<std::string> lines;
  for (std::string l; std::getline(f, l);) lines.push_back(l);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "x,rho,u,v,w,Bx,By,Bz,p,E");
}

TEST_CASE("dumped fields reload bitwise") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Table t;
  t.columns = {"x", "y", "q"};
  for (int r = 0; r < 50; ++r) t.rows.push_back({u(rng), std::ldexp(u(rng), -300), u(rng) * 1e300});
  t.rows.push_back({0.1, 1.0 / 3.0, -0.0});
  const fs::path d = scratch("roundtrip");
  write_table(t, d / "t.csv");
  const Table back = read_table(d / "t.csv");
  CHECK(back.columns == t.columns);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(back.rows[r][c] == t.rows[r][c]);

  const ProblemSpec s = make_problem("orszag_tang");
  const Grid g = make_grid(s, 12);
  const State st = initial_state(s, g);
  const Table ft = field_table(st, s.params(), s.bc);
  write_table(ft, d / "ot.csv");
  const Table fb = read_table(d / "ot.csv");
  REQUIRE(fb.rows.size() == 144u);
  for (std::size_t r = 0; r < ft.rows.size(); ++r) CHECK(fb.rows[r] == ft.rows[r]);
  // x fastest
  CHECK(fb.rows[1][0] > fb.rows[0][0]);
  CHECK(fb.rows[1][1] == fb.rows[0][1]);
}

TEST_CASE("shear-layer dumps carry vorticity and Mach ratio") {
  RunConfig c;
  c.problem = "kelvin_helmholtz";
  c.nx = 32;
  c.ny = 16;
  c.max_steps = 1;
  c.out_dir = scratch("kh").string();
  run(c);
  const Table t = read_table(fs::path(c.out_dir) / "fields_final.csv");
  auto col = [&](const std::string& n) {
    return std::find(t.columns.begin(), t.columns.end(), n) - t.columns.begin();
  };
  REQUIRE(col("vorticity") < static_cast<long>(t.columns.size()));
  REQUIRE(col("M_ratio") < static_cast<long>(t.columns.size()));
  for (const auto& r : t.rows) {
    CHECK(r[col("M_ratio")] >= 0.0);
    CHECK(r[col("M_ratio")] <= 1.0);
  }
}

TEST_CASE("identical configurations give identical files") {
  RunConfig c;
  c.problem = "orszag_tang";
  c.nx = 16;
  c.max_steps = 3;
  c.dump_every = 2;
  c.out_dir = scratch("det_a").string();
  run(c);
  const std::string a = c.out_dir;
  c.out_dir = scratch("det_b").string();
  run(c);
  check_same_files(a, c.out_dir);
  CHECK(fs::exists(fs::path(a) / "summary.txt"));
  CHECK(fs::exists(fs::path(a) / "fields_000002.csv"));
  CHECK(fs::exists(fs::path(a) / "diagnostics.csv"));

  // the command-line tool writes the same bytes as the library
  const fs::path d = scratch("det_cli");
  const std::string cmd = std::string(ALLMACH_CLI) +
                          " --problem orszag_tang --nx 16 --max-steps 3 --dump-every 2 --out " +
                          d.string() + " > " + (d / "stdout.txt").string();
  REQUIRE(std::system(cmd.c_str()) == 0);
  fs::remove(d / "stdout.txt");
  check_same_files(a, d);
}

TEST_CASE("command line rejects bad input") {
  const fs::path d = scratch("bad");
  const std::string sink = " > " + (d / "o.txt").string() + " 2>&1";
  CHECK(std::system((std::string(ALLMACH_CLI) + " --problem nope" + sink).c_str()) != 0);
  CHECK(std::system((std::string(ALLMACH_CLI) + " --scheme rk4" + sink).c_str()) != 0);
  CHECK(std::system((std::string(ALLMACH_CLI) + " --cfl -1" + sink).c_str()) != 0);
  CHECK(std::system((std::string(ALLMACH_CLI) + " --problem kelvin_helmholtz --scheme erk --epsilon 0" + sink)
                        .c_str()) != 0);
  CHECK(std::system((std::string(ALLMACH_CLI) + " --list-problems" + sink).c_str()) == 0);
}

TEST_CASE("error norms") {
  const Norms z = error_norms({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
  CHECK(z.l1 == 0.0);
  CHECK(z.l2 == 0.0);
  CHECK(z.linf == 0.0);
  const Norms n = error_norms({1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, -3.0});
  CHECK(n.l1 == 1.0);
  CHECK_THAT(n.l2, WithinRel(std::sqrt(2.5), 1e-15));
  CHECK(n.linf == 3.0);
  CHECK_THROWS_AS(error_norms({1.0}, {1.0, 2.0}), DomainError);

  // a constant state is reproduced exactly, so every error vanishes
  RunConfig c;
  c.problem = "eps_accuracy1d";
  c.nx = 16;
  const ResolvedRun rr = resolve(c);
  State s(rr.grid);
  for (int i = -rr.grid.gx(); i < rr.grid.nx + rr.grid.gx(); ++i)
    s.set_node(i, 0, to_conserved(Primitive{1, 0.2, 0.1, 0, 0.5, 0.3, 0.1, 1}, rr.model.ep));
  const State t = imex_step(s, find_tableau("si_sa3"), rr.model, 1e-3);
  for (int k = 0; k < kVars; ++k) {
    const Norms e = error_norms(interior_values(t[k]), interior_values(s[k]));
    CHECK(e.l1 == 0.0);
    CHECK(e.linf == 0.0);
  }
}

TEST_CASE("restriction onto nested grids") {
  const Grid fv = make_grid_1d(8, 0, 1), cv = make_grid_1d(4, 0, 1);
  Field f(fv);
  for (int i = 0; i < 8; ++i) f(i) = i;
  CHECK(restrict_to(f, fv, cv) == std::vector<double>{0, 2, 4, 6});
  const Grid fc = make_grid_1d(12, 0, 1, Centering::Cell), cc = make_grid_1d(1, 0, 1, Centering::Cell);
  Field h(fc);
  for (int i = 0; i < 12; ++i) h(i) = i;
  // coarse centre 0.5 sits between fine nodes 5 and 6
  CHECK(restrict_to(h, fc, cc) == std::vector<double>{5.5});
  const Grid f3 = make_grid_1d(9, 0, 1, Centering::Cell), c3 = make_grid_1d(3, 0, 1, Centering::Cell);
  Field q(f3);
  for (int i = 0; i < 9; ++i) q(i) = f3.x(i);
  const auto r3 = restrict_to(q, f3, c3);
  for (int i = 0; i < 3; ++i) CHECK_THAT(r3[i], WithinAbs(c3.x(i), 1e-15));
  CHECK_THROWS_AS(restrict_to(f, fv, make_grid_1d(3, 0, 1)), DomainError);
}

TEST_CASE("convergence study against the exact solution") {
  RunConfig c;
  c.problem = "alfven1d";
  const ErrorReport r = convergence_study(c, {10, 20, 40}, "rhov");
  REQUIRE(r.errors.size() == 3);
  REQUIRE(r.orders.size() == 2);
  CHECK(r.orders[1].l1 > 4.0);
  c.nx = 20;
  const RunResult one = run(c);
  CHECK(r.errors[1].l1 == (*exact_errors(one))[Qy].l1);
  const std::string text = format_report(r);
  CHECK(text.find("variable rhov") == 0);
  CHECK_THROWS_AS(convergence_study(RunConfig{.problem = "shock_tube"}, {10}, "rho"), DomainError);
  CHECK_THROWS_AS(convergence_study(c, {10}, "pressure"), DomainError);
}

TEST_CASE("summary records the conservation ledger") {
  RunConfig c;
  c.problem = "orszag_tang";
  c.nx = 16;
  c.max_steps = 2;
  c.out_dir = scratch("summary").string();
  const RunResult r = run(c);
  const std::string s = slurp(fs::path(c.out_dir) / "summary.txt");
  CHECK(s.find("problem orszag_tang") != std::string::npos);
  CHECK(s.find("mass_relative_change") != std::string::npos);
  CHECK(s.find("max_divB") != std::string::npos);
  CHECK(r.history.size() == 3);
  CHECK(std::abs(r.mass - r.mass0) <= 1e-12 * r.mass0);
}
