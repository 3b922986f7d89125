#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "allmach/run.hpp"

int main(int argc, char** argv) {
  using namespace allmach;
  CLI::App app{"Semi-implicit all-Mach MHD solver"};
  app.set_version_flag("--version", "allmach 1.0");

  std::string problem = "alfven1d", scheme = "imex", tableau = "si_sa3", tableau_file;
  std::string dt_law, out, variable = "rhov";
  int nx = 0, ny = 0, dump_every = 0, max_steps = 0, reference = 0;
  double cfl = 0.25, elliptic_tol = 1e-12;
  std::optional<double> eps, t_final;
  std::vector<int> converge;
  bool list_tableaux = false, list_problems = false;

  app.add_option("--problem", problem, "Problem name")->capture_default_str();
  app.add_option("--scheme", scheme, "imex | erk | erkc")->capture_default_str();
  app.add_option("--tableau", tableau, "IMEX tableau name")->capture_default_str();
  app.add_option("--tableau-file", tableau_file, "Tableau registry file")->check(CLI::ExistingFile);
  app.add_option("--nx", nx, "Nodes along x (0: problem default)")->check(CLI::NonNegativeNumber);
  app.add_option("--ny", ny, "Nodes along y (0: same as nx)")->check(CLI::NonNegativeNumber);
  app.add_option("--cfl", cfl, "CFL number")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--epsilon", eps, "Sonic Mach number override")->check(CLI::NonNegativeNumber);
  app.add_option("--t-final", t_final, "Final time override")->check(CLI::NonNegativeNumber);
  app.add_option("--dt-law", dt_law, "cfl | accuracy (dt ~ dx^(5/3))");
  app.add_option("--out", out, "Output directory");
  app.add_option("--dump-every", dump_every, "Dump fields every n steps")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--max-steps", max_steps, "Stop after n steps")->check(CLI::NonNegativeNumber);
  app.add_option("--elliptic-tol", elliptic_tol, "Relative pressure-solve tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--converge", converge, "Run a convergence study over these resolutions")
      ->delimiter(',');
  app.add_option("--variable", variable, "Variable for the convergence study")
      ->capture_default_str();
  app.add_option("--reference", reference, "Fine reference resolution (default: exact solution)");
  app.add_flag("--list-tableaux", list_tableaux, "Validate and list registry tableaux");
  app.add_flag("--list-problems", list_problems, "List problem names");
  CLI11_PARSE(app, argc, argv);

  try {
    if (list_problems) {
      for (const auto& n : problem_names()) std::cout << n << '\n';
      return 0;
    }
    if (list_tableaux) {
      auto reg = tableau_file.empty() ? parse_registry(kDefaultRegistry) : load_registry(tableau_file);
      reg.insert(reg.begin(), first_order_pair());
      for (const auto& t : reg) {
        const TableauReport r = validate_tableau(t);
        double res = 0.0;
        for (int q = 1; q <= r.order; ++q) res = std::max(res, r.residual[q]);
        std::printf("%-12s stages %d order %d stiffly_accurate %s residual %.2e\n",
                    t.name.c_str(), t.s, r.order, r.stiffly_accurate ? "yes" : "no", res);
      }
      return 0;
    }
    RunConfig c;
    c.problem = problem;
    c.scheme = parse_scheme(scheme);
    c.tableau = tableau;
    c.tableau_file = tableau_file;
    c.nx = nx;
    c.ny = ny;
    c.cfl = cfl;
    c.eps = eps;
    c.t_final = t_final;
    if (!dt_law.empty()) c.dt_law = parse_dt_law(dt_law);
    c.out_dir = out;
    c.dump_every = dump_every;
    c.max_steps = max_steps;
    c.elliptic_tol = elliptic_tol;

    if (!converge.empty()) {
      const ErrorReport rep = convergence_study(c, converge, variable, reference);
      std::cout << format_report(rep);
      return 0;
    }
    const RunResult r = run(c);
    std::printf("%s: %d steps to t = %.6g, max divB %.3e, min rho %.6g, min p %.6g\n",
                problem.c_str(), r.steps, r.t, r.max_div_b, r.min_rho, r.min_p);
    if (auto e = exact_errors(r)) {
      const int k = slot_index(variable);
      std::printf("%s error: L1 %.6e L2 %.6e Linf %.6e\n", variable.c_str(), (*e)[k].l1,
                  (*e)[k].l2, (*e)[k].linf);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
