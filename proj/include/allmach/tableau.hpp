#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "allmach/core.hpp"

namespace allmach {

// Double Butcher tableau of an IMEX Runge-Kutta pair; matrices row-major.
struct ButcherPair {
  std::string name;
  int s = 0;
  std::vector<double> at, bt;  // explicit part
  std::vector<double> a, b;    // implicit part
  std::vector<double> ct, c;
  bool stiffly_accurate = false;

  double At(int i, int j) const { return at[i * s + j]; }
  double A(int i, int j) const { return a[i * s + j]; }
};

inline ButcherPair make_butcher_pair(std::string name, int s, std::vector<double> at,
                                     std::vector<double> bt, std::vector<double> a,
                                     std::vector<double> b) {
  if (s < 1) throw DomainError("tableau needs at least one stage");
  const std::size_t n = static_cast<std::size_t>(s);
  if (at.size() != n * n || a.size() != n * n || bt.size() != n || b.size() != n)
    throw DomainError("tableau dimensions do not match s");
  ButcherPair t{std::move(name), s, std::move(at), std::move(bt), std::move(a), std::move(b),
                {}, {}, false};
  t.ct.assign(n, 0.0);
  t.c.assign(n, 0.0);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      t.ct[i] += t.At(i, j);
      t.c[i] += t.A(i, j);
    }
  t.stiffly_accurate = true;
  for (int j = 0; j < s; ++j)
    if (t.b[j] != t.A(s - 1, j)) t.stiffly_accurate = false;
  return t;
}

// Explicit forward Euler paired with backward Euler: U_E = U^n, U_I = U^{n+1}.
inline ButcherPair first_order_pair() {
  return make_butcher_pair("first_order", 1, {0.0}, {1.0}, {1.0}, {1.0});
}

struct TableauReport {
  bool valid = true;        // structural checks passed
  bool stiffly_accurate = false;
  int order = 0;            // highest order <= 3 whose conditions all hold
  double residual[4] = {0, 0, 0, 0};
  std::vector<std::string> violations;
};

inline TableauReport validate_tableau(const ButcherPair& t, double tol = 1e-12) {
  TableauReport r;
  const int s = t.s;
  auto fail = [&](std::string msg) {
    r.valid = false;
    r.violations.push_back(std::move(msg));
  };
  if (s < 1 || t.at.size() != std::size_t(s * s) || t.a.size() != std::size_t(s * s) ||
      t.bt.size() != std::size_t(s) || t.b.size() != std::size_t(s) ||
      t.ct.size() != std::size_t(s) || t.c.size() != std::size_t(s)) {
    fail("dimension mismatch");
    return r;
  }
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      if (j >= i && t.At(i, j) != 0.0)
        fail("explicit matrix not strictly lower triangular at (" + std::to_string(i + 1) + "," +
             std::to_string(j + 1) + ")");
      if (j > i && t.A(i, j) != 0.0)
        fail("implicit matrix not lower triangular at (" + std::to_string(i + 1) + "," +
             std::to_string(j + 1) + ")");
    }
  for (int i = 0; i < s; ++i) {
    if (t.A(i, i) < 0.0) fail("negative implicit diagonal in row " + std::to_string(i + 1));
    double sc = 0, sct = 0;
    for (int j = 0; j < s; ++j) {
      sc += t.A(i, j);
      sct += t.At(i, j);
    }
    if (std::abs(sc - t.c[i]) > tol) fail("node c inconsistent in row " + std::to_string(i + 1));
    if (std::abs(sct - t.ct[i]) > tol)
      fail("node c~ inconsistent in row " + std::to_string(i + 1));
  }
  bool sa = true;
  for (int j = 0; j < s; ++j)
    if (std::abs(t.b[j] - t.A(s - 1, j)) > tol) sa = false;
  r.stiffly_accurate = sa;
  if (sa != t.stiffly_accurate) fail("stiffly-accurate flag does not match b versus last row of A");

  // Additive order conditions with weights w in {b, b~}, nodes x, y in {c, c~},
  // matrices M in {A, A~}.
  const std::vector<double>* ws[2] = {&t.b, &t.bt};
  const std::vector<double>* xs[2] = {&t.c, &t.ct};
  const char* wn[2] = {"b", "b~"};
  const char* xn[2] = {"c", "c~"};
  const char* mn[2] = {"A", "A~"};
  auto mat = [&](int k, int i, int j) { return k == 0 ? t.A(i, j) : t.At(i, j); };
  auto note = [&](int order, double res, const std::string& what) {
    r.residual[order] = std::max(r.residual[order], res);
    if (res > tol) r.violations.push_back("order " + std::to_string(order) + ": " + what);
  };
  for (int wi = 0; wi < 2; ++wi) {
    const auto& w = *ws[wi];
    double s1 = 0;
    for (int i = 0; i < s; ++i) s1 += w[i];
    note(1, std::abs(s1 - 1.0), std::string("sum ") + wn[wi] + " = 1");
    for (int xi = 0; xi < 2; ++xi) {
      double s2 = 0;
      for (int i = 0; i < s; ++i) s2 += w[i] * (*xs[xi])[i];
      note(2, std::abs(s2 - 0.5), std::string(wn[wi]) + "." + xn[xi] + " = 1/2");
      for (int yi = xi; yi < 2; ++yi) {
        double s3 = 0;
        for (int i = 0; i < s; ++i) s3 += w[i] * (*xs[xi])[i] * (*xs[yi])[i];
        note(3, std::abs(s3 - 1.0 / 3.0),
             std::string(wn[wi]) + "." + xn[xi] + xn[yi] + " = 1/3");
      }
      for (int mi = 0; mi < 2; ++mi) {
        double s3 = 0;
        for (int i = 0; i < s; ++i)
          for (int j = 0; j < s; ++j) s3 += w[i] * mat(mi, i, j) * (*xs[xi])[j];
        note(3, std::abs(s3 - 1.0 / 6.0),
             std::string(wn[wi]) + "." + mn[mi] + "." + xn[xi] + " = 1/6");
      }
    }
  }
  r.order = 0;
  for (int p = 1; p <= 3; ++p) {
    if (r.residual[p] > tol) break;
    r.order = p;
  }
  return r;
}

// Registry text: blocks of
//   name <id>
//   s <stages>
//   s rows of A~, one row b~, s rows of A, one row b
// with '#' comments and blank lines ignored.
inline std::vector<ButcherPair> parse_registry(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (!tok.empty()) lines.push_back(std::move(tok));
  }
  std::vector<ButcherPair> out;
  std::size_t k = 0;
  auto row = [&](int s) {
    if (k >= lines.size()) throw DomainError("tableau registry truncated");
    const auto& t = lines[k++];
    if (static_cast<int>(t.size()) != s) throw DomainError("tableau row has wrong length");
    std::vector<double> v;
    for (const auto& x : t) {
      std::size_t used = 0;
      v.push_back(std::stod(x, &used));
      if (used != x.size()) throw DomainError("bad number in tableau registry: " + x);
    }
    return v;
  };
  while (k < lines.size()) {
    if (lines[k].size() != 2 || lines[k][0] != "name")
      throw DomainError("tableau block must start with 'name <id>'");
    std::string name = lines[k++][1];
    if (k >= lines.size() || lines[k].size() != 2 || lines[k][0] != "s")
      throw DomainError("tableau '" + name + "' is missing 's <stages>'");
    const int s = std::stoi(lines[k++][1]);
    if (s < 1) throw DomainError("tableau '" + name + "' has no stages");
    std::vector<double> at, bt, a, b;
    for (int i = 0; i < s; ++i)
      for (double x : row(s)) at.push_back(x);
    bt = row(s);
    for (int i = 0; i < s; ++i)
      for (double x : row(s)) a.push_back(x);
    b = row(s);
    ButcherPair t = make_butcher_pair(name, s, at, bt, a, b);
    const TableauReport rep = validate_tableau(t);
    if (!rep.valid) throw DomainError("tableau '" + name + "' invalid: " + rep.violations.front());
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<ButcherPair> load_registry(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open tableau registry " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_registry(ss.str());
}

// Shipped registry (same text as data/tableaux.txt).
inline constexpr std::string_view kDefaultRegistry = R"(# IMEX pairs: s rows of A~, b~, s rows of A, b
name si_sa3
s 4
0 0 0 0
0.52696151930107805923 0 0 0
0.279478410449688107 -0.092052280199164446084 0 0
0.27456578446430556329 0.58218894 -0.23676269 0
0.5468657656662814968 0.56099783562340829579 -0.62707277476372009684 0.51920917347403030425
0.51920917347403030425 0 0 0
-0.16092522699656877731 0.51920917347403030425 0 0
-0.27632936 0.56108335390999840948 0.51920917347403030425 0
0.5468657656662814968 0.56099783562340829579 -0.62707277476372009684 0.51920917347403030425
0.5468657656662814968 0.56099783562340829579 -0.62707277476372009684 0.51920917347403030425
)";

inline ButcherPair find_tableau(const std::string& name, const std::string& registry_path = {}) {
  if (name == "first_order") return first_order_pair();
  const auto reg = registry_path.empty() ? parse_registry(kDefaultRegistry)
                                         : load_registry(registry_path);
  for (const auto& t : reg)
    if (t.name == name) return t;
  throw DomainError("unknown tableau '" + name + "'");
}

}  // namespace allmach
