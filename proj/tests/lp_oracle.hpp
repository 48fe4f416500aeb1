#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "rfopf/linear_model.hpp"

namespace oracle {

// Brute-force LP optimum over all vertices of a bounded polytope: every
// choice of n linearly independent active constraints (rows or finite
// bounds) is solved and kept if feasible. Exponential; tiny models only.
inline std::optional<double> vertex_enumeration(const rfopf::LinearModel& model, double tol = 1e-9) {
  const int n = model.num_vars();
  struct Plane {
    Eigen::VectorXd a;
    double b;
  };
  std::vector<Plane> planes;
  for (const auto& r : model.rows()) {
    Plane p{Eigen::VectorXd::Zero(n), r.rhs};
    for (const auto& t : r.terms) p.a[t.var] += t.coef;
    planes.push_back(p);
  }
  for (int j = 0; j < n; ++j)
    for (double b : {model.variable(j).lb, model.variable(j).ub}) {
      if (!std::isfinite(b)) continue;
      Plane p{Eigen::VectorXd::Zero(n), b};
      p.a[j] = 1.0;
      planes.push_back(p);
    }
  std::optional<double> best;
  std::vector<int> pick;
  const int total = static_cast<int>(planes.size());
  auto visit = [&]() {
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (int k = 0; k < n; ++k) {
      A.row(k) = planes[static_cast<std::size_t>(pick[static_cast<std::size_t>(k)])].a.transpose();
      b[k] = planes[static_cast<std::size_t>(pick[static_cast<std::size_t>(k)])].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < n) return;
    Eigen::VectorXd x = lu.solve(b);
    std::vector<double> xv(x.data(), x.data() + n);
    if (model.max_violation(xv) > tol) return;
    const double obj = model.objective_value(xv);
    if (!best || obj < *best) best = obj;
  };
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(pick.size()) == n) {
      visit();
      return;
    }
    for (int i = start; i < total; ++i) {
      pick.push_back(i);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  return best;
}

// MILP optimum over all binary assignments, each continuous part by vertex
// enumeration.
inline std::optional<double> enumerate_milp(const rfopf::LinearModel& m) {
  const auto bins = m.binaries();
  std::optional<double> best;
  for (unsigned mask = 0; mask < (1u << bins.size()); ++mask) {
    rfopf::LinearModel fixed = m;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const double v = (mask >> i) & 1u ? 1.0 : 0.0;
      fixed.set_bounds(bins[i], v, v);
    }
    if (auto v = vertex_enumeration(fixed, 1e-8); v && (!best || *v < *best)) best = v;
  }
  return best;
}

// Random feasible bounded LP: box bounds, mixed row senses, built around an
// interior point so it is always feasible.
inline rfopf::LinearModel random_lp(std::mt19937& rng, int n, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> sense(0, 5);
  rfopf::LinearModel model;
  std::vector<double> x0;
  for (int j = 0; j < n; ++j) {
    const double lo = -1.0 - 2.0 * std::abs(u(rng));
    const double hi = 1.0 + 2.0 * std::abs(u(rng));
    model.add_variable("x" + std::to_string(j), lo, hi, u(rng) * 5.0);
    x0.push_back(0.5 * u(rng));
  }
  for (int i = 0; i < m; ++i) {
    rfopf::LinExpr e;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (std::abs(u(rng)) < 0.3) continue;
      const double c = u(rng) * 3.0;
      e.add(j, c);
      act += c * x0[static_cast<std::size_t>(j)];
    }
    if (e.terms.empty()) e.add(i % n, 1.0), act = x0[static_cast<std::size_t>(i % n)];
    const int s = sense(rng);
    if (s == 0)
      model.add_row(e, rfopf::Sense::Equal, act);
    else if (s <= 2)
      model.add_row(e, rfopf::Sense::GreaterEqual, act - std::abs(u(rng)));
    else
      model.add_row(e, rfopf::Sense::LessEqual, act + std::abs(u(rng)));
  }
  return model;
}

}  // namespace oracle
