#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "rfopf/linear_model.hpp"

namespace rfopf {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  std::vector<double> x;      // structural values
  double objective = 0.0;     // includes the model's objective constant
  std::vector<double> duals;  // one per row
  long iterations = 0;
};

enum class BasisStatus : std::uint8_t { Basic, AtLower, AtUpper, Free };

/// Simplex basis snapshot: one status per structural column followed by one
/// per row (logical column). A snapshot taken on a smaller model can be
/// installed on a grown one; new columns are made nonbasic and new rows get
/// their logical basic.
struct Basis {
  std::vector<BasisStatus> columns;
  std::vector<BasisStatus> rows;
  bool empty() const { return columns.empty() && rows.empty(); }
};

struct LpOptions {
  long max_iterations = 0;  // 0: automatic
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Bounded-variable revised simplex (primal with a composite phase 1, dual
/// for warm starts) over a snapshot of a LinearModel. Integrality is ignored.
/// Anti-cycling: Bland's rule after 10 * rows consecutive degenerate pivots.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearModel& model, LpOptions options = {});
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  int num_columns() const;
  int num_rows() const;

  /// Overrides the bounds of structural column j for subsequent solves.
  void set_bounds(int j, double lb, double ub);
  void set_basis(const Basis& basis);
  Basis basis() const;

  LpSolution solve();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

LpSolution solve_lp(const LinearModel& model, const LpOptions& options = {});

}  // namespace rfopf
