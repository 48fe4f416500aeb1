#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace rfopf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  int var = 0;
  double coef = 0.0;
};

/// Affine expression sum(coef * x[var]) + constant.
struct LinExpr {
  std::vector<Term> terms;
  double constant = 0.0;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}
  static LinExpr var(int index, double coef = 1.0) {
    LinExpr e;
    e.terms.push_back({index, coef});
    return e;
  }

  LinExpr& add(int index, double coef) {
    terms.push_back({index, coef});
    return *this;
  }
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);

  double evaluate(std::span<const double> x) const;
  /// Merges duplicate indices and drops zero coefficients.
  void normalize();
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr a);
LinExpr operator*(LinExpr a, double s);

enum class Sense { LessEqual, Equal, GreaterEqual };

enum class RowTag {
  PowerBalanceP,
  PowerBalanceQ,
  VoltageDrop,
  AngleMin,
  AngleMax,
  RnfLink,      // g_k definition and big-M value rows
  RnfSwitch,    // omega <= beta, omega <= 1 - beta
  RnfBound,     // g_k <= z, h_0 <= z
  Facet,        // PA terminal facet rows
  OuterFacet,   // PR terminal outer row
  InnerCut,
  OuterCut,     // tangent rows added by dynamic outer-cut generation
  SocTangent,   // outer approximation of a registered exact cone
  Fixing,
  Other,
};

const char* to_string(RowTag tag);

enum class VarKind { Continuous, Binary };

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  double obj = 0.0;
  VarKind kind = VarKind::Continuous;
};

struct Row {
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  RowTag tag = RowTag::Other;
  int block = -1;  // owning cone block, -1 if none

  double activity(std::span<const double> x) const;
  /// Amount by which x violates the row (0 when satisfied).
  double violation(std::span<const double> x) const;
};

/// Sparse row-wise linear (mixed-binary) program: min c'x + c0.
class LinearModel {
 public:
  int add_variable(std::string name, double lb, double ub, double obj = 0.0,
                   VarKind kind = VarKind::Continuous);
  int add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, 0.0, VarKind::Binary); }

  /// Adds expr (sense) rhs; the expression constant is moved to the rhs.
  int add_row(LinExpr expr, Sense sense, double rhs, RowTag tag = RowTag::Other, int block = -1);

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const Variable& variable(int j) const { return vars_[static_cast<std::size_t>(j)]; }
  Variable& variable(int j) { return vars_[static_cast<std::size_t>(j)]; }
  const Row& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }

  void set_bounds(int j, double lb, double ub);
  void set_objective(int j, double c) { variable(j).obj = c; }
  double objective_constant() const { return obj_constant_; }
  void set_objective_constant(double c) { obj_constant_ = c; }

  double objective_value(std::span<const double> x) const;
  /// Largest row or bound violation of x.
  double max_violation(std::span<const double> x) const;
  std::vector<int> binaries() const;
  int count_rows(RowTag tag) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  double obj_constant_ = 0.0;
};

}  // namespace rfopf
