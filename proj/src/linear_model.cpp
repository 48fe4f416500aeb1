#include "rfopf/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfopf {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& t : o.terms) terms.push_back({t.var, -t.coef});
  constant -= o.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& t : terms) t.coef *= s;
  constant *= s;
  return *this;
}

double LinExpr::evaluate(std::span<const double> x) const {
  double v = constant;
  for (const auto& t : terms) v += t.coef * x[static_cast<std::size_t>(t.var)];
  return v;
}

void LinExpr::normalize() {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  terms = std::move(merged);
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }
LinExpr operator*(LinExpr a, double s) { return a *= s; }

const char* to_string(RowTag tag) {
  switch (tag) {
    case RowTag::PowerBalanceP: return "power_balance_p";
    case RowTag::PowerBalanceQ: return "power_balance_q";
    case RowTag::VoltageDrop: return "voltage_drop";
    case RowTag::AngleMin: return "angle_min";
    case RowTag::AngleMax: return "angle_max";
    case RowTag::RnfLink: return "rnf_link";
    case RowTag::RnfSwitch: return "rnf_switch";
    case RowTag::RnfBound: return "rnf_bound";
    case RowTag::Facet: return "facet";
    case RowTag::OuterFacet: return "outer_facet";
    case RowTag::InnerCut: return "inner_cut";
    case RowTag::OuterCut: return "outer_cut";
    case RowTag::SocTangent: return "soc_tangent";
    case RowTag::Fixing: return "fixing";
    case RowTag::Other: return "other";
  }
  return "other";
}

double Row::activity(std::span<const double> x) const {
  double v = 0.0;
  for (const auto& t : terms) v += t.coef * x[static_cast<std::size_t>(t.var)];
  return v;
}

double Row::violation(std::span<const double> x) const {
  const double a = activity(x);
  switch (sense) {
    case Sense::LessEqual: return std::max(0.0, a - rhs);
    case Sense::GreaterEqual: return std::max(0.0, rhs - a);
    case Sense::Equal: return std::abs(a - rhs);
  }
  return 0.0;
}

int LinearModel::add_variable(std::string name, double lb, double ub, double obj, VarKind kind) {
  if (lb > ub) throw std::invalid_argument("variable " + name + ": lb > ub");
  vars_.push_back({std::move(name), lb, ub, obj, kind});
  return num_vars() - 1;
}

int LinearModel::add_row(LinExpr expr, Sense sense, double rhs, RowTag tag, int block) {
  expr.normalize();
  for (const auto& t : expr.terms)
    if (t.var < 0 || t.var >= num_vars()) throw std::out_of_range("row references unknown variable");
  rows_.push_back({std::move(expr.terms), sense, rhs - expr.constant, tag, block});
  return num_rows() - 1;
}

void LinearModel::set_bounds(int j, double lb, double ub) {
  auto& v = variable(j);
  v.lb = lb;
  v.ub = ub;
}

double LinearModel::objective_value(std::span<const double> x) const {
  double v = obj_constant_;
  for (std::size_t j = 0; j < vars_.size(); ++j) v += vars_[j].obj * x[j];
  return v;
}

double LinearModel::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max(worst, vars_[j].lb - x[j]);
    worst = std::max(worst, x[j] - vars_[j].ub);
  }
  for (const auto& r : rows_) worst = std::max(worst, r.violation(x));
  return worst;
}

std::vector<int> LinearModel::binaries() const {
  std::vector<int> out;
  for (int j = 0; j < num_vars(); ++j)
    if (variable(j).kind == VarKind::Binary) out.push_back(j);
  return out;
}

int LinearModel::count_rows(RowTag tag) const {
  return static_cast<int>(std::count_if(rows_.begin(), rows_.end(), [tag](const Row& r) { return r.tag == tag; }));
}

}  // namespace rfopf
