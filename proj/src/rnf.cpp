#include "rfopf/rnf.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rfopf {

double theta(int k) {
  if (k < 0) throw std::invalid_argument("theta: negative level");
  return std::ldexp(std::numbers::pi, -(k + 1));
}

namespace {

// Y = |X| with X = M (w1 - w2), Y = M (w1 + w2), w1 <= beta, w2 <= 1 - beta.
AbsEncoding encode_abs(LinearModel& m, const LinExpr& X, int Y, double M, const std::string& tag, int block) {
  AbsEncoding e;
  e.beta = m.add_binary("beta_" + tag);
  e.omega1 = m.add_variable("w1_" + tag, 0.0, 1.0);
  e.omega2 = m.add_variable("w2_" + tag, 0.0, 1.0);
  LinExpr link = X;
  link.add(e.omega1, -M).add(e.omega2, M);
  m.add_row(link, Sense::Equal, 0.0, RowTag::RnfLink, block);
  LinExpr val = LinExpr::var(Y);
  val.add(e.omega1, -M).add(e.omega2, -M);
  m.add_row(val, Sense::Equal, 0.0, RowTag::RnfLink, block);
  m.add_row(LinExpr::var(e.omega1) - LinExpr::var(e.beta), Sense::LessEqual, 0.0, RowTag::RnfSwitch, block);
  m.add_row(LinExpr::var(e.omega2) + LinExpr::var(e.beta), Sense::LessEqual, 1.0, RowTag::RnfSwitch, block);
  return e;
}

int block_id(const SocBlock& b) { return b.id; }

std::string block_tag(const SocBlock& b) {
  return std::string(b.kind == ConeKind::Power ? "s" : "c") + std::to_string(b.branch + 1);
}

}  // namespace

const RnfStage& append_rnf_stage(LinearModel& m, SocBlock& b, int k) {
  if (k != b.depth + 1) throw std::logic_error("append_rnf_stage: level " + std::to_string(k) + " does not follow depth " + std::to_string(b.depth));
  const int id = block_id(b);
  const double M = b.big_m;
  const std::string tag = block_tag(b) + "_" + std::to_string(k);
  RnfStage st;
  st.level = k;
  st.first_row = m.num_rows();
  st.g = m.add_variable("g_" + tag, 0.0, b.z_max);
  st.h = m.add_variable("h_" + tag, 0.0, b.z_max);
  if (k == 0) {
    st.folds.push_back(encode_abs(m, b.x, st.g, M, tag + "x", id));
    st.folds.push_back(encode_abs(m, b.y, st.h, M, tag + "y", id));
    m.add_row(LinExpr::var(st.g) - b.z, Sense::LessEqual, 0.0, RowTag::RnfBound, id);
    m.add_row(LinExpr::var(st.h) - b.z, Sense::LessEqual, 0.0, RowTag::RnfBound, id);
  } else {
    const auto& prev = b.stages.back();
    const double c = std::cos(theta(k)), s = std::sin(theta(k));
    LinExpr rot;
    rot.add(st.g, 1.0).add(prev.g, -c).add(prev.h, -s);
    m.add_row(rot, Sense::Equal, 0.0, RowTag::RnfLink, id);
    LinExpr X;
    X.add(prev.g, -s).add(prev.h, c);
    st.folds.push_back(encode_abs(m, X, st.h, M, tag, id));
    m.add_row(LinExpr::var(st.g) - b.z, Sense::LessEqual, 0.0, RowTag::RnfBound, id);
  }
  st.end_row = m.num_rows();
  b.stages.push_back(std::move(st));
  b.depth = k;
  return b.stages.back();
}

void extend_rnf(LinearModel& m, SocBlock& b, int k) {
  while (b.depth < k) append_rnf_stage(m, b, b.depth + 1);
}

int append_inner_row(LinearModel& m, SocBlock& b, int k, RowTag tag) {
  if (k < 0 || k > b.depth) throw std::logic_error("append_inner_row: level not encoded");
  const auto& st = b.stages[static_cast<std::size_t>(k)];
  const double c = std::cos(theta(k + 1)), s = std::sin(theta(k + 1));
  LinExpr e = c * b.z;
  e.add(st.g, -c).add(st.h, -s);
  b.inner_levels.push_back(k);
  return m.add_row(e, Sense::LessEqual, 0.0, tag, block_id(b));
}

void append_terminal(LinearModel& m, SocBlock& b, int K, TerminalKind kind) {
  if (b.depth != K) throw std::logic_error("append_terminal: block depth differs from K");
  if (kind == TerminalKind::PA && K < 1) throw std::invalid_argument("PA requires K >= 1");
  const int id = block_id(b);
  const auto& st = b.stages[static_cast<std::size_t>(K)];
  const double c = std::cos(theta(K)), s = std::sin(theta(K));
  switch (kind) {
    case TerminalKind::PA:
      m.add_row(LinExpr::var(st.g) - c * b.z, Sense::Equal, 0.0, RowTag::Facet, id);
      m.add_row(LinExpr::var(st.h) - s * b.z, Sense::LessEqual, 0.0, RowTag::Facet, id);
      break;
    case TerminalKind::PR: {
      m.add_row(LinExpr::var(st.g) - b.z, Sense::LessEqual, 0.0, RowTag::OuterFacet, id);
      LinExpr outer;
      outer.add(st.g, c).add(st.h, s);
      m.add_row(outer - b.z, Sense::LessEqual, 0.0, RowTag::OuterFacet, id);
      append_inner_row(m, b, K, RowTag::Facet);
      break;
    }
    case TerminalKind::QPR:
      append_inner_row(m, b, K, RowTag::Facet);
      b.exact_soc = true;
      break;
  }
  b.has_terminal = true;
  b.terminal = kind;
  b.terminal_level = K;
}

double tolerance(TerminalKind kind, int K) {
  if (K < 0) throw std::invalid_argument("tolerance: negative level");
  switch (kind) {
    case TerminalKind::PA: {
      if (K < 1) throw std::invalid_argument("PA requires K >= 1");
      const double s = std::sin(theta(K));
      return s * s;
    }
    case TerminalKind::PR: {
      const double t = std::tan(theta(K + 1));
      return t * t;
    }
    case TerminalKind::QPR: {
      const double s = std::sin(theta(K + 1));
      return s * s;
    }
  }
  return 0.0;
}

std::vector<TraceLevel> rnf_trace(double x, double y, double /*z*/, int K) {
  std::vector<TraceLevel> out;
  TraceLevel t0;
  t0.g = std::abs(x);
  t0.h = std::abs(y);
  t0.beta = {x >= 0.0 ? 1 : 0, y >= 0.0 ? 1 : 0};
  out.push_back(t0);
  for (int k = 1; k <= K; ++k) {
    const auto& p = out.back();
    const double c = std::cos(theta(k)), s = std::sin(theta(k));
    const double X = -s * p.g + c * p.h;
    TraceLevel t;
    t.g = c * p.g + s * p.h;
    t.h = std::abs(X);
    t.beta = {X >= 0.0 ? 1 : 0};
    out.push_back(std::move(t));
  }
  return out;
}

void fill_rnf_values(const SocBlock& b, std::vector<double>& point) {
  if (b.depth < 0) return;
  const double x = b.x.evaluate(point), y = b.y.evaluate(point), z = b.z.evaluate(point);
  const auto tr = rnf_trace(x, y, z, b.depth);
  const double M = b.big_m;
  auto set_fold = [&](const AbsEncoding& e, double X) {
    const bool pos = X >= 0.0;
    point[static_cast<std::size_t>(e.beta)] = pos ? 1.0 : 0.0;
    point[static_cast<std::size_t>(e.omega1)] = pos ? X / M : 0.0;
    point[static_cast<std::size_t>(e.omega2)] = pos ? 0.0 : -X / M;
  };
  for (std::size_t k = 0; k < b.stages.size(); ++k) {
    const auto& st = b.stages[k];
    point[static_cast<std::size_t>(st.g)] = tr[k].g;
    point[static_cast<std::size_t>(st.h)] = tr[k].h;
    if (k == 0) {
      set_fold(st.folds[0], x);
      set_fold(st.folds[1], y);
    } else {
      const double c = std::cos(theta(static_cast<int>(k))), s = std::sin(theta(static_cast<int>(k)));
      set_fold(st.folds[0], -s * tr[k - 1].g + c * tr[k - 1].h);
    }
  }
}

bool direct_pyramid_oracle(double x, double y, double z, int K, double tol) {
  if (z < -tol) return false;
  const double scale = std::max(1.0, std::abs(z));
  if (z <= tol) return std::hypot(x, y) <= tol * scale;
  const long N = 1L << (K + 1);
  for (long n = 0; n < N; ++n) {
    const double a0 = 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(N);
    const double a1 = 2.0 * std::numbers::pi * static_cast<double>(n + 1) / static_cast<double>(N);
    // (x, y) = l0 * z v_n + l1 * z v_{n+1}
    const double u0 = z * std::cos(a0), v0 = z * std::sin(a0);
    const double u1 = z * std::cos(a1), v1 = z * std::sin(a1);
    const double det = u0 * v1 - u1 * v0;
    const double l0 = (x * v1 - y * u1) / det;
    const double l1 = (u0 * y - v0 * x) / det;
    if (l0 >= -tol && l1 >= -tol && std::abs(l0 + l1 - 1.0) <= tol) return true;
  }
  return false;
}

}  // namespace rfopf
