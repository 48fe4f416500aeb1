#include "rfopf/dynamic_cuts.hpp"

#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "rfopf/rnf.hpp"

namespace rfopf {

namespace {

constexpr double kRegionTol = 1e-8;

struct Point3 {
  double x, y, z;
};

Point3 block_point(const SocBlock& b, std::span<const double> x) {
  return {b.x.evaluate(x), b.y.evaluate(x), b.z.evaluate(x)};
}

double relative_gap(const Point3& p, double eta) { return (p.x * p.x + p.y * p.y - p.z * p.z) / (p.z * p.z + eta); }

bool inner_holds(const TraceLevel& t, double z, int k, double slack) {
  const double c = std::cos(theta(k + 1)), s = std::sin(theta(k + 1));
  return z * c <= t.g * c + t.h * s + slack;
}

// Membership in the K-level terminal region, evaluated on the exact folds.
bool in_terminal_region(const Point3& p, TerminalKind kind, int K) {
  const auto tr = rnf_trace(p.x, p.y, p.z, K);
  const double s = kRegionTol * std::max(1.0, std::abs(p.z));
  for (const auto& t : tr)
    if (t.g > p.z + s) return false;
  if (tr[0].h > p.z + s) return false;
  const auto& last = tr.back();
  const double c = std::cos(theta(K)), sn = std::sin(theta(K));
  switch (kind) {
    case TerminalKind::PA:
      return std::abs(last.g - p.z * c) <= s && last.h <= p.z * sn + s;
    case TerminalKind::PR:
      return last.g * c + last.h * sn <= p.z + s && inner_holds(last, p.z, K, s);
    case TerminalKind::QPR:
      return inner_holds(last, p.z, K, s) && p.x * p.x + p.y * p.y <= p.z * p.z * (1.0 + 1e-7) + s;
  }
  return false;
}

// Angle index key on a common 2^-60 grid of pi.
long long angle_key(long long n, int level) { return n << (59 - level); }

}  // namespace

std::optional<CutSide> violation_check(const SocBlock& block, std::span<const double> x, TerminalKind kind,
                                       int k_max, double eps, double eta) {
  const Point3 p = block_point(block, x);
  const double rel = relative_gap(p, eta);
  if (std::abs(rel) <= eps + 1e-9) return std::nullopt;
  if (in_terminal_region(p, kind, k_max)) return std::nullopt;
  return rel < 0.0 ? CutSide::Inside : CutSide::Outside;
}

double outer_delta(int k) {
  const double t = std::tan(theta(k + 1));
  return t * t;
}

CutRequest add_inner_cut(LinearModel& model, SocBlock& block, std::span<const double> x, int k_max, double eta) {
  const Point3 p = block_point(block, x);
  const int k0 = block.depth;
  if (k0 >= k_max) throw std::logic_error("add_inner_cut: block already at maximum depth");
  const auto tr = rnf_trace(p.x, p.y, p.z, k_max);
  const double slack = 1e-12 * std::max(1.0, std::abs(p.z));
  int k1 = -1;
  for (int k = k0 + 1; k <= k_max; ++k)
    if (!inner_holds(tr[static_cast<std::size_t>(k)], p.z, k, -slack)) {
      k1 = k;
      break;
    }
  if (k1 < 0) throw std::logic_error("add_inner_cut: no violated inner row up to the maximum depth");

  CutRequest req;
  req.kind = CutRequest::Kind::Inner;
  req.block = block.id;
  req.level = k1;
  req.frame = k1;
  req.delta_rel = relative_gap(p, eta);
  const int rows = model.num_rows();
  extend_rnf(model, block, k1);
  append_inner_row(model, block, k1);
  req.stages_added = k1 - k0;
  req.rows_added = model.num_rows() - rows;
  block.rnf_added += req.stages_added;
  return req;
}

CutRequest add_outer_cut(LinearModel& model, SocBlock& block, std::span<const double> x, int k_max, double eta) {
  const Point3 p = block_point(block, x);
  const int k0 = block.depth;
  if (k0 < 0) throw std::logic_error("add_outer_cut: block has no R&F stages");
  const auto tr = rnf_trace(p.x, p.y, p.z, k0);
  const double g = tr.back().g, h = tr.back().h;
  const double delta = relative_gap(p, eta);

  // finer fans than k_max would cut into the k_max region
  int k_new = std::max(k0, k_max);
  if (k0 < k_max)
    for (int k = k0 + 1; k <= k_max; ++k)
      if (delta > outer_delta(k)) {
        k_new = k;
        break;
      }
  k_new = std::min(k_new, std::max(k0, k_max));

  const double step = theta(k_new);
  const double sector = theta(k0);
  const double t_star = std::atan2(h, g);
  long long n1 = static_cast<long long>(std::floor(t_star / step));
  const long long n_max = std::llround(sector / step);
  n1 = std::clamp(n1, 0LL, std::max(0LL, n_max - 1));

  CutRequest req;
  req.kind = CutRequest::Kind::Outer;
  req.block = block.id;
  req.level = k_new;
  req.frame = k0;
  req.psi1 = static_cast<double>(n1) * step;
  req.psi2 = static_cast<double>(n1 + 1) * step;
  req.delta_rel = delta;

  const auto& st = block.stages[static_cast<std::size_t>(k0)];
  const double slack = 1e-9 * std::max(1.0, std::abs(p.z));
  struct Cand {
    long long n;
    double psi;
    bool violated;
  };
  std::vector<Cand> cands;
  bool any = false;
  for (long long n : {n1, n1 + 1}) {
    const double psi = static_cast<double>(n) * step;
    const bool v = g * std::cos(psi) + h * std::sin(psi) > p.z + slack;
    any = any || v;
    cands.push_back({n, psi, v});
  }
  if (!any) return req;
  for (const auto& c : cands) {
    const std::pair<int, long long> key{k0, angle_key(c.n, k_new)};
    if (block.outer_angles.count(key)) continue;
    LinExpr row;
    row.add(st.g, std::cos(c.psi)).add(st.h, std::sin(c.psi));
    model.add_row(row - block.z, Sense::LessEqual, 0.0, RowTag::OuterCut, block.id);
    block.outer_angles.insert(key);
    ++req.rows_added;
  }
  block.outer_cuts += req.rows_added;
  return req;
}

std::string CutRequest::to_json() const {
  nlohmann::json j{{"block", block},
                   {"kind", kind == Kind::Inner ? "inner" : "outer"},
                   {"level", level},
                   {"frame", frame},
                   {"stages", stages_added},
                   {"rows", rows_added},
                   {"delta_rel", delta_rel}};
  if (kind == Kind::Outer) {
    j["psi1"] = psi1;
    j["psi2"] = psi2;
  }
  return j.dump();
}

TerminalKind terminal_kind(Method method) {
  switch (method) {
    case Method::PA: return TerminalKind::PA;
    case Method::QPR:
    case Method::DQPR: return TerminalKind::QPR;
    default: return TerminalKind::PR;
  }
}

BfmModel build_relaxation(const NetworkCase& c, Method method, int K) {
  BfmModel bm = build_base_model(c);
  for (auto& b : bm.blocks) {
    if (method == Method::SOCP) {
      b.exact_soc = true;
      continue;
    }
    extend_rnf(bm.model, b, K);
    append_terminal(bm.model, b, K, terminal_kind(method));
  }
  return bm;
}

double default_eps(const SolveConfig& config) {
  if (config.eps) return *config.eps;
  if (config.method == Method::SOCP) return 0.0;
  return tolerance(terminal_kind(config.method), config.k_max);
}

LazyCallback dynamic_callback(TerminalKind kind, int k_max, double eps, double eta, std::vector<CutRequest>* log) {
  return [=](LinearModel& model, std::vector<SocBlock>& blocks, std::span<const double> x) {
    bool added = false;
    for (auto& b : blocks) {
      const auto side = violation_check(b, x, kind, k_max, eps, eta);
      if (!side) continue;
      CutRequest req;
      if (*side == CutSide::Inside) {
        if (b.depth >= k_max) continue;
        req = add_inner_cut(model, b, x, k_max, eta);
      } else {
        req = add_outer_cut(model, b, x, k_max, eta);
      }
      if (req.rows_added > 0) {
        added = true;
        if (log) log->push_back(req);
      }
    }
    return added;
  };
}

BncResult dynamic_solve(BfmModel& bm, const SolveConfig& config, std::vector<CutRequest>* log,
                        const std::optional<std::vector<double>>& warm_start) {
  if (config.method != Method::DPR && config.method != Method::DQPR)
    throw std::invalid_argument("dynamic_solve: method must be dpr or dqpr");
  if (config.k_init < 0 || config.k_init > config.k_max) throw std::invalid_argument("dynamic_solve: need 0 <= k_init <= k_max");
  const auto cb = dynamic_callback(terminal_kind(config.method), config.k_max, default_eps(config), config.eta, log);
  return branch_and_cut(bm.model, bm.blocks, cb, config, warm_start);
}

BncResult dynamic_solve(const NetworkCase& c, const SolveConfig& config, std::vector<CutRequest>* log) {
  BfmModel bm = build_relaxation(c, config.method, config.k_init);
  return dynamic_solve(bm, config, log);
}

}  // namespace rfopf
