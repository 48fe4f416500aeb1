#include "rfopf/warm_lns.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <json.hpp>
#include <map>
#include <numbers>
#include <stdexcept>

#include "rfopf/dynamic_cuts.hpp"
#include "rfopf/rnf.hpp"

namespace rfopf {

namespace {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
constexpr Complex kJ{0.0, 1.0};

Complex series_admittance(const Branch& br) { return 1.0 / Complex(br.r, br.x); }

CMat build_ybus(const NetworkCase& c) {
  const auto n = static_cast<Eigen::Index>(c.buses.size());
  CMat Y = CMat::Zero(n, n);
  for (const auto& br : c.branches) {
    if (!br.in_service) continue;
    const auto i = static_cast<Eigen::Index>(c.bus_index(br.from_bus));
    const auto j = static_cast<Eigen::Index>(c.bus_index(br.to_bus));
    const Complex ys = series_admittance(br);
    const Complex ych = kJ * (br.b_c / 2.0);
    Y(i, i) += (ys + ych) / (br.tap * br.tap);
    Y(j, j) += ys + ych;
    Y(i, j) -= ys / br.tap;
    Y(j, i) -= ys / br.tap;
  }
  for (Eigen::Index i = 0; i < n; ++i) Y(i, i) += Complex(c.buses[static_cast<std::size_t>(i)].g_s, c.buses[static_cast<std::size_t>(i)].b_s);
  return Y;
}

}  // namespace

PfSolution newton_power_flow(const NetworkCase& c, const std::vector<double>& p_g, const std::vector<double>& v_set,
                             const PfOptions& options) {
  const std::size_t nb = c.buses.size(), ng = c.generators.size();
  if (p_g.size() != ng) throw std::invalid_argument("newton_power_flow: dispatch size differs from generator count");
  if (v_set.size() != nb) throw std::invalid_argument("newton_power_flow: voltage setpoints size differs from bus count");
  PfSolution out;

  std::vector<char> gen_bus(nb, 0);
  int slack = -1;
  double best = -kInf;
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& gen = c.generators[g];
    if (!gen.status) continue;
    const auto b = c.bus_index(gen.bus);
    gen_bus[b] = 1;
    if (gen.p_max > best) {
      best = gen.p_max;
      slack = static_cast<int>(b);
    }
  }
  if (options.slack_bus) slack = *options.slack_bus;
  if (slack < 0) {
    out.message = "no in-service generator";
    return out;
  }
  out.slack_bus = slack;

  std::vector<int> pv, pq;
  for (std::size_t i = 0; i < nb; ++i) {
    if (static_cast<int>(i) == slack) continue;
    (gen_bus[i] ? pv : pq).push_back(static_cast<int>(i));
  }
  std::vector<int> pvpq = pv;
  pvpq.insert(pvpq.end(), pq.begin(), pq.end());

  Eigen::VectorXd p_spec = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
  Eigen::VectorXd q_spec = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
  for (std::size_t i = 0; i < nb; ++i) {
    p_spec[static_cast<Eigen::Index>(i)] = -c.buses[i].p_d;
    q_spec[static_cast<Eigen::Index>(i)] = -c.buses[i].q_d;
  }
  for (std::size_t g = 0; g < ng; ++g)
    if (c.generators[g].status) p_spec[static_cast<Eigen::Index>(c.bus_index(c.generators[g].bus))] += p_g[g];

  const CMat Y = build_ybus(c);
  Eigen::VectorXd vm(static_cast<Eigen::Index>(nb)), va = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
  for (std::size_t i = 0; i < nb; ++i) vm[static_cast<Eigen::Index>(i)] = gen_bus[i] ? v_set[i] : 1.0;

  const auto npvpq = static_cast<Eigen::Index>(pvpq.size()), npq = static_cast<Eigen::Index>(pq.size());
  auto voltages = [&]() {
    CVec V(static_cast<Eigen::Index>(nb));
    for (Eigen::Index i = 0; i < V.size(); ++i) V[i] = std::polar(vm[i], va[i]);
    return V;
  };
  auto mismatch = [&](const CVec& V) {
    const CVec S = V.cwiseProduct((Y * V).conjugate());
    Eigen::VectorXd F(npvpq + npq);
    for (Eigen::Index k = 0; k < npvpq; ++k) F[k] = S[pvpq[static_cast<std::size_t>(k)]].real() - p_spec[pvpq[static_cast<std::size_t>(k)]];
    for (Eigen::Index k = 0; k < npq; ++k) F[npvpq + k] = S[pq[static_cast<std::size_t>(k)]].imag() - q_spec[pq[static_cast<std::size_t>(k)]];
    return F;
  };

  CVec V = voltages();
  Eigen::VectorXd F = mismatch(V);
  double norm = F.size() ? F.lpNorm<Eigen::Infinity>() : 0.0;
  while (norm > options.tolerance) {
    if (out.iterations >= options.max_iterations) {
      out.message = "no convergence within " + std::to_string(options.max_iterations) + " iterations";
      break;
    }
    const CVec I = Y * V;
    const CVec Vn = V.cwiseQuotient(V.cwiseAbs().cast<Complex>());
    const CMat dS_dVa = kJ * V.asDiagonal() * (CMat(I.asDiagonal()) - Y * V.asDiagonal()).conjugate();
    const CMat dS_dVm = CMat(V.asDiagonal()) * (Y * Vn.asDiagonal()).conjugate() + CMat(I.conjugate().cwiseProduct(Vn).asDiagonal());
    Eigen::MatrixXd J(npvpq + npq, npvpq + npq);
    for (Eigen::Index r = 0; r < npvpq; ++r) {
      const int a = pvpq[static_cast<std::size_t>(r)];
      for (Eigen::Index k = 0; k < npvpq; ++k) J(r, k) = dS_dVa(a, pvpq[static_cast<std::size_t>(k)]).real();
      for (Eigen::Index k = 0; k < npq; ++k) J(r, npvpq + k) = dS_dVm(a, pq[static_cast<std::size_t>(k)]).real();
    }
    for (Eigen::Index r = 0; r < npq; ++r) {
      const int a = pq[static_cast<std::size_t>(r)];
      for (Eigen::Index k = 0; k < npvpq; ++k) J(npvpq + r, k) = dS_dVa(a, pvpq[static_cast<std::size_t>(k)]).imag();
      for (Eigen::Index k = 0; k < npq; ++k) J(npvpq + r, npvpq + k) = dS_dVm(a, pq[static_cast<std::size_t>(k)]).imag();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible()) {
      out.message = "singular Jacobian";
      break;
    }
    const Eigen::VectorXd dx = lu.solve(-F);
    for (Eigen::Index k = 0; k < npvpq; ++k) va[pvpq[static_cast<std::size_t>(k)]] += dx[k];
    for (Eigen::Index k = 0; k < npq; ++k) vm[pq[static_cast<std::size_t>(k)]] += dx[npvpq + k];
    ++out.iterations;
    V = voltages();
    F = mismatch(V);
    norm = F.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(norm) || norm > 1e10) {
      out.message = "diverged";
      break;
    }
  }
  out.converged = norm <= options.tolerance;
  out.max_mismatch = norm;
  if (out.converged) {
    bool collapsed = false;
    for (Eigen::Index i = 0; i < vm.size(); ++i) collapsed = collapsed || !(vm[i] > 0.0);
    if (collapsed) {
      out.converged = false;
      out.message = "non-physical voltage magnitude";
    }
  }

  out.v.assign(V.data(), V.data() + V.size());
  out.i.assign(c.branches.size(), Complex{});
  for (std::size_t l = 0; l < c.branches.size(); ++l) {
    const auto& br = c.branches[l];
    if (!br.in_service) continue;
    const Complex vf = out.v[c.bus_index(br.from_bus)] / br.tap;
    out.i[l] = (vf - out.v[c.bus_index(br.to_bus)]) * series_admittance(br);
  }

  // generator outputs from the bus injections
  const CVec S = V.cwiseProduct((Y * V).conjugate());
  out.p_g.assign(ng, 0.0);
  out.q_g.assign(ng, 0.0);
  std::vector<std::vector<std::size_t>> at_bus(nb);
  for (std::size_t g = 0; g < ng; ++g)
    if (c.generators[g].status) at_bus[c.bus_index(c.generators[g].bus)].push_back(g);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& gens = at_bus[b];
    if (gens.empty()) continue;
    const double p_tot = S[static_cast<Eigen::Index>(b)].real() + c.buses[b].p_d;
    const double q_tot = S[static_cast<Eigen::Index>(b)].imag() + c.buses[b].q_d;
    std::size_t big = gens[0];
    double p_fixed = 0.0;
    for (auto g : gens) {
      out.p_g[g] = p_g[g];
      if (c.generators[g].p_max > c.generators[big].p_max) big = g;
    }
    for (auto g : gens)
      if (g != big) p_fixed += p_g[g];
    out.p_g[big] = static_cast<int>(b) == slack ? p_tot - p_fixed : p_g[big];
    double q_lo = 0.0, range = 0.0;
    for (auto g : gens) {
      q_lo += c.generators[g].q_min;
      range += c.generators[g].q_max - c.generators[g].q_min;
    }
    for (auto g : gens) {
      const auto& gen = c.generators[g];
      out.q_g[g] = range > 0.0 ? gen.q_min + (q_tot - q_lo) / range * (gen.q_max - gen.q_min)
                               : q_tot / static_cast<double>(gens.size());
    }
  }
  return out;
}

WarmStart map_warm_start(const NetworkCase& c, const BfmModel& bm, const PfSolution& pf, double tol) {
  WarmStart ws;
  if (!pf.converged) {
    ws.diagnostic = "power flow did not converge" + (pf.message.empty() ? std::string() : ": " + pf.message);
    return ws;
  }
  const auto& m = bm.model;
  const auto& vm = bm.vars;
  std::vector<double> x(static_cast<std::size_t>(m.num_vars()), 0.0);
  auto at = [&](int j) -> double& { return x[static_cast<std::size_t>(j)]; };
  for (std::size_t i = 0; i < c.buses.size(); ++i) at(vm.W[i]) = std::norm(pf.v[i]);
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    at(vm.p_g[g]) = pf.p_g[g];
    at(vm.q_g[g]) = pf.q_g[g];
  }
  for (std::size_t l = 0; l < c.branches.size(); ++l) {
    const auto& br = c.branches[l];
    if (!br.in_service) continue;
    const Complex vf = pf.v[c.bus_index(br.from_bus)] / br.tap;
    const Complex s = vf * std::conj(pf.i[l]);
    at(vm.P[l]) = s.real();
    at(vm.Q[l]) = s.imag();
    at(vm.S[l]) = std::abs(s);
    at(vm.Phi[l]) = std::norm(pf.i[l]);
  }
  for (const auto& b : bm.blocks) fill_rnf_values(b, x);

  double worst = 0.0;
  std::string where;
  for (int j = 0; j < m.num_vars(); ++j) {
    const auto& v = m.variable(j);
    const double d = std::max(v.lb - at(j), at(j) - v.ub);
    if (d > worst) {
      worst = d;
      where = "bound of " + v.name;
    }
  }
  for (int r = 0; r < m.num_rows(); ++r) {
    const double d = m.row(r).violation(x);
    if (d > worst) {
      worst = d;
      where = std::string("row ") + std::to_string(r) + " (" + to_string(m.row(r).tag) + ")";
    }
  }
  ws.max_violation = worst;
  ws.max_cone_rel = conic_errors(x, bm.blocks).block_rel_inf;
  if (worst > tol) {
    ws.diagnostic = "warm start violates " + where + " by " + std::to_string(worst);
    return ws;
  }
  ws.x = std::move(x);
  return ws;
}

namespace {

struct AcState {
  Eigen::VectorXd va, vm;
  std::vector<double> pg, qg;
};

struct AcEval {
  double cost = 0.0;
  double infeasibility = 0.0;  // l1 mismatch plus bound excess
  double mismatch = 0.0;       // max abs balance residual
};

// Sequential LP on the polar AC OPF with elastic balance rows and a box trust
// region; flow limits use tangents at the current flow angle.
class AcSlp {
 public:
  AcSlp(const NetworkCase& c, int ref) : c_(c), ref_(ref), Y_(build_ybus(c)) {
    for (const auto& g : c.generators) rho_ = std::max(rho_, 1e3 * std::max(1.0, std::abs(g.c1)));
    base_ = build_base_model(c);
  }

  std::optional<PfSolution> run(AcState st, int max_iter, std::string& log) {
    double tr = 0.1;
    AcEval cur = evaluate(st);
    for (int it = 0; it < max_iter && tr > 1e-10; ++it) {
      auto next = step(st, tr);
      if (!next) {
        tr *= 0.5;
        continue;
      }
      const AcEval ev = evaluate(*next);
      if (ev.cost + rho_ * ev.infeasibility < cur.cost + rho_ * cur.infeasibility - 1e-12 || it == 0) {
        st = std::move(*next);
        cur = ev;
        tr = std::min(0.4, tr * 1.5);
        if (cur.mismatch < 1e-5) {
          PfSolution pf = polish(st);
          auto ws = map_warm_start(c_, base_, pf);
          if (ws.ok()) {
            log = "slp repair after " + std::to_string(it + 1) + " iterations";
            return pf;
          }
        }
      } else {
        tr *= 0.5;
      }
    }
    log = "slp repair failed (infeasibility " + std::to_string(cur.infeasibility) + ")";
    return std::nullopt;
  }

 private:
  static constexpr double kMargin = 1e-5;

  CVec voltages(const AcState& st) const {
    CVec V(st.vm.size());
    for (Eigen::Index i = 0; i < V.size(); ++i) V[i] = std::polar(st.vm[i], st.va[i]);
    return V;
  }

  Complex from_flow(const Branch& br, const CVec& V) const {
    const Complex vf = V[static_cast<Eigen::Index>(c_.bus_index(br.from_bus))] / br.tap;
    const Complex is = (vf - V[static_cast<Eigen::Index>(c_.bus_index(br.to_bus))]) * series_admittance(br);
    return vf * std::conj(is);
  }

  AcEval evaluate(const AcState& st) const {
    AcEval ev;
    const CVec V = voltages(st);
    CVec S = V.cwiseProduct((Y_ * V).conjugate());
    for (std::size_t i = 0; i < c_.buses.size(); ++i) S[static_cast<Eigen::Index>(i)] += Complex(c_.buses[i].p_d, c_.buses[i].q_d);
    for (std::size_t g = 0; g < c_.generators.size(); ++g) {
      const auto& gen = c_.generators[g];
      if (!gen.status) continue;
      S[static_cast<Eigen::Index>(c_.bus_index(gen.bus))] -= Complex(st.pg[g], st.qg[g]);
      ev.cost += gen.c1 * st.pg[g];
    }
    for (Eigen::Index i = 0; i < S.size(); ++i) {
      ev.infeasibility += std::abs(S[i].real()) + std::abs(S[i].imag());
      ev.mismatch = std::max({ev.mismatch, std::abs(S[i].real()), std::abs(S[i].imag())});
      const auto& b = c_.buses[static_cast<std::size_t>(i)];
      ev.infeasibility += std::max(0.0, b.v_min - st.vm[i]) + std::max(0.0, st.vm[i] - b.v_max);
    }
    for (const auto& br : c_.branches) {
      if (!br.in_service) continue;
      ev.infeasibility += std::max(0.0, std::abs(from_flow(br, V)) - flow_limit(c_, br));
    }
    return ev;
  }

  std::optional<AcState> step(const AcState& st, double tr) const {
    const auto nb = static_cast<int>(c_.buses.size()), ng = static_cast<int>(c_.generators.size());
    const CVec V = voltages(st);
    const CVec I = Y_ * V;
    const CVec Vn = V.cwiseQuotient(V.cwiseAbs().cast<Complex>());
    const CMat dVa = kJ * V.asDiagonal() * (CMat(I.asDiagonal()) - Y_ * V.asDiagonal()).conjugate();
    const CMat dVm = CMat(V.asDiagonal()) * (Y_ * Vn.asDiagonal()).conjugate() + CMat(I.conjugate().cwiseProduct(Vn).asDiagonal());
    const CVec S = V.cwiseProduct(I.conjugate());

    LinearModel lp;
    std::vector<int> da(static_cast<std::size_t>(nb)), dv(static_cast<std::size_t>(nb));
    for (int i = 0; i < nb; ++i) {
      da[static_cast<std::size_t>(i)] = i == ref_ ? lp.add_variable("da", 0.0, 0.0) : lp.add_variable("da", -tr, tr);
      const auto& b = c_.buses[static_cast<std::size_t>(i)];
      double lo = b.v_min + kMargin - st.vm[i], hi = b.v_max - kMargin - st.vm[i];
      if (lo > hi) lo = hi = 0.5 * (lo + hi);
      double l = std::max(lo, -tr), u = std::min(hi, tr);
      if (l > u) l = lo, u = hi;
      dv[static_cast<std::size_t>(i)] = lp.add_variable("dv", l, u);
    }
    std::vector<int> pg(static_cast<std::size_t>(ng)), qg(static_cast<std::size_t>(ng));
    for (int g = 0; g < ng; ++g) {
      const auto& gen = c_.generators[static_cast<std::size_t>(g)];
      auto box = [](double lo, double hi) {
        return hi - lo > 2 * kMargin ? std::pair{lo + kMargin, hi - kMargin} : std::pair{lo, hi};
      };
      const auto [pl, pu] = gen.status ? box(gen.p_min, gen.p_max) : std::pair{0.0, 0.0};
      const auto [ql, qu] = gen.status ? box(gen.q_min, gen.q_max) : std::pair{0.0, 0.0};
      pg[static_cast<std::size_t>(g)] = lp.add_variable("pg", pl, pu, gen.c1);
      qg[static_cast<std::size_t>(g)] = lp.add_variable("qg", ql, qu);
    }
    for (int i = 0; i < nb; ++i)
      for (int part = 0; part < 2; ++part) {
        LinExpr row;
        for (int k = 0; k < nb; ++k) {
          const double a = part == 0 ? dVa(i, k).real() : dVa(i, k).imag();
          const double v = part == 0 ? dVm(i, k).real() : dVm(i, k).imag();
          if (std::abs(a) > 1e-14) row.add(da[static_cast<std::size_t>(k)], a);
          if (std::abs(v) > 1e-14) row.add(dv[static_cast<std::size_t>(k)], v);
        }
        for (int g = 0; g < ng; ++g)
          if (static_cast<int>(c_.bus_index(c_.generators[static_cast<std::size_t>(g)].bus)) == i)
            row.add(part == 0 ? pg[static_cast<std::size_t>(g)] : qg[static_cast<std::size_t>(g)], -1.0);
        row.add(lp.add_variable("e+", 0.0, kInf, rho_), 1.0);
        row.add(lp.add_variable("e-", 0.0, kInf, rho_), -1.0);
        const auto& b = c_.buses[static_cast<std::size_t>(i)];
        const double rhs = part == 0 ? -S[i].real() - b.p_d : -S[i].imag() - b.q_d;
        lp.add_row(row, Sense::Equal, rhs);
      }
    for (const auto& br : c_.branches) {
      if (!br.in_service) continue;
      const int i = static_cast<int>(c_.bus_index(br.from_bus)), j = static_cast<int>(c_.bus_index(br.to_bus));
      LinExpr diff;
      diff.add(da[static_cast<std::size_t>(i)], 1.0).add(da[static_cast<std::size_t>(j)], -1.0);
      const double d0 = st.va[i] - st.va[j];
      lp.add_row(diff, Sense::LessEqual, br.ang_max - 1e-6 - d0);
      lp.add_row(diff, Sense::GreaterEqual, br.ang_min + 1e-6 - d0);

      const double R = flow_limit(c_, br) * (1.0 - kMargin);
      const Complex sf = from_flow(br, V);
      if (std::abs(sf) < 0.5 * R) continue;
      const Complex ys = series_admittance(br);
      const Complex b = std::conj(ys) / br.tap, a = std::conj(ys) / (br.tap * br.tap);
      const Complex e = std::polar(1.0, d0);
      const Complex d_vi = 2.0 * a * st.vm[i] - b * st.vm[j] * e;
      const Complex d_vj = -b * st.vm[i] * e;
      const Complex d_ai = -kJ * b * st.vm[i] * st.vm[j] * e;
      const double psi0 = std::arg(sf);
      for (double off : {-std::numbers::pi / 8.0, 0.0, std::numbers::pi / 8.0}) {
        const Complex u = std::polar(1.0, psi0 + off);
        auto proj = [&](Complex d) { return u.real() * d.real() + u.imag() * d.imag(); };
        LinExpr t;
        t.add(dv[static_cast<std::size_t>(i)], proj(d_vi)).add(dv[static_cast<std::size_t>(j)], proj(d_vj));
        t.add(da[static_cast<std::size_t>(i)], proj(d_ai)).add(da[static_cast<std::size_t>(j)], -proj(d_ai));
        lp.add_row(t, Sense::LessEqual, R - proj(sf));
      }
    }
    const auto sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) return std::nullopt;
    AcState out = st;
    for (int i = 0; i < nb; ++i) {
      out.va[i] += sol.x[static_cast<std::size_t>(da[static_cast<std::size_t>(i)])];
      out.vm[i] += sol.x[static_cast<std::size_t>(dv[static_cast<std::size_t>(i)])];
    }
    for (int g = 0; g < ng; ++g) {
      out.pg[static_cast<std::size_t>(g)] = sol.x[static_cast<std::size_t>(pg[static_cast<std::size_t>(g)])];
      out.qg[static_cast<std::size_t>(g)] = sol.x[static_cast<std::size_t>(qg[static_cast<std::size_t>(g)])];
    }
    return out;
  }

  PfSolution polish(const AcState& st) const {
    std::vector<double> v(st.vm.data(), st.vm.data() + st.vm.size());
    PfOptions opt;
    opt.slack_bus = ref_;
    return newton_power_flow(c_, st.pg, v, opt);
  }

  const NetworkCase& c_;
  int ref_;
  CMat Y_;
  double rho_ = 1e3;
  BfmModel base_;
};

}  // namespace

PfSolution ac_warm_start(const NetworkCase& c, double time_limit) {
  BfmModel bm = build_relaxation(c, Method::SOCP, 0);
  SolveConfig cfg;
  cfg.method = Method::SOCP;
  cfg.time_limit = time_limit;
  auto res = branch_and_cut(bm.model, bm.blocks, nullptr, cfg);
  if (!res.incumbent) {
    PfSolution pf;
    pf.message = "SOCP relaxation has no solution";
    return pf;
  }
  const auto& x = res.incumbent->x;
  std::vector<double> p(c.generators.size()), v(c.buses.size());
  for (std::size_t g = 0; g < p.size(); ++g) p[g] = x[static_cast<std::size_t>(bm.vars.p_g[g])];
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(std::max(0.0, x[static_cast<std::size_t>(bm.vars.W[i])]));
  PfSolution pf = newton_power_flow(c, p, v);
  BfmModel base = build_base_model(c);
  if (pf.converged && map_warm_start(c, base, pf).ok()) {
    pf.message = "socp dispatch";
    return pf;
  }
  if (pf.slack_bus < 0) return pf;

  AcState st;
  const auto nb = static_cast<Eigen::Index>(c.buses.size());
  st.va = Eigen::VectorXd::Zero(nb);
  st.vm = Eigen::VectorXd(nb);
  for (Eigen::Index i = 0; i < nb; ++i) {
    st.vm[i] = pf.converged ? std::abs(pf.v[static_cast<std::size_t>(i)]) : v[static_cast<std::size_t>(i)];
    if (pf.converged) st.va[i] = std::arg(pf.v[static_cast<std::size_t>(i)]);
  }
  st.pg = pf.converged ? pf.p_g : p;
  st.qg = pf.converged ? pf.q_g : std::vector<double>(c.generators.size(), 0.0);
  AcSlp slp(c, pf.slack_bus);
  std::string log;
  if (auto repaired = slp.run(st, 300, log)) {
    repaired->message = log;
    return *repaired;
  }
  pf.converged = false;
  pf.message = "power flow at the SOCP dispatch violates bounds; " + log;
  return pf;
}

namespace {

std::vector<int> base_columns(const BfmModel& bm) {
  std::vector<int> cols;
  const auto& vm = bm.vars;
  for (const auto* list : {&vm.W, &vm.p_g, &vm.q_g, &vm.P, &vm.Q, &vm.S, &vm.Phi}) cols.insert(cols.end(), list->begin(), list->end());
  return cols;
}

}  // namespace

std::string warm_start_to_json(const BfmModel& bm, const std::vector<double>& x) {
  nlohmann::json vars = nlohmann::json::object();
  for (int j : base_columns(bm)) vars[bm.model.variable(j).name] = x[static_cast<std::size_t>(j)];
  return nlohmann::json{{"schema_version", 1}, {"variables", vars}}.dump(2);
}

std::vector<double> warm_start_from_json(const BfmModel& bm, const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.contains("variables") || !j["variables"].is_object()) throw std::runtime_error("warm start JSON: missing \"variables\" object");
  std::map<std::string, int> index;
  for (int c : base_columns(bm)) index[bm.model.variable(c).name] = c;
  std::vector<double> x(static_cast<std::size_t>(bm.model.num_vars()), 0.0);
  std::size_t seen = 0;
  for (const auto& [name, value] : j["variables"].items()) {
    auto it = index.find(name);
    if (it == index.end()) throw std::runtime_error("warm start JSON: unknown variable '" + name + "'");
    x[static_cast<std::size_t>(it->second)] = value.get<double>();
    ++seen;
  }
  if (seen != index.size()) throw std::runtime_error("warm start JSON: " + std::to_string(index.size() - seen) + " variables missing");
  for (const auto& b : bm.blocks) fill_rnf_values(b, x);
  return x;
}

LnsResult lns_postprocess(const LinearModel& model, const std::vector<SocBlock>& blocks,
                          const std::vector<double>& incumbent, const SolveConfig& config) {
  LnsResult out;
  out.before = conic_errors(incumbent, blocks, config.eta);
  LinearModel m = model;
  std::vector<SocBlock> bl = blocks;
  for (int j : m.binaries()) {
    const double v = incumbent[static_cast<std::size_t>(j)] >= 0.5 ? 1.0 : 0.0;
    m.set_bounds(j, v, v);
  }
  for (auto& b : bl) b.exact_soc = true;
  SolveConfig cfg = config;
  cfg.node_limit = 0;
  auto res = branch_and_cut(m, bl, nullptr, cfg);
  if (!res.incumbent) {
    out.x = incumbent;
    out.objective = model.objective_value(incumbent);
    out.errors = out.before;
    out.note = std::string("not applicable: ") + to_string(res.report.status);
    return out;
  }
  out.applicable = true;
  auto errors = conic_errors(res.incumbent->x, blocks, config.eta);
  if (errors.abs_1 > out.before.abs_1) {
    out.x = incumbent;
    out.objective = model.objective_value(incumbent);
    out.errors = out.before;
    out.note = "refinement increased absolute error; incumbent kept";
    return out;
  }
  out.x = std::move(res.incumbent->x);
  out.objective = res.incumbent->objective;
  out.errors = std::move(errors);
  return out;
}

}  // namespace rfopf
