#include "rfopf/bfm.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

namespace rfopf {

const char* to_string(ConeKind kind) { return kind == ConeKind::Power ? "power" : "current_voltage"; }

const char* to_string(TerminalKind kind) {
  switch (kind) {
    case TerminalKind::PA: return "PA";
    case TerminalKind::PR: return "PR";
    case TerminalKind::QPR: return "QPR";
  }
  return "PR";
}

BfmModel build_base_model(const NetworkCase& c) {
  BfmModel out;
  auto& m = out.model;
  auto& vm = out.vars;
  const std::size_t nb = c.buses.size();
  const std::size_t nl = c.branches.size();

  for (std::size_t i = 0; i < nb; ++i) {
    const auto& b = c.buses[i];
    vm.W.push_back(m.add_variable("W_" + std::to_string(b.id), b.v_min * b.v_min, b.v_max * b.v_max));
  }
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const auto& gen = c.generators[g];
    const std::string tag = std::to_string(g + 1);
    const double on = gen.status ? 1.0 : 0.0;
    vm.p_g.push_back(m.add_variable("pg_" + tag, on * gen.p_min, on * gen.p_max, gen.c1));
    vm.q_g.push_back(m.add_variable("qg_" + tag, on * gen.q_min, on * gen.q_max));
    if (gen.status) vm.cost_constant += gen.c0;
  }
  m.set_objective_constant(vm.cost_constant);

  std::vector<LinExpr> p_bal(nb), q_bal(nb);  // injections minus withdrawals = 0
  for (std::size_t i = 0; i < nb; ++i) {
    const auto& b = c.buses[i];
    p_bal[i].constant = -b.p_d;
    q_bal[i].constant = -b.q_d;
    p_bal[i].add(vm.W[i], -b.g_s);
    q_bal[i].add(vm.W[i], b.b_s);
  }
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const auto i = c.bus_index(c.generators[g].bus);
    p_bal[i].add(vm.p_g[g], 1.0);
    q_bal[i].add(vm.q_g[g], 1.0);
  }

  for (std::size_t l = 0; l < nl; ++l) {
    const auto& br = c.branches[l];
    const std::string tag = std::to_string(l + 1);
    const auto i = c.bus_index(br.from_bus);
    const auto j = c.bus_index(br.to_bus);
    const double s_max = br.in_service ? flow_limit(c, br) : 0.0;
    if (!std::isfinite(s_max) || (br.in_service && !(s_max > 0.0)))
      throw AssemblyError("branch " + tag + ": no finite flow bound");
    const double t2 = br.tap * br.tap;
    const double v_min = c.buses[i].v_min;
    const double phi_max = br.in_service ? std::pow(s_max * br.tap / v_min, 2) : 0.0;

    const int P = m.add_variable("P_" + tag, -s_max, s_max);
    const int Q = m.add_variable("Q_" + tag, -s_max, s_max);
    const int S = m.add_variable("S_" + tag, 0.0, s_max);
    const int Phi = m.add_variable("Phi_" + tag, 0.0, phi_max);
    vm.P.push_back(P);
    vm.Q.push_back(Q);
    vm.S.push_back(S);
    vm.Phi.push_back(Phi);
    if (!br.in_service) continue;

    const double r = br.r, x = br.x, half_b = br.b_c / 2.0;
    p_bal[i].add(P, -1.0);
    p_bal[j].add(P, 1.0).add(Phi, -r);
    q_bal[i].add(Q, -1.0).add(vm.W[i], half_b / t2);
    q_bal[j].add(Q, 1.0).add(Phi, -x).add(vm.W[j], half_b);

    // W_i / tau^2 - W_j = 2 (r P + x Q) - (r^2 + x^2) Phi
    LinExpr drop;
    drop.add(vm.W[i], 1.0 / t2).add(vm.W[j], -1.0).add(P, -2.0 * r).add(Q, -2.0 * x).add(Phi, r * r + x * x);
    m.add_row(drop, Sense::Equal, 0.0, RowTag::VoltageDrop);

    // tan(angle) bounds on x P - r Q relative to W_i / tau^2 - r P - x Q
    LinExpr re;
    re.add(vm.W[i], 1.0 / t2).add(P, -r).add(Q, -x);
    LinExpr im;
    im.add(P, x).add(Q, -r);
    m.add_row(im - std::tan(br.ang_min) * re, Sense::GreaterEqual, 0.0, RowTag::AngleMin);
    m.add_row(im - std::tan(br.ang_max) * re, Sense::LessEqual, 0.0, RowTag::AngleMax);

    SocBlock power;
    power.id = static_cast<int>(out.blocks.size());
    power.kind = ConeKind::Power;
    power.branch = static_cast<int>(l);
    power.z = LinExpr::var(S);
    power.x = LinExpr::var(P);
    power.y = LinExpr::var(Q);
    power.z_max = s_max;
    power.big_m = s_max;
    out.blocks.push_back(std::move(power));

    SocBlock cv;
    cv.id = static_cast<int>(out.blocks.size());
    cv.kind = ConeKind::CurrentVoltage;
    cv.branch = static_cast<int>(l);
    cv.z.add(vm.W[i], 0.5 / t2).add(Phi, 0.5);
    cv.x = LinExpr::var(S);
    cv.y.add(vm.W[i], 0.5 / t2).add(Phi, -0.5);
    cv.z_max = (c.buses[i].v_max * c.buses[i].v_max / t2 + phi_max) / 2.0;
    cv.big_m = cv.z_max;
    out.blocks.push_back(std::move(cv));
  }

  for (std::size_t i = 0; i < nb; ++i) m.add_row(p_bal[i], Sense::Equal, 0.0, RowTag::PowerBalanceP);
  for (std::size_t i = 0; i < nb; ++i) m.add_row(q_bal[i], Sense::Equal, 0.0, RowTag::PowerBalanceQ);
  return out;
}

double block_gap(const SocBlock& block, std::span<const double> x) {
  const double z = block.z.evaluate(x);
  const double a = block.x.evaluate(x);
  const double b = block.y.evaluate(x);
  return a * a + b * b - z * z;
}

ConicErrorReport conic_errors(std::span<const double> x, const std::vector<SocBlock>& blocks, double eta) {
  ConicErrorReport rep;
  rep.eta = eta;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& b = blocks[k];
    const double z = b.z.evaluate(x);
    BlockError e;
    e.block = static_cast<int>(k);
    e.signed_gap = block_gap(b, x);
    e.abs = std::abs(e.signed_gap);
    e.rel = e.abs / (z * z + eta);
    rep.block_rel_inf = std::max(rep.block_rel_inf, e.rel);
    rep.block_abs_inf = std::max(rep.block_abs_inf, e.abs);
    rep.blocks.push_back(e);
  }
  // 4-D error per branch: P^2 + Q^2 - W Phi, where W Phi = z_cv^2 - y_cv^2
  std::vector<const SocBlock*> pw, cv;
  for (const auto& b : blocks) {
    auto& slot = b.kind == ConeKind::Power ? pw : cv;
    if (static_cast<int>(slot.size()) <= b.branch) slot.resize(static_cast<std::size_t>(b.branch) + 1, nullptr);
    slot[static_cast<std::size_t>(b.branch)] = &b;
  }
  for (std::size_t l = 0; l < std::min(pw.size(), cv.size()); ++l) {
    if (!pw[l] || !cv[l]) continue;
    const double p = pw[l]->x.evaluate(x), q = pw[l]->y.evaluate(x);
    const double z = cv[l]->z.evaluate(x), y = cv[l]->y.evaluate(x);
    BranchError e;
    e.branch = static_cast<int>(l);
    e.abs = std::abs(p * p + q * q - (z * z - y * y));
    e.rel = e.abs / (z * z + eta);
    rep.rel_inf = std::max(rep.rel_inf, e.rel);
    rep.abs_inf = std::max(rep.abs_inf, e.abs);
    rep.abs_1 += e.abs;
    rep.branches.push_back(e);
  }
  return rep;
}

std::string ConicErrorReport::to_json() const {
  nlohmann::json j;
  j["eta"] = eta;
  j["rel_inf"] = rel_inf;
  j["abs_inf"] = abs_inf;
  j["abs_1"] = abs_1;
  j["block_rel_inf"] = block_rel_inf;
  j["block_abs_inf"] = block_abs_inf;
  auto& bl = j["blocks"] = nlohmann::json::array();
  for (const auto& e : blocks) bl.push_back({{"block", e.block}, {"signed", e.signed_gap}, {"abs", e.abs}, {"rel", e.rel}});
  auto& br = j["branches"] = nlohmann::json::array();
  for (const auto& e : branches) br.push_back({{"branch", e.branch}, {"abs", e.abs}, {"rel", e.rel}});
  return j.dump();
}

EpsFeasibility epsilon_feasible(std::span<const double> x, const std::vector<SocBlock>& blocks, double eps,
                                double eta) {
  EpsFeasibility out;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const double z = blocks[k].z.evaluate(x);
    const double rel = std::abs(block_gap(blocks[k], x)) / (z * z + eta);
    if (out.worst_block < 0 || rel > out.worst_rel) {
      out.worst_rel = rel;
      out.worst_block = static_cast<int>(k);
    }
  }
  out.feasible = out.worst_rel <= eps + 1e-9;
  return out;
}

}  // namespace rfopf
