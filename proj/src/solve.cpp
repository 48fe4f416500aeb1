#include "rfopf/solve.hpp"

#include <chrono>
#include <cmath>

namespace rfopf {

bool is_dynamic(Method m) { return m == Method::DPR || m == Method::DQPR; }

SolveOutcome solve_case(const NetworkCase& c, const SolveConfig& config, const std::optional<std::string>& warm_json) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveOutcome out;
  out.model = build_relaxation(c, config.method, is_dynamic(config.method) ? config.k_init : config.k_max);
  auto& bm = out.model;

  std::optional<std::vector<double>> warm;
  std::vector<std::string> notes;
  if (warm_json) {
    WarmStart ws;
    ws.x = warm_start_from_json(bm, *warm_json);
    ws.max_violation = bm.model.max_violation(ws.x);
    ws.max_cone_rel = conic_errors(ws.x, bm.blocks).block_rel_inf;
    out.warm = ws;
    warm = ws.x;
  } else if (config.warm_start) {
    const PfSolution pf = ac_warm_start(c, config.time_limit);
    WarmStart ws = map_warm_start(c, bm, pf);
    if (ws.ok()) {
      warm = ws.x;
      notes.push_back("warm start: " + pf.message);
    } else {
      notes.push_back("warm start skipped: " + ws.diagnostic);
    }
    out.warm = std::move(ws);
  }

  SolveConfig cfg = config;
  const double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  cfg.time_limit = std::max(0.0, config.time_limit - used);
  if (is_dynamic(config.method))
    out.result = dynamic_solve(bm, cfg, &out.cuts, warm);
  else
    out.result = branch_and_cut(bm.model, bm.blocks, nullptr, cfg, warm);
  auto& rep = out.result.report;
  rep.notes.insert(rep.notes.begin(), notes.begin(), notes.end());

  if (config.postprocess && out.result.incumbent) {
    if (config.method == Method::SOCP) {
      rep.notes.push_back("post-processing skipped: no R&F binaries");
    } else {
      LnsResult lns = lns_postprocess(bm.model, bm.blocks, out.result.incumbent->x, config);
      if (lns.applicable && lns.note.empty()) {
        auto& inc = *out.result.incumbent;
        inc.x = lns.x;
        inc.objective = lns.objective;
        inc.errors = lns.errors;
        inc.origin = IncumbentOrigin::PostProcessed;
        inc.time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.objective = lns.objective;
        rep.errors = lns.errors;
        rep.gap = std::max(0.0, (rep.objective - rep.bound) / std::max(std::abs(rep.objective), 1e-9));
        rep.incumbent_row_violation = bm.model.max_violation(inc.x);
        rep.incumbents.push_back({inc.objective, inc.time, inc.origin});
      } else {
        rep.notes.push_back("post-processing " + lns.note);
      }
      out.lns = std::move(lns);
    }
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace rfopf
