#include "rfopf/bnc.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <memory>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "rfopf/rnf.hpp"

namespace rfopf {

const char* to_string(Method m) {
  switch (m) {
    case Method::SOCP: return "socp";
    case Method::PA: return "pa";
    case Method::PR: return "pr";
    case Method::QPR: return "qpr";
    case Method::DPR: return "dpr";
    case Method::DQPR: return "dqpr";
  }
  return "pr";
}

Method parse_method(std::string_view name) {
  std::string s(name);
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (Method m : {Method::SOCP, Method::PA, Method::PR, Method::QPR, Method::DPR, Method::DQPR})
    if (s == to_string(m)) return m;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

const char* to_string(IncumbentOrigin o) {
  switch (o) {
    case IncumbentOrigin::WarmStart: return "warm_start";
    case IncumbentOrigin::Node: return "node";
    case IncumbentOrigin::PostProcessed: return "post_processed";
  }
  return "node";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::NumericalError: return "numerical_error";
  }
  return "numerical_error";
}

double SolveReport::avg_rnf() const {
  if (cut_stats.empty()) return 0.0;
  double s = 0.0;
  for (const auto& b : cut_stats) s += b.rnf_added;
  return s / static_cast<double>(cut_stats.size());
}

double SolveReport::avg_outer_cuts() const {
  if (cut_stats.empty()) return 0.0;
  double s = 0.0;
  for (const auto& b : cut_stats) s += b.outer_cuts;
  return s / static_cast<double>(cut_stats.size());
}

std::string SolveReport::to_json() const {
  using nlohmann::json;
  auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["schema_version"] = 1;
  j["method"] = method;
  j["status"] = to_string(status);
  j["objective"] = num(objective);
  j["bound"] = num(bound);
  j["gap"] = num(gap);
  j["nodes"] = nodes;
  j["checks"] = checks;
  j["lp_iterations"] = lp_iterations;
  j["tangent_cuts"] = tangent_cuts;
  j["lp_failures"] = lp_failures;
  j["wall_time"] = wall_time;
  j["incumbent_row_violation"] = incumbent_row_violation;
  j["avg_rnf"] = avg_rnf();
  j["avg_outer_cuts"] = avg_outer_cuts();
  auto& cs = j["cut_stats"] = json::array();
  for (const auto& b : cut_stats)
    cs.push_back({{"block", b.block},
                  {"branch", b.branch},
                  {"cone", to_string(b.kind)},
                  {"depth", b.depth},
                  {"rnf", b.rnf_added},
                  {"outer_cuts", b.outer_cuts},
                  {"tangents", b.tangents}});
  auto& inc = j["incumbents"] = json::array();
  for (const auto& r : incumbents) inc.push_back({{"objective", r.objective}, {"time", r.time}, {"origin", to_string(r.origin)}});
  if (errors) j["conic_errors"] = json::parse(errors->to_json());
  j["notes"] = notes;
  return j.dump(2);
}

std::optional<LinExpr> soc_separation(const SocBlock& block, std::span<const double> x, double rel_tol) {
  const double a = block.x.evaluate(x), b = block.y.evaluate(x), z = block.z.evaluate(x);
  const double r2 = a * a + b * b;
  if (r2 <= z * z * (1.0 + rel_tol)) return std::nullopt;
  const double rho = std::sqrt(r2);
  // below this the LP tolerance lets the same point come back
  if (rho - z <= 1e-8) return std::nullopt;
  LinExpr cut = (a / rho) * block.x + (b / rho) * block.y;
  cut -= block.z;
  return cut;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  long id = 0;
  double bound = -kInf;
  int depth = 0;
  std::vector<std::pair<int, double>> fixes;
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

constexpr double kIntTol = 1e-6;
constexpr double kRowTol = 1e-6;

class Engine {
 public:
  Engine(LinearModel& model, std::vector<SocBlock>& blocks, const LazyCallback& cb, const SolveConfig& cfg)
      : model_(model), blocks_(blocks), cb_(cb), cfg_(cfg), start_(Clock::now()) {
    deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.time_limit));
    report_.method = to_string(cfg.method);
  }

  BncResult run(const std::optional<std::vector<double>>& warm) {
    seed_tangents();
    if (warm) try_warm_start(*warm);

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    open.push(Node{next_id_++, -kInf, 0, {}, nullptr});
    bool stopped = false;
    while (!open.empty()) {
      if (Clock::now() > deadline_) {
        report_.status = SolveStatus::TimeLimit;
        stopped = true;
        break;
      }
      if (cfg_.node_limit > 0 && report_.nodes >= cfg_.node_limit) {
        report_.status = SolveStatus::NodeLimit;
        stopped = true;
        break;
      }
      if (incumbent_ && gap_of(std::min(open.top().bound, pruned_bound_)) <= cfg_.gap) break;
      Node node = open.top();
      open.pop();
      if (incumbent_ && node.bound >= cutoff()) {
        pruned_bound_ = std::min(pruned_bound_, node.bound);
        continue;
      }
      ++report_.nodes;
      process(node, open);
    }

    if (!stopped && interrupted_bound_ < kInf) {
      // the deadline hit inside a node LP
      report_.status = SolveStatus::TimeLimit;
      stopped = true;
    }
    double bound = pruned_bound_;
    if (!open.empty()) bound = std::min(bound, open.top().bound);
    if (stopped) bound = std::min(bound, interrupted_bound_);
    if (incumbent_) bound = std::min(bound, incumbent_->objective);
    if (!stopped) report_.status = incumbent_ ? SolveStatus::Optimal : SolveStatus::Infeasible;
    if (!stopped && !incumbent_ && report_.lp_failures > 0) report_.status = SolveStatus::NumericalError;

    BncResult res;
    report_.bound = bound;
    if (incumbent_) {
      report_.objective = incumbent_->objective;
      report_.gap = std::max(0.0, gap_of(report_.bound));
      report_.incumbent_row_violation = model_.max_violation(incumbent_->x);
      incumbent_->errors = conic_errors(incumbent_->x, blocks_, cfg_.eta);
      report_.errors = incumbent_->errors;
      res.incumbent = incumbent_;
    } else {
      report_.objective = std::numeric_limits<double>::quiet_NaN();
      report_.gap = std::numeric_limits<double>::quiet_NaN();
    }
    report_.wall_time = elapsed();
    for (const auto& b : blocks_)
      report_.cut_stats.push_back({b.id, b.branch, b.kind, b.depth, b.rnf_added, b.outer_cuts, b.tangents});
    res.report = std::move(report_);
    return res;
  }

 private:
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  double gap_of(double bound) const {
    const double obj = incumbent_->objective;
    return (obj - bound) / std::max(std::abs(obj), 1e-9);
  }

  double cutoff() const { return incumbent_->objective - cfg_.gap * std::max(std::abs(incumbent_->objective), 1e-9); }

  void seed_tangents() {
    for (auto& b : blocks_) {
      if (!b.exact_soc || b.tangents > 0) continue;
      for (int k = 0; k < 8; ++k) {
        const double psi = k * std::numbers::pi / 4.0;
        LinExpr e = std::cos(psi) * b.x + std::sin(psi) * b.y;
        e -= b.z;
        model_.add_row(e, Sense::LessEqual, 0.0, RowTag::SocTangent, b.id);
        ++b.tangents;
      }
    }
  }

  // Adds tangents for every violated exact cone; returns the number added.
  int separate(std::span<const double> x) {
    int added = 0;
    for (auto& b : blocks_) {
      if (!b.exact_soc) continue;
      if (auto cut = soc_separation(b, x)) {
        model_.add_row(*cut, Sense::LessEqual, 0.0, RowTag::SocTangent, b.id);
        ++b.tangents;
        ++added;
      }
    }
    report_.tangent_cuts += added;
    return added;
  }

  bool soc_clean(std::span<const double> x) const {
    for (const auto& b : blocks_)
      if (b.exact_soc && soc_separation(b, x)) return false;
    return true;
  }

  bool integral(std::span<const double> x) const {
    for (int j : model_.binaries()) {
      const double v = x[static_cast<std::size_t>(j)];
      if (std::min(v, 1.0 - v) > kIntTol) return false;
    }
    return true;
  }

  // Binaries owned by each block.
  std::vector<std::vector<int>> block_binaries() const {
    std::vector<std::vector<int>> out(blocks_.size());
    for (std::size_t k = 0; k < blocks_.size(); ++k)
      for (const auto& st : blocks_[k].stages)
        for (const auto& f : st.folds) out[k].push_back(f.beta);
    return out;
  }

  // Replaces the R&F auxiliaries by the exact fold trace of the base point.
  // Returns the blocks whose rows remain violated.
  std::vector<int> complete(std::vector<double>& x) const {
    for (const auto& b : blocks_) fill_rnf_values(b, x);
    std::vector<char> bad(blocks_.size(), 0);
    for (const auto& r : model_.rows()) {
      if (r.violation(x) <= kRowTol) continue;
      if (r.block >= 0 && static_cast<std::size_t>(r.block) < bad.size())
        bad[static_cast<std::size_t>(r.block)] = 1;
      else
        return {-1};
    }
    std::vector<int> out;
    for (std::size_t k = 0; k < bad.size(); ++k)
      if (bad[k]) out.push_back(static_cast<int>(k));
    return out;
  }

  void ensure_solver() {
    if (solver_ && solver_->num_columns() == model_.num_vars() && solver_->num_rows() == model_.num_rows()) return;
    Basis keep;
    if (solver_) keep = solver_->basis();
    LpOptions opt;
    opt.deadline = deadline_;
    solver_ = std::make_unique<SimplexSolver>(model_, opt);
    applied_.clear();
    if (!keep.empty()) solver_->set_basis(keep);
  }

  void apply_fixes(const Node& node) {
    for (int j : applied_) solver_->set_bounds(j, model_.variable(j).lb, model_.variable(j).ub);
    applied_.clear();
    for (const auto& [j, v] : node.fixes) {
      solver_->set_bounds(j, v, v);
      applied_.push_back(j);
    }
  }

  bool accept(std::vector<double> x, double obj, IncumbentOrigin origin) {
    if (incumbent_ && obj >= incumbent_->objective - 1e-12 * std::max(1.0, std::abs(obj))) return false;
    Incumbent inc;
    inc.x = std::move(x);
    inc.objective = obj;
    inc.time = elapsed();
    inc.origin = origin;
    report_.incumbents.push_back({obj, inc.time, origin});
    incumbent_ = std::move(inc);
    return true;
  }

  // Runs the lazy callback; true when the candidate survives.
  bool check_candidate(std::span<const double> x) {
    if (!cb_) return true;
    ++report_.checks;
    const int rows = model_.num_rows(), cols = model_.num_vars();
    const bool rejected = cb_(model_, blocks_, x);
    if (rejected && rows == model_.num_rows() && cols == model_.num_vars())
      report_.notes.push_back("callback rejected a candidate without extending the model");
    return !rejected;
  }

  void try_warm_start(const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != model_.num_vars()) {
      report_.notes.push_back("warm start rejected: dimension mismatch");
      return;
    }
    const double viol = model_.max_violation(x);
    if (viol > kRowTol) {
      report_.notes.push_back("warm start rejected: row violation " + std::to_string(viol));
      return;
    }
    if (!integral(x) || !soc_clean(x)) {
      report_.notes.push_back("warm start rejected: not integral or off the exact cones");
      return;
    }
    if (!check_candidate(x)) {
      report_.notes.push_back("warm start rejected by the lazy callback");
      return;
    }
    accept(x, model_.objective_value(x), IncumbentOrigin::WarmStart);
  }

  void process(const Node& node, std::priority_queue<Node, std::vector<Node>, NodeOrder>& open) {
    std::shared_ptr<const Basis> basis = node.basis;
    int frac_rounds = 0;
    while (true) {
      if (Clock::now() > deadline_) {
        interrupted_bound_ = std::min(interrupted_bound_, node.bound);
        return;
      }
      ensure_solver();
      apply_fixes(node);
      if (basis) solver_->set_basis(*basis);
      LpSolution sol = solver_->solve();
      report_.lp_iterations += sol.iterations;
      if (sol.status == LpStatus::IterationLimit || sol.status == LpStatus::Unbounded) {
        // retry from the slack basis
        LpOptions opt;
        opt.deadline = deadline_;
        solver_ = std::make_unique<SimplexSolver>(model_, opt);
        applied_.clear();
        apply_fixes(node);
        sol = solver_->solve();
        report_.lp_iterations += sol.iterations;
      }
      if (sol.status == LpStatus::Infeasible) return;
      if (sol.status != LpStatus::Optimal) {
        ++report_.lp_failures;
        if (Clock::now() > deadline_)
          interrupted_bound_ = std::min(interrupted_bound_, node.bound);
        else
          dropped_bound_note(node.bound);
        return;
      }
      basis = std::make_shared<const Basis>(solver_->basis());
      const double obj = sol.objective;
      if (incumbent_ && obj >= cutoff()) {
        pruned_bound_ = std::min(pruned_bound_, obj);
        return;
      }

      std::vector<double> cand = sol.x;
      const auto bad = complete(cand);
      const bool completed = bad.empty() && integral(cand);
      const bool lp_integral = integral(sol.x);
      const bool candidate = completed || lp_integral;
      if (!candidate && frac_rounds >= cfg_.fractional_soc_rounds) {
        branch(node, sol, bad, basis, obj, open);
        return;
      }
      if (separate(sol.x) > 0) {
        if (!candidate) ++frac_rounds;
        continue;
      }
      if (!candidate) {
        branch(node, sol, bad, basis, obj, open);
        return;
      }
      const std::vector<double>& point = completed ? cand : sol.x;
      const int rows = model_.num_rows(), cols = model_.num_vars();
      if (!check_candidate(point)) {
        if (rows == model_.num_rows() && cols == model_.num_vars()) return;
        continue;  // model extended: re-solve this node
      }
      accept(point, obj, IncumbentOrigin::Node);
      return;
    }
  }

  void dropped_bound_note(double bound) {
    pruned_bound_ = std::min(pruned_bound_, bound);
    report_.notes.push_back("node LP failed; subtree dropped");
  }

  void branch(const Node& node, const LpSolution& sol, const std::vector<int>& bad,
              const std::shared_ptr<const Basis>& basis, double obj,
              std::priority_queue<Node, std::vector<Node>, NodeOrder>& open) {
    int var = -1;
    double best = kIntTol;
    auto consider = [&](int j) {
      const double v = sol.x[static_cast<std::size_t>(j)];
      const double f = std::min(v, 1.0 - v);
      if (f > best || (f == best && var >= 0 && j < var)) {
        best = f;
        var = j;
      }
    };
    if (!bad.empty() && bad[0] >= 0) {
      const auto bins = block_binaries();
      for (int k : bad)
        for (int j : bins[static_cast<std::size_t>(k)]) consider(j);
    }
    if (var < 0)
      for (int j : model_.binaries()) consider(j);
    if (var < 0) {
      // integral LP point that the completion could not repair: nothing to branch on
      report_.notes.push_back("integral node without a valid completion");
      return;
    }
    for (double v : {0.0, 1.0}) {
      Node child;
      child.id = next_id_++;
      child.bound = obj;
      child.depth = node.depth + 1;
      child.fixes = node.fixes;
      child.fixes.emplace_back(var, v);
      child.basis = basis;
      open.push(std::move(child));
    }
  }

  LinearModel& model_;
  std::vector<SocBlock>& blocks_;
  const LazyCallback& cb_;
  const SolveConfig& cfg_;
  Clock::time_point start_, deadline_;
  std::unique_ptr<SimplexSolver> solver_;
  std::vector<int> applied_;
  std::optional<Incumbent> incumbent_;
  SolveReport report_;
  long next_id_ = 0;
  double pruned_bound_ = kInf;
  double interrupted_bound_ = kInf;
};

}  // namespace

BncResult branch_and_cut(LinearModel& model, std::vector<SocBlock>& blocks, const LazyCallback& callback,
                         const SolveConfig& config, const std::optional<std::vector<double>>& warm_start) {
  Engine engine(model, blocks, callback, config);
  return engine.run(warm_start);
}

}  // namespace rfopf
