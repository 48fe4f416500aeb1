#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfopf/bfm.hpp"
#include "rfopf/lp.hpp"

namespace rfopf {

enum class Method { SOCP, PA, PR, QPR, DPR, DQPR };

const char* to_string(Method m);
/// Parses "socp", "pa", ... (case-insensitive); throws std::invalid_argument.
Method parse_method(std::string_view name);

struct SolveConfig {
  double gap = 1e-3;
  double time_limit = 600.0;  // seconds
  int k_init = 0;
  int k_max = 5;  // K for static methods
  Method method = Method::PR;
  std::optional<double> eps;  // default: tolerance(kind, k_max)
  double eta = kDefaultEta;
  std::uint64_t seed = 0;
  bool warm_start = false;
  bool postprocess = false;
  long node_limit = 0;  // 0: unlimited
  int fractional_soc_rounds = 3;  // tangent rounds at fractional nodes
};

enum class IncumbentOrigin { WarmStart, Node, PostProcessed };
const char* to_string(IncumbentOrigin o);

struct Incumbent {
  std::vector<double> x;
  double objective = 0.0;
  ConicErrorReport errors;
  double time = 0.0;  // seconds since solve start
  IncumbentOrigin origin = IncumbentOrigin::Node;
};

enum class SolveStatus { Optimal, Infeasible, TimeLimit, NodeLimit, NumericalError };
const char* to_string(SolveStatus s);

struct BlockStats {
  int block = 0;
  int branch = 0;
  ConeKind kind = ConeKind::Power;
  int depth = -1;
  int rnf_added = 0;
  int outer_cuts = 0;
  int tangents = 0;
};

struct IncumbentRecord {
  double objective = 0.0;
  double time = 0.0;
  IncumbentOrigin origin = IncumbentOrigin::Node;
};

struct SolveReport {
  std::string method;
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;  // best incumbent (NaN when none)
  double bound = 0.0;
  double gap = 0.0;
  long nodes = 0;
  long checks = 0;  // lazy-callback invocations
  long lp_iterations = 0;
  long tangent_cuts = 0;
  long lp_failures = 0;
  double wall_time = 0.0;
  double incumbent_row_violation = 0.0;
  std::vector<BlockStats> cut_stats;
  std::vector<IncumbentRecord> incumbents;
  std::optional<ConicErrorReport> errors;
  std::vector<std::string> notes;

  double avg_rnf() const;
  double avg_outer_cuts() const;
  std::string to_json() const;
};

/// Called with each integer-feasible candidate; may append rows, variables and
/// R&F stages. Returns true when the candidate is rejected (the model must
/// have grown in that case).
using LazyCallback = std::function<bool(LinearModel&, std::vector<SocBlock>&, std::span<const double>)>;

struct BncResult {
  std::optional<Incumbent> incumbent;
  SolveReport report;
};

/// Tangent row x*xh/rho + y*yh/rho - z <= 0 at a point violating the block's
/// cone by more than the relative tolerance (and by more than 1e-8 in
/// absolute terms); none otherwise.
std::optional<LinExpr> soc_separation(const SocBlock& block, std::span<const double> x, double rel_tol = 1e-7);

/// Best-bound branch-and-cut over the model's binaries. Registered exact-cone
/// blocks are handled by tangent separation; R&F auxiliaries of fractional
/// LP points are completed from the numerical fold trace when possible.
BncResult branch_and_cut(LinearModel& model, std::vector<SocBlock>& blocks, const LazyCallback& callback,
                         const SolveConfig& config, const std::optional<std::vector<double>>& warm_start = {});

}  // namespace rfopf
