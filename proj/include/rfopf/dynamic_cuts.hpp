#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfopf/bfm.hpp"
#include "rfopf/bnc.hpp"

namespace rfopf {

enum class CutSide { Inside, Outside };

/// Decides whether a candidate needs a cut on this block. None when the
/// block's relative error is within eps or when the point already lies in the
/// k_max-level terminal region of `kind` (checked on the numerical trace).
std::optional<CutSide> violation_check(const SocBlock& block, std::span<const double> x, TerminalKind kind,
                                       int k_max, double eps, double eta = kDefaultEta);

struct CutRequest {
  enum class Kind { Inner, Outer };
  Kind kind = Kind::Inner;
  int block = -1;
  int level = -1;  // k1 for inner cuts, k_new for outer cuts
  int frame = -1;  // level whose (g, h) carry an outer cut
  int stages_added = 0;
  int rows_added = 0;
  double psi1 = 0.0, psi2 = 0.0;
  double delta_rel = 0.0;  // of the candidate

  std::string to_json() const;
};

/// Relative error covered by tangents spaced pi / 2^(k+1): tan^2(pi / 2^(k+2)).
double outer_delta(int k);

/// Deepens the block to the smallest level whose inner row the candidate
/// violates and appends that row.
CutRequest add_inner_cut(LinearModel& model, SocBlock& block, std::span<const double> x, int k_max,
                         double eta = kDefaultEta);

/// Tangent rows in the block's deepest folded frame at the two angles that
/// bracket the candidate; rows already present or satisfied are skipped.
CutRequest add_outer_cut(LinearModel& model, SocBlock& block, std::span<const double> x, int k_max,
                         double eta = kDefaultEta);

/// Terminal kind of a method (PR for SOCP, PR and DPR; QPR for QPR and DQPR;
/// PA for PA).
TerminalKind terminal_kind(Method method);

/// Base model plus K-level relaxation rows on every block. SOCP registers the
/// exact cones only; the dynamic methods start at K.
BfmModel build_relaxation(const NetworkCase& c, Method method, int K);

/// Lazy callback of the dynamic methods; each cut is appended to `log`.
LazyCallback dynamic_callback(TerminalKind kind, int k_max, double eps, double eta, std::vector<CutRequest>* log);

/// Runs the dynamic relaxation on a model built for K_init.
BncResult dynamic_solve(BfmModel& bm, const SolveConfig& config, std::vector<CutRequest>* log = nullptr,
                        const std::optional<std::vector<double>>& warm_start = {});

BncResult dynamic_solve(const NetworkCase& c, const SolveConfig& config, std::vector<CutRequest>* log = nullptr);

/// Default eps of a configuration: tolerance of the method's terminal at K_max.
double default_eps(const SolveConfig& config);

}  // namespace rfopf
