#pragma once

#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rfopf/case_io.hpp"
#include "rfopf/linear_model.hpp"

namespace rfopf {

inline constexpr double kDefaultEta = 1e-8;

struct VariableMap {
  std::vector<int> p_g, q_g;         // per generator
  std::vector<int> P, Q, S, Phi;     // per branch (from-end series flow)
  std::vector<int> W;                // per bus
  double cost_constant = 0.0;
};

/// Big-M encoding of Y = |X| (X given by an expression, Y by a variable).
struct AbsEncoding {
  int beta = -1;
  int omega1 = -1;
  int omega2 = -1;
};

/// One rotation-and-fold level. Level 0 folds (x, y) into (g_0, h_0) with two
/// absolute values; level k >= 1 rotates by theta_k and folds h_k.
struct RnfStage {
  int level = 0;
  int g = -1;
  int h = -1;
  std::vector<AbsEncoding> folds;  // two at level 0, one afterwards
  int first_row = 0;
  int end_row = 0;
};

enum class ConeKind { Power, CurrentVoltage };
enum class TerminalKind { PA, PR, QPR };

const char* to_string(ConeKind kind);
const char* to_string(TerminalKind kind);

/// Surface ||(x, y)|| = z of one branch.
struct SocBlock {
  int id = -1;  // position in the owning block list; tags the block's rows
  ConeKind kind = ConeKind::Power;
  int branch = 0;
  LinExpr z, x, y;
  double z_max = 0.0;
  double big_m = 0.0;
  int depth = -1;  // deepest R&F level present
  std::vector<RnfStage> stages;
  bool has_terminal = false;
  TerminalKind terminal = TerminalKind::PR;
  int terminal_level = -1;
  std::vector<int> inner_levels;                 // levels that carry an inner row
  std::set<std::pair<int, long long>> outer_angles;  // (frame level, psi / pi * 2^60)
  bool exact_soc = false;                        // handled by tangent separation in the engine
  // statistics
  int rnf_added = 0;
  int outer_cuts = 0;
  int tangents = 0;
};

struct BfmModel {
  LinearModel model;
  VariableMap vars;
  std::vector<SocBlock> blocks;
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relaxed branch-flow OPF without any cone rows: objective, power balance,
/// voltage drop, angle rows and variable bounds, plus two blocks per
/// in-service branch (power cone first, then current-voltage cone).
BfmModel build_base_model(const NetworkCase& c);

struct BlockError {
  int block = 0;
  double signed_gap = 0.0;  // x^2 + y^2 - z^2
  double abs = 0.0;
  double rel = 0.0;
};

struct BranchError {
  int branch = 0;
  double abs = 0.0;  // |P^2 + Q^2 - Phi W|
  double rel = 0.0;
};

struct ConicErrorReport {
  double eta = kDefaultEta;
  std::vector<BlockError> blocks;
  std::vector<BranchError> branches;
  // norms of the 4-D branch errors
  double rel_inf = 0.0;
  double abs_inf = 0.0;
  double abs_1 = 0.0;
  // norms of the 3-D block errors
  double block_rel_inf = 0.0;
  double block_abs_inf = 0.0;

  std::string to_json() const;
};

double block_gap(const SocBlock& block, std::span<const double> x);

/// Errors of every block and of every branch with both blocks present.
ConicErrorReport conic_errors(std::span<const double> x, const std::vector<SocBlock>& blocks,
                              double eta = kDefaultEta);

struct EpsFeasibility {
  bool feasible = true;
  int worst_block = -1;
  double worst_rel = 0.0;
};

/// True when every block's relative error is at most eps (plus 1e-9 slack for
/// rounding noise).
EpsFeasibility epsilon_feasible(std::span<const double> x, const std::vector<SocBlock>& blocks, double eps,
                                double eta = kDefaultEta);

}  // namespace rfopf
