#pragma once

#include <vector>

#include "rfopf/bfm.hpp"

namespace rfopf {

/// pi / 2^(k+1)
double theta(int k);

/// Appends level k of the rotation-and-fold encoding to the block; the block
/// must currently be at depth k - 1. Returns the new stage.
const RnfStage& append_rnf_stage(LinearModel& model, SocBlock& block, int k);

/// Appends stages until the block reaches depth k.
void extend_rnf(LinearModel& model, SocBlock& block, int k);

/// z cos(theta_{k+1}) <= g_k cos(theta_{k+1}) + h_k sin(theta_{k+1}).
int append_inner_row(LinearModel& model, SocBlock& block, int k, RowTag tag = RowTag::InnerCut);

/// Terminal rows at level K (the block must be at depth K). QPR also marks the
/// block for exact cone handling by the engine.
void append_terminal(LinearModel& model, SocBlock& block, int K, TerminalKind kind);

/// Worst relative conic error of a K-level terminal region.
double tolerance(TerminalKind kind, int K);

struct TraceLevel {
  double g = 0.0;
  double h = 0.0;
  std::vector<int> beta;  // fold signs: 1 when the folded quantity is >= 0
};

/// Numerical rotation-and-fold of (x, y) through levels 0..K.
std::vector<TraceLevel> rnf_trace(double x, double y, double z, int K);

/// Fills the block's stage variables (g, h, beta, omega) in `point` from the
/// block's (x, y, z) values already present there.
void fill_rnf_values(const SocBlock& block, std::vector<double>& point);

/// Membership of (x, y, z) in the regular 2^(K+1)-sided pyramid surface,
/// tested facet by facet as a convex combination of adjacent vertices.
bool direct_pyramid_oracle(double x, double y, double z, int K, double tol = 1e-9);

}  // namespace rfopf
