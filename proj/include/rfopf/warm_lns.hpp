#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "rfopf/bfm.hpp"
#include "rfopf/bnc.hpp"
#include "rfopf/case_io.hpp"

namespace rfopf {

using Complex = std::complex<double>;

struct PfSolution {
  std::vector<Complex> v;       // per bus
  std::vector<Complex> i;       // per branch: series current leaving the from end
  std::vector<double> p_g, q_g; // per generator
  bool converged = false;
  int iterations = 0;
  double max_mismatch = 0.0;
  int slack_bus = -1;  // bus index
  std::string message;
};

struct PfOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;
  std::optional<int> slack_bus;  // bus index; default: bus of the largest in-service generator
};

/// Newton-Raphson power flow in polar form at a fixed dispatch. `p_g` is per
/// generator (the slack bus absorbs the residual); `v_set` gives the voltage
/// magnitude per bus for generator buses (other entries are ignored).
PfSolution newton_power_flow(const NetworkCase& c, const std::vector<double>& p_g, const std::vector<double>& v_set,
                             const PfOptions& options = {});

struct WarmStart {
  std::vector<double> x;         // empty when rejected
  double max_violation = 0.0;    // over the model's rows and bounds
  double max_cone_rel = 0.0;
  std::string diagnostic;
  bool ok() const { return !x.empty(); }
};

/// Maps a converged power-flow point onto the model's variables (R&F
/// auxiliaries from the fold trace). Rejected when any row or bound is off by
/// more than `tol`.
WarmStart map_warm_start(const NetworkCase& c, const BfmModel& bm, const PfSolution& pf, double tol = 1e-6);

/// SOCP dispatch -> Newton power flow (generator buses PV at the SOCP voltage
/// magnitudes, largest generator as slack).
PfSolution ac_warm_start(const NetworkCase& c, double time_limit = 60.0);

/// {"schema_version", "variables": {name: value}} over the base variables.
std::string warm_start_to_json(const BfmModel& bm, const std::vector<double>& x);
/// Inverse of warm_start_to_json; R&F auxiliaries are recomputed. Throws
/// std::runtime_error on unknown or missing names.
std::vector<double> warm_start_from_json(const BfmModel& bm, const std::string& text);

struct LnsResult {
  bool applicable = false;  // false: the fixed wedge misses the cone
  std::vector<double> x;    // refined point, or the original incumbent
  double objective = 0.0;
  ConicErrorReport errors;
  ConicErrorReport before;
  std::string note;
};

/// Fixes the incumbent's R&F binaries, registers the exact cones and
/// re-solves. The input model and blocks are left untouched.
LnsResult lns_postprocess(const LinearModel& model, const std::vector<SocBlock>& blocks,
                          const std::vector<double>& incumbent, const SolveConfig& config);

}  // namespace rfopf
