#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rfopf/solve.hpp"

namespace rfopf {

/// One solve summarized for the result tables. `error` is set when the run
/// threw; the numeric fields are NaN then.
struct RunRow {
  std::string instance;
  std::string method;
  int k = 0;
  std::string status;
  double objective = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  double time = 0.0;
  double rel_inf = 0.0;  // 4-D, fraction
  double abs_inf = 0.0;
  double abs_1 = 0.0;
  double avg_rnf = 0.0;
  double avg_oc = 0.0;
  long checks = 0;
  long nodes = 0;
  // LNS post-processing, when requested
  bool lns_applicable = false;
  double lns_rel_inf = 0.0, lns_abs_inf = 0.0, lns_abs_1 = 0.0, lns_time = 0.0;
  std::string error;

  bool ok() const { return error.empty() && status != "infeasible"; }
};

RunRow run_method(const NetworkCase& c, const std::string& instance, const SolveConfig& config);

/// PA facet count for level K.
inline int pa_facets(int K) { return 1 << (K + 1); }

struct CriticalNScan {
  std::optional<int> n_crit;               // first feasible facet count
  std::vector<std::pair<int, bool>> trace;  // (N, feasible) in scan order
};

/// Doubles the PA facet count from N = 4 until the relaxation is feasible.
CriticalNScan critical_n_scan(const NetworkCase& c, int k_limit = 6, double time_limit = 300.0);

struct BenchOptions {
  std::vector<std::string> cases;  // names ("case5") or paths
  std::filesystem::path case_dir;
  std::filesystem::path out_dir = "bench_out";
  double time_limit = 600.0;
  double gap = 1e-3;
  bool extended = false;  // adds IEEE 118 and its static N = 128 runs
};

/// Resolves "case5" / "case30" / "case118" or a path against `dir`.
std::filesystem::path resolve_case(const std::string& name, const std::filesystem::path& dir);

/// Directory from RFOPF_CASE_DIR, else `fallback`.
std::filesystem::path default_case_dir(const std::filesystem::path& fallback);

/// Runs the table matrix and writes one CSV per table plus runs.csv into
/// options.out_dir. Failed runs are recorded and the harness continues.
/// Returns the number of runs that ended with an error.
int run_bench(const BenchOptions& options, std::ostream& log);

std::string csv_header(const RunRow&);
std::string csv_line(const RunRow& r);

}  // namespace rfopf
