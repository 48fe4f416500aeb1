#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rfopf {

enum class BusType { PQ = 1, PV = 2, Slack = 3, Isolated = 4 };

// All electrical quantities are per-unit on NetworkCase::base_mva, angles in
// radians.
struct Bus {
  int id = 0;
  BusType type = BusType::PQ;
  double p_d = 0.0;
  double q_d = 0.0;
  double g_s = 0.0;
  double b_s = 0.0;
  double v_min = 0.9;
  double v_max = 1.1;
  double v_set = 1.0;
};

struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  double b_c = 0.0;
  double tap = 1.0;
  double s_max = 0.0;  // 0 means "no limit" in the source format
  double ang_min = 0.0;
  double ang_max = 0.0;
  bool in_service = true;
};

struct Generator {
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  double c1 = 0.0;  // $ per p.u.-hour
  double c0 = 0.0;  // $ per hour
  double v_set = 1.0;
  bool status = true;
};

struct NetworkCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;

  /// Position of the bus with label `id` in `buses`; throws if absent.
  std::size_t bus_index(int id) const;
  std::size_t slack_index() const;
};

class CaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public CaseError {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

class UnsupportedCostError : public CaseError {
 public:
  using CaseError::CaseError;
};

class ValidationError : public CaseError {
 public:
  using CaseError::CaseError;
};

/// Parses MATPOWER case text (mpc.baseMVA, mpc.bus, mpc.gen, mpc.branch,
/// mpc.gencost). Only polynomial costs of degree <= 1 are accepted.
NetworkCase parse_case(std::string_view text, std::string name = {});
NetworkCase load_case(const std::filesystem::path& path);

/// Canonical MATPOWER text; parse_case(write_case(c)) reproduces c exactly.
std::string write_case(const NetworkCase& c);

enum class Severity { Warning, Error };

struct Diagnostic {
  Severity severity = Severity::Warning;
  std::string message;
};

std::vector<Diagnostic> validate_case(const NetworkCase& c);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Bound substituted for s_max = 0: twice the total |p_d|+|q_d| plus the
/// total generator p_max.
double unlimited_flow_bound(const NetworkCase& c);
/// Branch flow limit with the s_max = 0 substitution applied.
double flow_limit(const NetworkCase& c, const Branch& br);

/// Angle limits are clipped to +/- this value (radians).
inline constexpr double kMaxAngleDifference = 89.9 * 3.14159265358979323846 / 180.0;

}  // namespace rfopf
