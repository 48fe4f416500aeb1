#include "rfopf/case_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

namespace rfopf {

namespace {

constexpr double kPi = std::numbers::pi;

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

struct MatrixRow {
  int line = 0;
  std::vector<double> values;
};

struct Statement {
  int line = 0;
  std::string scalar;            // raw text for scalar assignments
  std::vector<MatrixRow> rows;   // for matrix assignments
  bool is_matrix = false;
};

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  bool in_string = false;
  for (char ch : text) {
    if (ch == '\n') {
      in_comment = false;
      in_string = false;
      out.push_back(ch);
      continue;
    }
    if (in_comment) continue;
    if (ch == '\'') in_string = !in_string;
    if (ch == '%' && !in_string) {
      in_comment = true;
      continue;
    }
    out.push_back(ch);
  }
  return out;
}

std::optional<double> parse_number(std::string_view tok) {
  if (tok.empty()) return std::nullopt;
  std::string lower(tok);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "inf" || lower == "+inf") return std::numeric_limits<double>::infinity();
  if (lower == "-inf") return -std::numeric_limits<double>::infinity();
  if (lower == "nan") return std::numeric_limits<double>::quiet_NaN();
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (*first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::vector<MatrixRow> parse_matrix_body(std::string_view body, int first_line) {
  std::vector<MatrixRow> rows;
  MatrixRow current;
  int line = first_line;
  current.line = line;
  std::string token;
  auto flush_token = [&] {
    if (token.empty()) return;
    auto v = parse_number(token);
    if (!v) throw ParseError(line, "malformed matrix entry '" + token + "'");
    current.values.push_back(*v);
    token.clear();
  };
  auto flush_row = [&] {
    flush_token();
    if (!current.values.empty()) rows.push_back(std::move(current));
    current = MatrixRow{};
    current.line = line;
  };
  for (char ch : body) {
    if (ch == '\n') {
      flush_row();
      ++line;
      current.line = line;
    } else if (ch == ';') {
      flush_row();
    } else if (ch == ' ' || ch == '\t' || ch == ',' || ch == '\r') {
      flush_token();
      if (current.values.empty()) current.line = line;
    } else {
      token.push_back(ch);
    }
  }
  flush_row();
  return rows;
}

std::map<std::string, Statement> scan_statements(const std::string& text, std::string* function_name) {
  std::map<std::string, Statement> out;
  std::size_t pos = 0;
  auto line_of = [&](std::size_t p) {
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(p), '\n'));
  };
  if (auto f = text.find("function"); f != std::string::npos) {
    auto eq = text.find('=', f);
    auto nl = text.find('\n', f);
    if (eq != std::string::npos && eq < nl) {
      std::string name = text.substr(eq + 1, nl - eq - 1);
      name.erase(std::remove_if(name.begin(), name.end(), [](unsigned char c) { return std::isspace(c); }),
                 name.end());
      *function_name = name;
    }
  }
  while ((pos = text.find("mpc.", pos)) != std::string::npos) {
    std::size_t p = pos + 4;
    std::size_t id_end = p;
    while (id_end < text.size() && (std::isalnum(static_cast<unsigned char>(text[id_end])) || text[id_end] == '_'))
      ++id_end;
    std::string ident = text.substr(p, id_end - p);
    p = id_end;
    while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) ++p;
    if (p >= text.size() || text[p] != '=') {
      pos = p;
      continue;
    }
    ++p;
    while (p < text.size() && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
    Statement st;
    st.line = line_of(pos);
    if (p < text.size() && (text[p] == '[' || text[p] == '{')) {
      const char close = text[p] == '[' ? ']' : '}';
      const bool numeric = text[p] == '[';
      auto end = text.find(close, p + 1);
      if (end == std::string::npos) throw ParseError(st.line, "unterminated matrix for mpc." + ident);
      if (numeric) {
        st.is_matrix = true;
        st.rows = parse_matrix_body(std::string_view(text).substr(p + 1, end - p - 1), line_of(p + 1));
      }
      pos = end + 1;
    } else {
      auto end = text.find_first_of(";\n", p);
      if (end == std::string::npos) end = text.size();
      st.scalar = text.substr(p, end - p);
      pos = end;
    }
    out[ident] = std::move(st);
  }
  return out;
}

const Statement& require(const std::map<std::string, Statement>& s, const std::string& name) {
  auto it = s.find(name);
  if (it == s.end() || (name != "baseMVA" && !it->second.is_matrix))
    throw ParseError(0, "missing mpc." + name);
  return it->second;
}

void require_columns(const MatrixRow& row, std::size_t n, const char* what) {
  if (row.values.size() < n)
    throw ParseError(row.line, std::string(what) + " row has " + std::to_string(row.values.size()) +
                                   " columns, expected at least " + std::to_string(n));
}

int as_label(const MatrixRow& row, double v) {
  if (!std::isfinite(v) || v != std::floor(v)) throw ParseError(row.line, "non-integer bus label");
  return static_cast<int>(v);
}

// Decimal text m such that parsing m and applying `decode` reproduces value.
template <class Decode>
std::string encode_exact(double value, double guess, Decode decode) {
  char buf[40];
  double m = guess;
  double lo = guess;
  double hi = guess;
  for (int step = 0; step < 16; ++step) {
    for (double cand : {m, lo, hi}) {
      std::snprintf(buf, sizeof buf, "%.17g", cand);
      double parsed = std::strtod(buf, nullptr);
      if (decode(parsed) == value) return buf;
    }
    lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
    hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
  }
  std::snprintf(buf, sizeof buf, "%.17g", guess);
  return buf;
}

std::string per_unit_text(double value, double base) {
  if (!std::isfinite(value)) return value > 0 ? "Inf" : "-Inf";
  return encode_exact(value, value * base, [base](double m) { return m / base; });
}

std::string cost_text(double value, double base) {
  return encode_exact(value, value / base, [base](double m) { return m * base; });
}

std::string angle_text(double rad) {
  return encode_exact(rad, rad * 180.0 / kPi, [](double m) {
    return std::clamp(deg_to_rad(m), -kMaxAngleDifference, kMaxAngleDifference);
  });
}

std::string plain(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ParseError::ParseError(int line, const std::string& what)
    : CaseError("line " + std::to_string(line) + ": " + what), line_(line) {}

std::size_t NetworkCase::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return i;
  throw ValidationError("unknown bus " + std::to_string(id));
}

std::size_t NetworkCase::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].type == BusType::Slack) return i;
  throw ValidationError("case has no slack bus");
}

NetworkCase parse_case(std::string_view raw, std::string name) {
  const std::string text = strip_comments(raw);
  std::string function_name;
  auto statements = scan_statements(text, &function_name);

  NetworkCase c;
  c.name = !name.empty() ? std::move(name) : function_name;

  const auto& base_st = require(statements, "baseMVA");
  auto base = parse_number(std::string_view(base_st.scalar).substr(
      0, base_st.scalar.find_last_not_of(" \t\r") + 1));
  if (!base || !(*base > 0)) throw ParseError(base_st.line, "invalid baseMVA '" + base_st.scalar + "'");
  c.base_mva = *base;
  const double mva = c.base_mva;

  for (const auto& row : require(statements, "bus").rows) {
    require_columns(row, 13, "bus");
    const auto& v = row.values;
    Bus b;
    b.id = as_label(row, v[0]);
    const int type = static_cast<int>(v[1]);
    if (type < 1 || type > 4 || v[1] != type) throw ParseError(row.line, "invalid bus type");
    b.type = static_cast<BusType>(type);
    b.p_d = v[2] / mva;
    b.q_d = v[3] / mva;
    b.g_s = v[4] / mva;
    b.b_s = v[5] / mva;
    b.v_set = v[7];
    b.v_max = v[11];
    b.v_min = v[12];
    c.buses.push_back(b);
  }

  std::map<int, int> seen;
  for (const auto& b : c.buses)
    if (++seen[b.id] > 1) throw ValidationError("duplicate bus label " + std::to_string(b.id));

  const auto& gen_rows = require(statements, "gen").rows;
  for (const auto& row : gen_rows) {
    require_columns(row, 10, "gen");
    const auto& v = row.values;
    Generator g;
    g.bus = as_label(row, v[0]);
    if (!seen.count(g.bus)) throw ParseError(row.line, "generator at unknown bus " + std::to_string(g.bus));
    g.q_max = v[3] / mva;
    g.q_min = v[4] / mva;
    g.v_set = v[5];
    g.status = v[7] > 0;
    g.p_max = v[8] / mva;
    g.p_min = v[9] / mva;
    c.generators.push_back(g);
  }

  for (const auto& row : require(statements, "branch").rows) {
    require_columns(row, 11, "branch");
    const auto& v = row.values;
    Branch br;
    br.from_bus = as_label(row, v[0]);
    br.to_bus = as_label(row, v[1]);
    if (!seen.count(br.from_bus) || !seen.count(br.to_bus))
      throw ParseError(row.line, "branch references unknown bus");
    br.r = v[2];
    br.x = v[3];
    br.b_c = v[4];
    br.s_max = v[5] / mva;
    br.tap = v[8] == 0.0 ? 1.0 : v[8];
    if (v[9] != 0.0) throw ParseError(row.line, "phase-shifting transformers are not supported");
    br.in_service = v[10] > 0;
    const double amin = v.size() > 11 ? v[11] : -360.0;
    const double amax = v.size() > 12 ? v[12] : 360.0;
    br.ang_min = std::clamp(deg_to_rad(amin), -kMaxAngleDifference, kMaxAngleDifference);
    br.ang_max = std::clamp(deg_to_rad(amax), -kMaxAngleDifference, kMaxAngleDifference);
    c.branches.push_back(br);
  }

  const auto& cost_rows = require(statements, "gencost").rows;
  if (cost_rows.size() < c.generators.size())
    throw ParseError(require(statements, "gencost").line, "fewer gencost rows than generators");
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const auto& row = cost_rows[g];
    require_columns(row, 4, "gencost");
    const auto& v = row.values;
    if (v[0] == 1) throw UnsupportedCostError("line " + std::to_string(row.line) + ": piecewise-linear cost is not supported");
    if (v[0] != 2) throw ParseError(row.line, "unknown cost model");
    const int n = static_cast<int>(v[3]);
    if (n < 0 || v.size() < static_cast<std::size_t>(4 + n)) throw ParseError(row.line, "gencost row too short");
    // coefficients are listed highest degree first
    for (int k = 0; k < n; ++k) {
      const int degree = n - 1 - k;
      const double coef = v[4 + static_cast<std::size_t>(k)];
      if (degree >= 2 && coef != 0.0)
        throw UnsupportedCostError("line " + std::to_string(row.line) +
                                   ": nonlinear generator cost (degree " + std::to_string(degree) + ")");
      if (degree == 1) c.generators[g].c1 = coef * mva;
      if (degree == 0) c.generators[g].c0 = coef;
    }
  }

  if (std::none_of(c.buses.begin(), c.buses.end(), [](const Bus& b) { return b.type == BusType::Slack; }))
    throw ValidationError("case has no slack bus");
  return c;
}

NetworkCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CaseError("cannot open case file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str(), path.stem().string());
}

std::string write_case(const NetworkCase& c) {
  std::ostringstream os;
  const double mva = c.base_mva;
  os << "function mpc = " << (c.name.empty() ? "case" : c.name) << "\n";
  os << "mpc.version = '2';\n";
  os << "mpc.baseMVA = " << plain(mva) << ";\n\n";
  os << "%% bus data\n%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\nmpc.bus = [\n";
  for (const auto& b : c.buses) {
    os << '\t' << b.id << '\t' << static_cast<int>(b.type) << '\t' << per_unit_text(b.p_d, mva) << '\t'
       << per_unit_text(b.q_d, mva) << '\t' << per_unit_text(b.g_s, mva) << '\t' << per_unit_text(b.b_s, mva)
       << "\t1\t" << plain(b.v_set) << "\t0\t0\t1\t" << plain(b.v_max) << '\t' << plain(b.v_min) << ";\n";
  }
  os << "];\n\n%% generator data\n%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\nmpc.gen = [\n";
  for (const auto& g : c.generators) {
    os << '\t' << g.bus << "\t0\t0\t" << per_unit_text(g.q_max, mva) << '\t' << per_unit_text(g.q_min, mva) << '\t'
       << plain(g.v_set) << '\t' << plain(mva) << '\t' << (g.status ? 1 : 0) << '\t'
       << per_unit_text(g.p_max, mva) << '\t' << per_unit_text(g.p_min, mva) << ";\n";
  }
  os << "];\n\n%% branch data\n"
        "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\nmpc.branch = [\n";
  for (const auto& br : c.branches) {
    const std::string rate = per_unit_text(br.s_max, mva);
    os << '\t' << br.from_bus << '\t' << br.to_bus << '\t' << plain(br.r) << '\t' << plain(br.x) << '\t'
       << plain(br.b_c) << '\t' << rate << '\t' << rate << '\t' << rate << '\t'
       << (br.tap == 1.0 ? std::string("0") : plain(br.tap)) << "\t0\t" << (br.in_service ? 1 : 0) << '\t'
       << angle_text(br.ang_min) << '\t' << angle_text(br.ang_max) << ";\n";
  }
  os << "];\n\n%% generator cost data\n%\t2\tstartup\tshutdown\tn\tc(n-1)\t...\tc0\nmpc.gencost = [\n";
  for (const auto& g : c.generators)
    os << "\t2\t0\t0\t2\t" << cost_text(g.c1, mva) << '\t' << plain(g.c0) << ";\n";
  os << "];\n";
  return os.str();
}

double unlimited_flow_bound(const NetworkCase& c) {
  double load = 0.0;
  for (const auto& b : c.buses) load += std::abs(b.p_d) + std::abs(b.q_d);
  double gen = 0.0;
  for (const auto& g : c.generators)
    if (g.status) gen += g.p_max;
  return 2.0 * load + gen;
}

double flow_limit(const NetworkCase& c, const Branch& br) {
  return br.s_max > 0.0 ? br.s_max : unlimited_flow_bound(c);
}

std::vector<Diagnostic> validate_case(const NetworkCase& c) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string m) { out.push_back({Severity::Error, std::move(m)}); };
  auto warn = [&](std::string m) { out.push_back({Severity::Warning, std::move(m)}); };

  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < c.buses.size(); ++i) index[c.buses[i].id] = i;

  int slack = 0;
  for (const auto& b : c.buses) {
    const std::string tag = "bus " + std::to_string(b.id);
    if (b.type == BusType::Slack) ++slack;
    if (!(b.v_min > 0.0)) error(tag + ": v_min must be positive");
    if (b.v_min > b.v_max) error(tag + ": v_min > v_max");
    if (!std::isfinite(b.p_d) || !std::isfinite(b.q_d)) error(tag + ": non-finite demand");
  }
  if (slack != 1) error("expected exactly one slack bus, found " + std::to_string(slack));

  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const auto& gen = c.generators[g];
    const std::string tag = "generator " + std::to_string(g + 1);
    if (!index.count(gen.bus)) error(tag + ": unknown bus " + std::to_string(gen.bus));
    if (gen.p_min > gen.p_max) error(tag + ": p_min > p_max");
    if (gen.q_min > gen.q_max) error(tag + ": q_min > q_max");
  }

  const double big = unlimited_flow_bound(c);
  for (std::size_t l = 0; l < c.branches.size(); ++l) {
    const auto& br = c.branches[l];
    const std::string tag = "branch " + std::to_string(l + 1) + " (" + std::to_string(br.from_bus) + "-" +
                            std::to_string(br.to_bus) + ")";
    if (!index.count(br.from_bus) || !index.count(br.to_bus)) error(tag + ": unknown endpoint");
    if (br.r < 0.0) error(tag + ": negative resistance");
    if (br.r == 0.0 && br.x == 0.0) error(tag + ": zero impedance");
    if (!(br.tap > 0.0)) error(tag + ": non-positive tap ratio");
    if (br.ang_min > br.ang_max) error(tag + ": ang_min > ang_max");
    if (br.ang_min > 0.0 || br.ang_max < 0.0) error(tag + ": angle window excludes zero");
    if (br.in_service && br.s_max == 0.0) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", big);
      warn(tag + ": no flow limit, using s_max = " + std::string(buf) + " p.u.");
    }
  }

  // connectivity over in-service branches
  if (!c.buses.empty()) {
    std::vector<std::size_t> parent(c.buses.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (const auto& br : c.branches) {
      if (!br.in_service || !index.count(br.from_bus) || !index.count(br.to_bus)) continue;
      parent[find(index[br.from_bus])] = find(index[br.to_bus]);
    }
    std::size_t components = 0;
    for (std::size_t i = 0; i < parent.size(); ++i)
      if (find(i) == i) ++components;
    if (components > 1) warn("network has " + std::to_string(components) + " disconnected components");
  }
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

}  // namespace rfopf
