// Command-line solver: one case, one method; JSON report plus conic-error CSV.

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rfopf/bench.hpp"
#include "rfopf/solve.hpp"

using namespace rfopf;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitNoInput = 66;

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return 0;
    case SolveStatus::Infeasible: return 2;
    case SolveStatus::TimeLimit:
    case SolveStatus::NodeLimit: return 3;
    case SolveStatus::NumericalError: return 1;
  }
  return 1;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_error_csv(const std::filesystem::path& path, const NetworkCase& c, const BfmModel& bm,
                     const std::vector<double>& x, double eta) {
  const auto e = conic_errors(x, bm.blocks, eta);
  std::ofstream f(path);
  f << "branch,from_bus,to_bus,rel_4d,abs_4d,rel_power,rel_current_voltage\n";
  std::vector<double> rel_p(c.branches.size(), NAN), rel_iv(c.branches.size(), NAN);
  for (const auto& be : e.blocks) {
    const auto& b = bm.blocks[static_cast<std::size_t>(be.block)];
    (b.kind == ConeKind::Power ? rel_p : rel_iv)[static_cast<std::size_t>(b.branch)] = be.rel;
  }
  f.precision(10);
  for (const auto& br : e.branches) {
    const auto& line = c.branches[static_cast<std::size_t>(br.branch)];
    const auto l = static_cast<std::size_t>(br.branch);
    f << br.branch << ',' << line.from_bus << ',' << line.to_bus << ',' << br.rel << ',' << br.abs << ',' << rel_p[l] << ','
      << rel_iv[l] << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed AC-OPF solver (rotation-and-fold pyramidal relaxations)"};
  std::string case_arg, method = "pr", out_dir = ".", warm_file, export_warm;
  std::optional<int> k, k_max;
  int k_init = 0;
  double gap = 1e-3, time_limit = 600.0;
  std::optional<double> eps;
  std::uint64_t seed = 0;
  long node_limit = 0;
  bool warm = false, post = false, quiet = false;

  app.add_option("case", case_arg, "MATPOWER case file, or case5 / case30 / case118")->required();
  app.add_option("--method", method, "socp | pa | pr | qpr | dpr | dqpr")
      ->check(CLI::IsMember({"socp", "pa", "pr", "qpr", "dpr", "dqpr"}, CLI::ignore_case));
  app.add_option("--k", k, "R&F depth K (static methods; K_max for dynamic ones)");
  app.add_option("--kmax", k_max, "maximum depth for dynamic methods");
  app.add_option("--kinit", k_init, "initial depth for dynamic methods");
  app.add_option("--gap", gap, "relative optimality gap")->check(CLI::NonNegativeNumber);
  app.add_option("--time-limit", time_limit, "seconds")->check(CLI::PositiveNumber);
  app.add_option("--eps", eps, "conic error tolerance of the dynamic methods")->check(CLI::NonNegativeNumber);
  app.add_flag("--warm-start", warm, "inject a Newton power-flow warm start");
  app.add_option("--warm-start-file", warm_file, "read the warm start from JSON instead");
  app.add_option("--export-warm-start", export_warm, "write the computed warm start as JSON");
  app.add_flag("--postprocess", post, "LNS post-processing of the incumbent");
  app.add_option("--seed", seed, "seed (recorded; the solver is deterministic)");
  app.add_option("--node-limit", node_limit, "0: unlimited");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("-q,--quiet", quiet, "no summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  SolveConfig cfg;
  try {
    cfg.method = parse_method(method);
    for (auto& ch : method) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  if (k_max) cfg.k_max = *k_max;
  if (k) cfg.k_max = *k;
  if (cfg.k_max < 0 || cfg.k_max > 30 || k_init < 0 || k_init > cfg.k_max) {
    std::cerr << "invalid depth: need 0 <= kinit <= k <= 30\n";
    return kExitUsage;
  }
  if (cfg.method == Method::PA && cfg.k_max < 1) {
    std::cerr << "pa needs k >= 1\n";
    return kExitUsage;
  }
  cfg.k_init = k_init;
  cfg.gap = gap;
  cfg.time_limit = time_limit;
  cfg.eps = eps;
  cfg.seed = seed;
  cfg.node_limit = node_limit;
  cfg.warm_start = warm;
  cfg.postprocess = post;

  NetworkCase c;
  try {
    c = load_case(resolve_case(case_arg, default_case_dir(RFOPF_DATA_DIR)));
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitNoInput;
  }

  try {
    std::optional<std::string> warm_json;
    if (!warm_file.empty()) warm_json = read_file(warm_file);
    auto out = solve_case(c, cfg, warm_json);
    auto& rep = out.result.report;

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const std::string stem = c.name.empty() ? "case" : c.name;
    const auto base = dir / (stem + "_" + method);
    if (out.result.incumbent) {
      rep.errors = conic_errors(out.result.incumbent->x, out.model.blocks, cfg.eta);
      write_error_csv(base.string() + "_errors.csv", c, out.model, out.result.incumbent->x, cfg.eta);
    }
    {
      std::ofstream f(base.string() + "_report.json");
      f << rep.to_json() << "\n";
    }
    if (!out.cuts.empty()) {
      std::ofstream f(base.string() + "_cuts.jsonl");
      for (const auto& q : out.cuts) f << q.to_json() << "\n";
    }
    if (!export_warm.empty() && out.warm && out.warm->ok()) {
      std::ofstream f(export_warm);
      f << warm_start_to_json(out.model, out.warm->x) << "\n";
    }
    if (!quiet) {
      std::cout << "case " << stem << "  method " << method;
      if (cfg.method != Method::SOCP) std::cout << "  K " << cfg.k_max;
      std::cout << "\n"
                << "status " << to_string(rep.status) << "  objective " << std::setprecision(10) << rep.objective
                << "  bound " << rep.bound << "  gap " << std::setprecision(4) << rep.gap << "\n"
                << "nodes " << rep.nodes << "  checks " << rep.checks << "  time " << rep.wall_time << " s\n";
      if (rep.errors)
        std::cout << "max rel 4-D error " << 100.0 * rep.errors->rel_inf << " %  abs_inf " << rep.errors->abs_inf
                  << "  abs_1 " << rep.errors->abs_1 << "\n";
      for (const auto& n : rep.notes) std::cout << "note: " << n << "\n";
      std::cout << "report " << base.string() << "_report.json\n";
    }
    return exit_code(rep.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
