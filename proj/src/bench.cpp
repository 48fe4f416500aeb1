#include "rfopf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

namespace rfopf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v, int prec = 6) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace

RunRow run_method(const NetworkCase& c, const std::string& instance, const SolveConfig& config) {
  RunRow row;
  row.instance = instance;
  row.method = lower(to_string(config.method));
  row.k = config.k_max;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    SolveConfig solve_cfg = config;
    solve_cfg.postprocess = false;
    auto out = solve_case(c, solve_cfg);
    const auto& rep = out.result.report;
    row.status = to_string(rep.status);
    row.time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.objective = out.result.incumbent ? rep.objective : kNaN;
    row.bound = rep.bound;
    row.gap = rep.gap;
    row.checks = rep.checks;
    row.nodes = rep.nodes;
    row.avg_rnf = rep.avg_rnf();
    row.avg_oc = rep.avg_outer_cuts();
    if (out.result.incumbent) {
      const auto e = conic_errors(out.result.incumbent->x, out.model.blocks, config.eta);
      row.rel_inf = e.rel_inf;
      row.abs_inf = e.abs_inf;
      row.abs_1 = e.abs_1;
      if (config.postprocess && config.method != Method::SOCP) {
        const auto p0 = std::chrono::steady_clock::now();
        auto lns = lns_postprocess(out.model.model, out.model.blocks, out.result.incumbent->x, config);
        row.lns_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - p0).count();
        row.lns_applicable = lns.applicable;
        row.lns_rel_inf = lns.errors.rel_inf;
        row.lns_abs_inf = lns.errors.abs_inf;
        row.lns_abs_1 = lns.errors.abs_1;
      }
    } else {
      row.rel_inf = row.abs_inf = row.abs_1 = kNaN;
    }
  } catch (const std::exception& ex) {
    row.status = "error";
    row.error = ex.what();
    row.objective = row.bound = row.gap = row.rel_inf = row.abs_inf = row.abs_1 = kNaN;
  }
  return row;
}

CriticalNScan critical_n_scan(const NetworkCase& c, int k_limit, double time_limit) {
  CriticalNScan scan;
  for (int K = 1; K <= k_limit; ++K) {
    SolveConfig cfg;
    cfg.method = Method::PA;
    cfg.k_max = K;
    cfg.time_limit = time_limit;
    auto bm = build_relaxation(c, Method::PA, K);
    auto r = branch_and_cut(bm.model, bm.blocks, nullptr, cfg);
    const bool feasible = r.incumbent.has_value();
    scan.trace.emplace_back(pa_facets(K), feasible);
    if (feasible) {
      scan.n_crit = pa_facets(K);
      break;
    }
    if (r.report.status != SolveStatus::Infeasible) break;  // undecided within the limits
  }
  return scan;
}

std::filesystem::path resolve_case(const std::string& name, const std::filesystem::path& dir) {
  static const std::map<std::string, std::string> known{
      {"case5", "pglib_opf_case5_pjm.m"}, {"case30", "case30_ieee.m"}, {"case118", "case118_ieee.m"}};
  if (auto it = known.find(lower(name)); it != known.end()) return dir / it->second;
  std::filesystem::path p(name);
  if (std::filesystem::exists(p)) return p;
  return dir / p;
}

std::filesystem::path default_case_dir(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("RFOPF_CASE_DIR"); env && *env) return env;
  return fallback;
}

std::string csv_header(const RunRow&) {
  return "instance,method,k,status,objective,bound,gap,time_s,rel_inf_pct,abs_inf,abs_1,avg_rnf,avg_oc,checks,nodes,error";
}

std::string csv_line(const RunRow& r) {
  std::string err = r.error;
  for (auto& ch : err)
    if (ch == ',' || ch == '\n') ch = ';';
  std::ostringstream os;
  os << r.instance << ',' << r.method << ',' << r.k << ',' << r.status << ',' << fmt(r.objective, 10) << ','
     << fmt(r.bound, 10) << ',' << fmt(r.gap) << ',' << fmt(r.time, 4) << ',' << fmt(100.0 * r.rel_inf) << ','
     << fmt(r.abs_inf) << ',' << fmt(r.abs_1) << ',' << fmt(r.avg_rnf, 4) << ',' << fmt(r.avg_oc, 4) << ','
     << r.checks << ',' << r.nodes << ',' << err;
  return os.str();
}

int run_bench(const BenchOptions& options, std::ostream& log) {
  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir);
  std::vector<std::string> names = options.cases;
  if (names.empty()) names = {"case5", "case30"};
  if (options.extended && std::find(names.begin(), names.end(), "case118") == names.end()) names.push_back("case118");

  std::map<std::tuple<std::string, Method, int, bool>, RunRow> cache;
  std::vector<RunRow> all;
  int errors = 0;
  auto open = [&](const std::string& file) {
    std::ofstream f(options.out_dir / file);
    if (!f) throw std::runtime_error("cannot write " + (options.out_dir / file).string());
    return f;
  };

  struct Instance {
    std::string name;
    std::optional<NetworkCase> c;
    std::string error;
  };
  std::vector<Instance> inst;
  for (const auto& n : names) {
    Instance in{fs::path(n).stem().string(), std::nullopt, {}};
    try {
      in.c = load_case(resolve_case(n, options.case_dir));
    } catch (const std::exception& ex) {
      in.error = ex.what();
      log << "[bench] " << n << ": " << in.error << "\n";
      ++errors;
    }
    inst.push_back(std::move(in));
  }

  auto run = [&](const Instance& in, Method m, int K, bool post = false) -> const RunRow& {
    const auto key = std::make_tuple(in.name, m, K, post);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    SolveConfig cfg;
    cfg.method = m;
    cfg.k_max = K;
    cfg.gap = options.gap;
    cfg.time_limit = options.time_limit;
    cfg.postprocess = post;
    RunRow row = run_method(*in.c, in.name, cfg);
    if (!row.error.empty()) ++errors;
    log << "[bench] " << csv_line(row) << "\n" << std::flush;
    all.push_back(row);
    return cache.emplace(key, std::move(row)).first->second;
  };

  // critical PA facet counts
  {
    auto f = open("table1_critical_n.csv");
    f << "instance,n_crit,scan\n";
    for (const auto& in : inst) {
      if (!in.c) {
        f << in.name << ",," << "error\n";
        continue;
      }
      auto s = critical_n_scan(*in.c, 6, options.time_limit);
      f << in.name << ',' << (s.n_crit ? std::to_string(*s.n_crit) : "") << ',';
      for (std::size_t i = 0; i < s.trace.size(); ++i)
        f << (i ? ";" : "") << s.trace[i].first << ':' << (s.trace[i].second ? "feasible" : "infeasible");
      f << "\n";
      log << "[bench] critical N " << in.name << " = " << (s.n_crit ? std::to_string(*s.n_crit) : "none") << "\n";
    }
  }

  // static relaxations at N = 8 and N = 128
  {
    auto f = open("table2_static.csv");
    f << "instance,method,n,k,status,objective,rel_inf_pct,abs_inf,abs_1,time_s\n";
    auto emit = [&](const RunRow& r, int n) {
      f << r.instance << ',' << r.method << ',' << n << ',' << r.k << ',' << r.status << ',' << fmt(r.objective, 10) << ','
        << fmt(100.0 * r.rel_inf) << ',' << fmt(r.abs_inf) << ',' << fmt(r.abs_1) << ',' << fmt(r.time, 4) << "\n";
    };
    for (const auto& in : inst) {
      if (!in.c) continue;
      const bool big = in.c->buses.size() > 100;
      emit(run(in, Method::SOCP, 0), 0);
      std::vector<int> levels{2};
      if (!big || options.extended) levels.push_back(6);
      for (int K : levels)
        for (Method m : {Method::PA, Method::PR, Method::QPR}) emit(run(in, m, K), pa_facets(K));
    }
  }

  // dynamic cut statistics at K_max = 5
  {
    auto f = open("table3_cut_stats.csv");
    f << "instance,dpr_avg_rnf,dpr_avg_oc,dpr_checks,dqpr_avg_rnf,dqpr_avg_oc,dqpr_checks\n";
    for (const auto& in : inst) {
      if (!in.c) continue;
      const auto& d = run(in, Method::DPR, 5);
      const auto& q = run(in, Method::DQPR, 5);
      f << in.name << ',' << fmt(d.avg_rnf, 4) << ',' << fmt(d.avg_oc, 4) << ',' << d.checks << ',' << fmt(q.avg_rnf, 4)
        << ',' << fmt(q.avg_oc, 4) << ',' << q.checks << "\n";
    }
  }

  // static vs dynamic
  auto compare = [&](const std::string& file, Method stat, Method dyn) {
    auto f = open(file);
    f << "instance,k_max," << lower(to_string(stat)) << "_obj," << lower(to_string(dyn)) << "_obj,delta_pct,"
      << lower(to_string(stat)) << "_time_s," << lower(to_string(dyn)) << "_time_s,ratio\n";
    for (const auto& in : inst) {
      if (!in.c) continue;
      for (int K : {2, 5}) {
        const auto& s = run(in, stat, K);
        const auto& d = run(in, dyn, K);
        const double delta = 100.0 * (d.objective - s.objective) / s.objective;
        f << in.name << ',' << K << ',' << fmt(s.objective, 10) << ',' << fmt(d.objective, 10) << ',' << fmt(delta, 4)
          << ',' << fmt(s.time, 4) << ',' << fmt(d.time, 4) << ',' << fmt(s.time / d.time, 3) << "\n";
      }
    }
  };
  compare("table4_pr_dpr.csv", Method::PR, Method::DPR);
  compare("table5_qpr_dqpr.csv", Method::QPR, Method::DQPR);

  // LNS post-processing at K_max = 2
  {
    auto f = open("table6_lns.csv");
    f << "instance,applicable,rel_inf_before_pct,rel_inf_after_pct,abs_inf_before,abs_inf_after,abs_1_before,abs_1_after,"
         "t_pp_s\n";
    for (const auto& in : inst) {
      if (!in.c) continue;
      const auto& r = run(in, Method::DPR, 2, true);
      f << in.name << ',' << (r.lns_applicable ? "yes" : "no") << ',' << fmt(100.0 * r.rel_inf) << ','
        << (r.lns_applicable ? fmt(100.0 * r.lns_rel_inf) : "N/A") << ',' << fmt(r.abs_inf) << ','
        << (r.lns_applicable ? fmt(r.lns_abs_inf) : "N/A") << ',' << fmt(r.abs_1) << ','
        << (r.lns_applicable ? fmt(r.lns_abs_1) : "N/A") << ',' << (r.lns_applicable ? fmt(r.lns_time, 4) : "N/A")
        << "\n";
    }
  }

  // time vs maximum relative error
  {
    auto f = open("fig7_scatter.csv");
    f << "instance,method,k,status,time_s,rel_inf_pct\n";
    for (const auto& in : inst) {
      if (!in.c) continue;
      const auto& s = run(in, Method::SOCP, 0);
      f << in.name << ",socp,0," << s.status << ',' << fmt(s.time, 4) << ',' << fmt(100.0 * s.rel_inf) << "\n";
      for (Method m : {Method::PA, Method::PR, Method::DPR, Method::QPR, Method::DQPR})
        for (int K : {1, 3, 5}) {
          const auto& r = run(in, m, K);
          f << in.name << ',' << r.method << ',' << K << ',' << r.status << ',' << fmt(r.time, 4) << ','
            << fmt(100.0 * r.rel_inf) << "\n";
        }
    }
  }

  auto f = open("runs.csv");
  f << csv_header(RunRow{}) << "\n";
  for (const auto& r : all) f << csv_line(r) << "\n";
  return errors;
}

}  // namespace rfopf
