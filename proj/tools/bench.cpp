// Benchmark harness: writes the result tables as CSV.

#include <CLI11.hpp>
#include <iostream>

#include "rfopf/bench.hpp"

using namespace rfopf;

int main(int argc, char** argv) {
  CLI::App app{"Benchmark tables for the pyramidal relaxations"};
  BenchOptions opt;
  std::string out = "bench_out", dir;
  app.add_option("cases", opt.cases, "case names or files (default: case5 case30)");
  app.add_option("--case-dir", dir, "directory of case files (default: $RFOPF_CASE_DIR or the bundled data)");
  app.add_option("--out", out, "output directory");
  app.add_option("--time-limit", opt.time_limit, "seconds per run")->check(CLI::PositiveNumber);
  app.add_option("--gap", opt.gap, "relative optimality gap")->check(CLI::NonNegativeNumber);
  app.add_flag("--extended", opt.extended, "include IEEE 118 and the N = 128 static runs on it");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }
  opt.out_dir = out;
  opt.case_dir = dir.empty() ? default_case_dir(RFOPF_DATA_DIR) : std::filesystem::path(dir);
  try {
    const int failed = run_bench(opt, std::cerr);
    std::cout << "tables written to " << opt.out_dir.string() << (failed ? " (" + std::to_string(failed) + " failed runs)" : "")
              << "\n";
    return failed ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
