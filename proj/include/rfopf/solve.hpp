#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rfopf/dynamic_cuts.hpp"
#include "rfopf/warm_lns.hpp"

namespace rfopf {

struct SolveOutcome {
  BfmModel model;  // final model (grown by dynamic cuts)
  BncResult result;
  std::vector<CutRequest> cuts;
  std::optional<WarmStart> warm;
  std::optional<LnsResult> lns;
};

/// Builds the relaxation for config.method, optionally injects an AC warm
/// start (computed, or read from `warm_json`), solves, and optionally runs the
/// LNS post-processing.
SolveOutcome solve_case(const NetworkCase& c, const SolveConfig& config,
                        const std::optional<std::string>& warm_json = {});

bool is_dynamic(Method m);

}  // namespace rfopf
