#pragma once

#include <string>

#include "rfopf/case_io.hpp"

namespace fixtures {

inline std::string two_bus_text(double pd_mw = 10.0, double qd_mvar = 0.0) {
  return R"(function mpc = two_bus
mpc.version = '2';
mpc.baseMVA = 100.0;
mpc.bus = [
  1 3 0 0 0 0 1 1.0 0 230 1 1.1 0.9;
  2 1 )" + std::to_string(pd_mw) + " " + std::to_string(qd_mvar) + R"( 0 0 1 1.0 0 230 1 1.1 0.9;
];
mpc.gen = [
  1 0 0 100 -100 1.0 100 1 200 0;
];
mpc.gencost = [
  2 0 0 2 10 0;
];
mpc.branch = [
  1 2 0.01 0.1 0 0 0 0 0 0 1 -30 30;
];
)";
}

inline rfopf::NetworkCase two_bus(double pd_mw = 10.0, double qd_mvar = 0.0) {
  return rfopf::parse_case(two_bus_text(pd_mw, qd_mvar), "two_bus");
}

inline std::string data_path(const std::string& file) { return std::string(RFOPF_DATA_DIR) + "/" + file; }

}  // namespace fixtures
