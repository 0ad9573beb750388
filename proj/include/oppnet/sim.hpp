#pragma once

#include <optional>
#include <string>

#include "oppnet/scenario.hpp"
#include "oppnet/trace.hpp"

namespace oppnet {

struct RunOptions {
  std::optional<uint64_t> seed_override;
  std::string trace_path;  // empty = no trace file
  bool dump_neighbors = false;
};

struct RunResult {
  Json summary;
  int64_t trace_records = 0;
  int64_t events_dispatched = 0;
};

// Executes one scenario to completion. Throws on internal invariant
// violations (simulator bugs are loud).
RunResult run_scenario(const Scenario& scenario, const RunOptions& opts);

}  // namespace oppnet
