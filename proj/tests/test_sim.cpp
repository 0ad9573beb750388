#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "oppnet/metrics.hpp"
#include "oppnet/scenario.hpp"
#include "oppnet/sim.hpp"

using namespace oppnet;

namespace {

Json two_node_doc() {
  return Json{
      {"duration_s", 120.0},
      {"seed", 1},
      {"sink", 0},
      {"topology", {{"generator", "line"}, {"nodes", 2}, {"spacing_m", 20.0}}},
      {"routing", {{"adv_interval_s", 5.0}}},
      // Harvest above TX power: nodes never brown out ("always on").
      {"energy", {{"harvest_mw", 20.0}}},
      {"traffic",
       Json::array({Json{{"type", "periodic"},
                         {"src", 1},
                         {"period_s", 5.0},
                         {"start_s", 30.0},
                         {"count", 10}}})},
  };
}

const Json& flow_of(const Json& summary, int src, int dest) {
  for (const auto& f : summary["flows"]) {
    if (f["src"] == src && f["dest"] == dest) return f;
  }
  static Json none;
  return none;
}

}  // namespace

TEST_CASE("two always-on nodes deliver everything upward") {
  Scenario s = parse_scenario(two_node_doc());
  RunResult res = run_scenario(s, {});
  const Json& f = flow_of(res.summary, 1, 0);
  REQUIRE(!f.is_null());
  CHECK(f["offered"] == 10);
  CHECK(f["delivered"] == 10);
  CHECK(res.summary["duplicate_deliveries"] == 0);
  for (const auto& n : res.summary["nodes"]) {
    CHECK(n["conserved"] == true);
  }
}

TEST_CASE("same seed twice gives the identical summary") {
  Scenario s = parse_scenario(two_node_doc());
  RunResult a = run_scenario(s, {});
  RunResult b = run_scenario(s, {});
  CHECK(a.summary == b.summary);
  CHECK(a.events_dispatched == b.events_dispatched);
}

TEST_CASE("run-time summary equals the trace-recomputed one (double entry)") {
  Scenario s = parse_scenario(two_node_doc());

  // Rebuild from the record stream exactly as `summarize` would.
  MetricsBuilder rebuilt;
  // run_scenario wires its own builder; emulate the offline path by running
  // with a trace file and re-reading it.
  RunOptions opts;
  opts.trace_path = "test_sim_trace.jsonl";
  RunResult live = run_scenario(s, opts);

  std::ifstream in(opts.trace_path);
  REQUIRE(in.good());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rebuilt.consume(Json::parse(line));
  }
  CHECK(live.summary == rebuilt.summary());
  std::remove(opts.trace_path.c_str());
}

TEST_CASE("an out-of-range node never delivers") {
  Json doc = two_node_doc();
  doc["topology"] = {{"generator", "line"}, {"nodes", 2}, {"spacing_m", 100.0}};
  Scenario s = parse_scenario(doc);
  RunResult res = run_scenario(s, {});
  const Json& f = flow_of(res.summary, 1, 0);
  REQUIRE(!f.is_null());
  CHECK(f["delivered"] == 0);
}

TEST_CASE("upward traffic flows over a powered relay that cycles") {
  Json doc = Json{
      {"duration_s", 600.0},
      {"seed", 3},
      {"sink", 0},
      {"topology", {{"generator", "line"}, {"nodes", 3}, {"spacing_m", 20.0}}},
      {"routing", {{"adv_interval_s", 15.0}}},
      {"energy", {{"harvest_mw", 20.0}}},
      // Relay node 1 starts right at e_on with a negligible harvest: the
      // sustained advertising and forwarding load must push it below e_off
      // at least once before the run ends.
      {"energy_overrides",
       {{"1",
         {{"harvest_mw", 0.25}, {"initial_mj", 8.0}}}}},
      {"traffic",
       Json::array({Json{{"type", "periodic"},
                         {"src", 2},
                         {"period_s", 10.0},
                         {"start_s", 40.0},
                         {"count", 40}}})},
  };
  Scenario s = parse_scenario(doc);
  RunResult res = run_scenario(s, {});
  const Json& f = flow_of(res.summary, 2, 0);
  REQUIRE(!f.is_null());
  CHECK(f["delivered"].get<int>() > 0);
  // The relay must have cycled OFF at least once.
  for (const auto& n : res.summary["nodes"]) {
    if (n["id"] == 1) CHECK(n["off_transitions"].get<int>() >= 1);
    CHECK(n["conserved"] == true);
  }
}
