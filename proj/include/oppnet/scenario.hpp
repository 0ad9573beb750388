#pragma once

#include <string>
#include <vector>

#include "oppnet/channel.hpp"
#include "oppnet/node.hpp"
#include "oppnet/params.hpp"
#include "oppnet/trace.hpp"

namespace oppnet {

// One traffic flow description.
struct TrafficSpec {
  enum class Kind { Periodic, Poisson, SweepDownward };
  Kind kind = Kind::Periodic;
  NodeId src = 0;
  NodeId dest = 0;          // Periodic/Poisson
  TimeUs start = 0;
  TimeUs period = 0;        // Periodic
  TimeUs jitter = 0;        // Periodic
  int count = 0;            // Periodic (0 = until duration)
  double rate_per_s = 0.0;  // Poisson
  TimeUs stop = 0;          // Poisson (0 = duration)
  TimeUs gap = 0;           // SweepDownward: spacing between destinations
  uint32_t payload = 32;
};

// Fully validated, defaults-materialized experiment description.
struct Scenario {
  std::string name;
  TimeUs duration = 0;
  uint64_t seed = 1;
  NodeId sink = 0;
  Topology topology;
  ChannelParams channel;
  MacParams mac;
  RoutingParams routing;
  std::vector<NodeConfig> nodes;
  std::vector<TrafficSpec> traffic;
  bool trace_signals = false;
  bool trace_strobes = false;

  // Every effective parameter, for the trace header.
  Json effective() const;
};

// Strict loader: unknown keys anywhere are an error; all cross-field
// validation rules are enforced here. Throws std::runtime_error with the
// offending field and rule in the message.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const Json& doc);

}  // namespace oppnet
