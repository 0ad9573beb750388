#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "oppnet/trace.hpp"
#include "oppnet/types.hpp"

namespace oppnet {

// Streaming metrics over trace records. The live run and the offline
// `summarize` command feed the identical record stream through this class,
// so the two summaries agree field-for-field (double-entry check).
class MetricsBuilder {
 public:
  void consume(const Json& rec);

  Json summary() const;

  // CSV exports (summarize side).
  void write_energy_csvs(const std::string& dir) const;
  void write_route_csvs(const std::string& dir) const;

  bool saw_ledgers() const { return !node_stats_.empty(); }

 private:
  struct FlowStats {
    int64_t offered = 0;
    int64_t delivered = 0;
    std::vector<TimeUs> latencies;
    std::map<int, int64_t> hop_hist;
    std::set<std::string> routes;
    std::vector<std::pair<uint32_t, std::string>> route_rows;  // seq, path
  };
  struct NodeStats {
    Json ledger;
  };

  double duration_s_ = 0.0;
  std::map<std::pair<NodeId, NodeId>, FlowStats> flows_;  // (origin, dest)
  std::set<std::pair<NodeId, uint32_t>> delivered_keys_;
  int64_t duplicate_deliveries_ = 0;
  std::map<NodeId, NodeStats> node_stats_;
  std::map<NodeId, std::vector<std::pair<TimeUs, double>>> energy_series_;
  int64_t records_ = 0;
};

}  // namespace oppnet
