#pragma once

#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "oppnet/interfaces.hpp"
#include "oppnet/params.hpp"
#include "oppnet/trace.hpp"
#include "oppnet/types.hpp"

namespace oppnet {

struct NeighborEdc {
  NodeId id;
  double advertised_edc;
  double p_link;
};

struct EdcResult {
  std::optional<double> edc;  // nullopt = no route
  std::vector<NodeId> forwarder_set;
};

// Greedy forwarder-set selection over the EDC-sorted neighbor list:
//   EDC(F) = w + (1 + sum p_j * edc_j) / sum p_j
// minimized over prefixes F. Neighbors with p_link <= 0 are excluded.
// Ties in the sort order break by node id, making this a pure function of
// its inputs.
EdcResult compute_edc(std::vector<NeighborEdc> neighbors, double w);

// NET-side routing table: owns the progress metric and answers the MAC's
// acceptance queries.
class RoutingTable : public IForwardingJudge {
 public:
  RoutingTable(NodeId self, bool is_sink, const RoutingParams* params,
               TraceSink* trace);

  void recompute(const std::vector<NeighborEdc>& neighbors, TimeUs now);

  std::optional<double> own_edc() const { return current_.edc; }
  const std::vector<NodeId>& forwarder_set() const { return current_.forwarder_set; }
  bool is_sink() const { return is_sink_; }

  struct UpwardCost {
    bool supported;                // false when dest is not the sink
    std::optional<double> cost;
  };
  UpwardCost calculate_upwards_cost(NodeId dest, NodeId sink) const;

  // IForwardingJudge. Upward: strict metric progress (own + margin <=
  // sender) and duplicate suppression. Downward: routing-set membership.
  Verdict judge(const ForwarderCriteria& criteria, TimeUs now) override;

  void set_downward_membership(std::function<bool(NodeId, TimeUs)> fn) {
    downward_member_ = std::move(fn);
  }

  bool already_forwarded(PacketKey key) const { return seen_.count(key) > 0; }
  void mark_forwarded(PacketKey key) { seen_.insert(key); }

  void set_changed_callback(std::function<void(TimeUs)> cb) { changed_cb_ = std::move(cb); }

  void reset_routes();  // power loss without persisted routing state

 private:
  NodeId self_;
  bool is_sink_;
  const RoutingParams* params_;
  TraceSink* trace_;
  EdcResult current_;
  std::set<PacketKey> seen_;
  std::function<bool(NodeId, TimeUs)> downward_member_;
  std::function<void(TimeUs)> changed_cb_;
};

}  // namespace oppnet
