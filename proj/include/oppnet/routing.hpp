#pragma once

#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "oppnet/engine.hpp"
#include "oppnet/mac.hpp"
#include "oppnet/neighbor.hpp"
#include "oppnet/params.hpp"
#include "oppnet/routing_table.hpp"
#include "oppnet/types.hpp"

namespace oppnet {

class Node;

// NET layer: upward collection routing on the EDC metric, downward routing
// on shared routing sets, TLV piggyback middleware and naive
// advertisement-based discovery.
class RoutingProtocol {
 public:
  RoutingProtocol(Node* node, RoutingTable* table, NeighborTable* neighbors,
                  MacAnycast* mac, const RoutingParams* params, NodeId sink);

  void boot(TimeUs now);
  void on_power_off(TimeUs now);
  void on_power_on(TimeUs now);

  void originate(NodeId dest, uint32_t payload_len, TimeUs now);
  void on_accepted(const Packet& packet, NodeId from, TimeUs now);
  void on_attempt_done(const AttemptResult& result, TimeUs now);
  void on_routing_set_overheard(NodeId peer, const std::vector<NodeId>& set,
                                TimeUs now);

  // Try to start the next queued transmission.
  void kick(TimeUs now);

  bool downward_member(NodeId dest, TimeUs now) const;
  std::vector<NodeId> fresh_set(TimeUs now) const;
  size_t queue_size() const { return queue_.size(); }

 private:
  struct Entry {
    Packet packet;
    int retries = 0;
    TimeUs next_try = 0;
    bool in_flight = false;
  };

  void start_attempt(TimeUs now);
  void merge_set(const std::vector<NodeId>& set, NodeId via, TimeUs now);
  void drop_for_cap(TimeUs now);
  std::vector<uint8_t> maybe_piggyback(TimeUs now);
  void schedule_advertise(TimeUs now, bool initial);
  void do_advertise(TimeUs now);

  Node* node_;
  RoutingTable* table_;
  NeighborTable* neighbors_;
  MacAnycast* mac_;
  const RoutingParams* params_;
  NodeId sink_;

  std::deque<Entry> queue_;
  std::map<NodeId, std::pair<TimeUs, NodeId>> routing_set_;  // dest -> (refreshed, via)
  uint16_t set_version_ = 0;
  uint32_t next_seq_ = 0;
  TimeUs last_data_sent_ = std::numeric_limits<TimeUs>::min();
  Engine::Handle adv_timer_ = 0;
  Engine::Handle kick_timer_ = 0;
};

}  // namespace oppnet
