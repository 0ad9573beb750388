#pragma once

#include <functional>
#include <optional>

#include "oppnet/types.hpp"

namespace oppnet {

// Cross-layer contracts between the MAC, the neighbor table and the routing
// side. Kept as small abstract interfaces so MAC, discovery and routing
// implementations stay interchangeable.

// Answers the MAC's receive-side acceptance query. Must answer before the
// receive window elapses; in-simulation the call is synchronous.
class IForwardingJudge {
 public:
  virtual ~IForwardingJudge() = default;
  virtual Verdict judge(const ForwarderCriteria& criteria, TimeUs now) = 0;
};

// Emits one typed signal per overheard frame plus one end-of-window signal
// per listening period.
class ILinkOverhearingSource {
 public:
  using Listener = std::function<void(const EncounterSignal&)>;
  virtual ~ILinkOverhearingSource() = default;
  virtual void subscribe_link_signals(Listener listener) = 0;
};

// Routing-level overhearing: decoded routing content (EDC, routing sets)
// recovered from overheard MAC datagrams.
class IRoutingOverhearingSource {
 public:
  struct RoutingOverheard {
    NodeId peer;
    std::optional<double> edc;
    std::optional<std::vector<NodeId>> routing_set;
    TimeUs at;
  };
  using Listener = std::function<void(const RoutingOverheard&)>;
  virtual ~IRoutingOverhearingSource() = default;
  virtual void subscribe_routing_overhearing(Listener listener) = 0;
};

// Availability prediction hook consulted before a transmission starts.
class IDeferTransmission {
 public:
  virtual ~IDeferTransmission() = default;
  virtual DeferDecision should_defer(std::optional<NodeId> peer_hint,
                                     TimeUs now) = 0;
};

// MAC with opportunistic unicast: anycast send with attached forwarder
// selection criteria, receive-side acceptance via the judge.
class IOpportunisticLinkLayer {
 public:
  using AttemptCallback = std::function<void(const AttemptResult&)>;
  using DeliverCallback = std::function<void(const Packet&, NodeId from, TimeUs now)>;
  virtual ~IOpportunisticLinkLayer() = default;
  virtual bool send_anycast(Packet packet, TimeUs now) = 0;
  virtual bool busy() const = 0;
  virtual void set_forwarding_judge(IForwardingJudge* judge) = 0;
  virtual void set_defer_hook(IDeferTransmission* defer) = 0;
  virtual void set_attempt_callback(AttemptCallback cb) = 0;
  virtual void set_deliver_callback(DeliverCallback cb) = 0;
};

}  // namespace oppnet
