#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "oppnet/engine.hpp"
#include "oppnet/params.hpp"
#include "oppnet/rng.hpp"
#include "oppnet/trace.hpp"
#include "oppnet/types.hpp"

namespace oppnet {

struct Topology {
  std::vector<std::pair<double, double>> positions;
  double comm_range_m = 30.0;

  bool in_range(NodeId a, NodeId b) const;
  size_t size() const { return positions.size(); }
};

// What the channel needs from a node. Implemented by Node.
class ChannelClient {
 public:
  virtual ~ChannelClient() = default;
  virtual NodeId node_id() const = 0;
  virtual bool radio_listening() const = 0;
  virtual void on_medium_delta(int delta, TimeUs now) = 0;
  virtual void on_tx_done(TimeUs now) = 0;
  virtual void on_frame_received(const Frame& f, TimeUs now) = 0;
  virtual void on_frame_collision(TimeUs now) = 0;
};

// Broadcast disk-range medium with per-receiver binary collision resolution.
// A frame is delivered to a receiver iff the receiver listened for the whole
// airtime and no other in-range transmission overlapped it there.
class Channel {
 public:
  Channel(Engine* engine, TraceSink* trace, Topology topo, ChannelParams params,
          uint64_t seed);

  void register_client(ChannelClient* client);

  TimeUs airtime_us(uint32_t bytes) const;

  // Schedules the end-of-frame event; exposure snapshot is taken now.
  // Caller guarantees the sender is ON and not already transmitting.
  void begin_tx(NodeId sender, Frame frame, TimeUs now);

  // Receiver stopped listening (window closed, went to TX, or powered off):
  // all its pending exposures become undeliverable.
  void invalidate_exposures(NodeId node);

  // Sender powered off mid-frame: the transmission is aborted, nobody
  // decodes it. Medium-busy accounting still unwinds at the end event.
  void abort_tx_from(NodeId sender);

  const std::vector<NodeId>& neighbors_of(NodeId id) const {
    return adjacency_[id];
  }

 private:
  struct ActiveTx {
    uint64_t id;
    NodeId sender;
    Frame frame;
    TimeUs start;
    TimeUs end;
    bool aborted = false;
    // exposed receivers -> corrupted flag
    std::map<NodeId, bool> exposed;
  };

  void end_tx(uint64_t tx_id);

  Engine* engine_;
  TraceSink* trace_;
  Topology topo_;
  ChannelParams params_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<ChannelClient*> clients_;
  std::map<uint64_t, ActiveTx> active_;
  std::map<NodeId, Rng> loss_rng_;
  uint64_t next_tx_id_ = 1;
  uint64_t seed_;
};

}  // namespace oppnet
