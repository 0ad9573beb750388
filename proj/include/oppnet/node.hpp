#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "oppnet/channel.hpp"
#include "oppnet/energy.hpp"
#include "oppnet/engine.hpp"
#include "oppnet/mac.hpp"
#include "oppnet/neighbor.hpp"
#include "oppnet/params.hpp"
#include "oppnet/rng.hpp"
#include "oppnet/routing.hpp"
#include "oppnet/routing_table.hpp"
#include "oppnet/trace.hpp"
#include "oppnet/types.hpp"

namespace oppnet {

struct NodeConfig {
  NodeId id = 0;
  bool is_sink = false;
  NodeId sink = 0;
  EnergyConfig energy;
  std::optional<TimeUs> wake_phase;
  // Optional piecewise-constant harvest trace: (from time, rate in nW).
  std::vector<std::pair<TimeUs, int64_t>> harvest_steps;
};

// One sensor node: energy lifecycle, radio state accounting, and the
// MAC/neighbor/routing stack wired through the cross-layer interfaces.
class Node : public ChannelClient {
 public:
  Node(NodeConfig cfg, Engine* engine, Channel* channel, TraceSink* trace,
       const MacParams* mac_params, const RoutingParams* routing_params,
       uint64_t seed);

  void boot(TimeUs now);
  void finalize(TimeUs end, bool dump_neighbors);

  // ChannelClient
  NodeId node_id() const override { return cfg_.id; }
  bool radio_listening() const override;
  void on_medium_delta(int delta, TimeUs now) override;
  void on_tx_done(TimeUs now) override;
  void on_frame_received(const Frame& frame, TimeUs now) override;
  void on_frame_collision(TimeUs now) override;

  // Services for the protocol stack.
  Engine& engine() { return *engine_; }
  Channel& channel() { return *channel_; }
  TraceSink& trace_sink() { return *trace_; }
  Rng& rng(RngPurpose purpose);
  Engine::Handle schedule(TimeUs delay, std::function<void()> fn);
  void cancel(Engine::Handle h);
  void begin_tx(Frame frame, TimeUs now);
  void update_radio(TimeUs now);
  bool is_on() const { return on_; }
  double level_mj(TimeUs now);

  MacAnycast& mac() { return mac_; }
  NeighborTable& neighbors() { return neighbors_; }
  RoutingTable& table() { return table_; }
  RoutingProtocol& routing() { return routing_; }
  const EnergyStore& energy() const { return store_; }
  TimeUs cumulative_on_us(TimeUs now) const;
  int off_transitions() const { return off_transitions_; }

 private:
  void sync_energy(TimeUs now);
  Activity resolve_activity() const;
  void check_lifecycle(TimeUs now);
  void go_off(TimeUs now);
  void go_on(TimeUs now);
  void reschedule_power_event(TimeUs now);
  void apply_harvest_steps(TimeUs now);
  void trace_lifecycle(TimeUs now, bool on);

  NodeConfig cfg_;
  Engine* engine_;
  Channel* channel_;
  TraceSink* trace_;
  const MacParams* mac_params_;
  const RoutingParams* routing_params_;
  uint64_t seed_;

  EnergyStore store_;
  bool on_ = false;
  Activity activity_ = Activity::Off;
  TimeUs last_accrue_ = 0;
  bool transmitting_ = false;
  bool listening_cache_ = false;
  int medium_busy_ = 0;
  std::array<TimeUs, kNumActivities> time_in_ = {};
  TimeUs last_transition_ = 0;
  TimeUs cumulative_on_ = 0;
  int off_transitions_ = 0;
  Engine::Handle power_event_ = 0;
  size_t next_harvest_step_ = 0;

  std::map<RngPurpose, Rng> rngs_;
  std::set<Engine::Handle> tracked_;

  RoutingTable table_;
  NeighborTable neighbors_;
  MacAnycast mac_;
  RoutingProtocol routing_;
};

}  // namespace oppnet
