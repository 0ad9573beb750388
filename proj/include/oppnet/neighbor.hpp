#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "oppnet/engine.hpp"
#include "oppnet/interfaces.hpp"
#include "oppnet/params.hpp"
#include "oppnet/trace.hpp"
#include "oppnet/types.hpp"

namespace oppnet {

// DLL-side neighbor table: consumes link overhearing signals, keeps encounter
// history / link quality / wake-period estimates, and answers the
// transmission-deferral hook.
class NeighborTable : public IDeferTransmission, public IRoutingOverhearingSource {
 public:
  static constexpr double kEwmaAlpha = 0.2;
  static constexpr size_t kLinkWindow = 16;
  static constexpr int kStaleWakeIntervals = 10;

  NeighborTable(NodeId self, Engine* engine, const MacParams* mac);

  void on_link_signal(const EncounterSignal& sig);

  // IDeferTransmission
  DeferDecision should_defer(std::optional<NodeId> peer_hint, TimeUs now) override;

  // IRoutingOverhearingSource
  void subscribe_routing_overhearing(Listener listener) override {
    routing_listeners_.push_back(std::move(listener));
  }

  // Fired on any change that can move EDC inputs (encounters, p_link,
  // staleness expiry).
  void set_changed_callback(std::function<void(TimeUs)> cb) { changed_cb_ = std::move(cb); }

  // Routing consults the table through value snapshots.
  struct Snapshot {
    NodeId peer;
    double p_link;
    std::optional<double> advertised_edc;
    TimeUs staleness;
  };
  std::vector<Snapshot> fresh_neighbors(TimeUs now) const;
  std::optional<Snapshot> neighbor_status(NodeId peer, TimeUs now) const;

  // Upward-metric context for anycast deferral: predict over neighbors that
  // are useful forwarders (advertised EDC below our own).
  void set_own_edc_provider(std::function<std::optional<double>()> p) {
    own_edc_ = std::move(p);
  }

  // A strobe train ended with no forwarder; the listed peers were expected
  // to answer and did not.
  void note_attempt_failed(const std::vector<NodeId>& expected, TimeUs now);

  void clear();
  int missed_windows() const { return missed_windows_; }
  Json dump(TimeUs now) const;

 private:
  struct Record {
    int expected_count = 0;
    int coincidental_count = 0;
    TimeUs last_heard = -1;
    std::deque<bool> link_window;       // most recent kLinkWindow attempts
    double wake_period_est_s = 0.0;
    int wake_obs = 0;
    TimeUs last_wake_seen = -1;
    std::optional<double> advertised_edc;
    uint64_t last_train = ~0ull;        // dedup per strobe train
    Engine::Handle stale_check = 0;

    double p_link() const {
      size_t succ = 0;
      for (bool b : link_window) succ += b ? 1 : 0;
      return static_cast<double>(succ + 1) /
             static_cast<double>(link_window.size() + 2);
    }
  };

  void push_link(Record& r, bool success);
  TimeUs stale_after() const {
    return static_cast<TimeUs>(kStaleWakeIntervals) * mac_->wake_interval;
  }
  bool is_stale(const Record& r, TimeUs now) const {
    return r.last_heard < 0 || now - r.last_heard > stale_after();
  }
  std::optional<TimeUs> predict_next_wake(const Record& r, TimeUs now) const;
  void notify_changed(TimeUs now);

  NodeId self_;
  Engine* engine_;
  const MacParams* mac_;
  std::map<NodeId, Record> recs_;
  std::vector<Listener> routing_listeners_;
  std::function<void(TimeUs)> changed_cb_;
  std::function<std::optional<double>()> own_edc_;
  int missed_windows_ = 0;
};

}  // namespace oppnet
