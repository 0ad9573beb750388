#include "oppnet/neighbor.hpp"

#include <algorithm>
#include <cmath>

#include "oppnet/tlv.hpp"

namespace oppnet {

NeighborTable::NeighborTable(NodeId self, Engine* engine, const MacParams* mac)
    : self_(self), engine_(engine), mac_(mac) {}

void NeighborTable::push_link(Record& r, bool success) {
  r.link_window.push_back(success);
  if (r.link_window.size() > kLinkWindow) r.link_window.pop_front();
}

void NeighborTable::notify_changed(TimeUs now) {
  if (changed_cb_) changed_cb_(now);
}

void NeighborTable::on_link_signal(const EncounterSignal& sig) {
  if (sig.kind == EncounterKind::ExpectedPeriodEnd) {
    if (!sig.peer) ++missed_windows_;
    return;
  }
  NodeId peer = *sig.peer;
  if (peer == self_) return;
  Record& r = recs_[peer];

  bool new_train = !sig.frame || sig.frame->attempt_id != r.last_train;
  if (!new_train) {
    r.last_heard = sig.at;
    return;
  }

  if (sig.kind == EncounterKind::Expected) ++r.expected_count;
  else ++r.coincidental_count;

  // Only ACKs prove the peer was *listening* at this instant (a node acks
  // from inside its wake window). Overheard strobes and advertisements show
  // presence, not the wake phase, and must not drive the predictor.
  bool listening_proof = sig.frame && sig.frame->kind == FrameKind::Ack;
  if (listening_proof) {
    if (r.last_wake_seen >= 0) {
      TimeUs gap = sig.at - r.last_wake_seen;
      if (gap > mac_->listen_len) {
        double gap_s = s_from_us(gap);
        if (r.wake_obs == 0) {
          r.wake_period_est_s = gap_s;
        } else {
          r.wake_period_est_s =
              (1.0 - kEwmaAlpha) * r.wake_period_est_s + kEwmaAlpha * gap_s;
        }
        ++r.wake_obs;
      }
    }
    r.last_wake_seen = sig.at;
  }

  push_link(r, true);
  r.last_heard = sig.at;
  r.last_train = sig.frame ? sig.frame->attempt_id : ~0ull;

  // Staleness is event-driven: when this record goes quiet for the full
  // window, EDC inputs change and routing must recompute.
  if (r.stale_check) engine_->cancel(r.stale_check);
  TimeUs check_at = sig.at + stale_after() + 1;
  r.stale_check = engine_->schedule_at(check_at, kPrioNode, [this, peer] {
    auto it = recs_.find(peer);
    if (it != recs_.end()) {
      it->second.stale_check = 0;
      if (is_stale(it->second, engine_->now())) notify_changed(engine_->now());
    }
  });

  // Decode routing content carried by the overheard frame.
  std::optional<double> edc;
  std::optional<std::vector<NodeId>> rset;
  if (sig.frame) {
    if (sig.frame->kind == FrameKind::DataStrobe && sig.frame->packet) {
      const Packet& p = *sig.frame->packet;
      if (p.criteria.metric == RouteMetric::UpwardEdc) edc = p.criteria.sender_edc;
      if (!p.tlv.empty()) {
        auto res = tlv::strip_routing_set(p.tlv);
        if (res.set) rset = std::move(res.set->entries);
      }
    } else if (sig.frame->kind == FrameKind::Advertisement) {
      edc = sig.frame->adv_edc;
      if (!sig.frame->adv_tlv.empty()) {
        auto res = tlv::strip_routing_set(sig.frame->adv_tlv);
        if (res.set) rset = std::move(res.set->entries);
      }
    }
  }
  if (edc) r.advertised_edc = edc;
  if (edc || rset) {
    RoutingOverheard ov{peer, edc, std::move(rset), sig.at};
    for (auto& l : routing_listeners_) l(ov);
  }

  notify_changed(sig.at);
}

std::optional<TimeUs> NeighborTable::predict_next_wake(const Record& r,
                                                       TimeUs now) const {
  if (r.wake_obs == 0 || r.last_wake_seen < 0) return std::nullopt;
  TimeUs period = us_from_s(r.wake_period_est_s);
  if (period <= 0) return std::nullopt;
  TimeUs diff = now - r.last_wake_seen;
  TimeUs k = diff <= 0 ? 0 : (diff + period - 1) / period;
  return r.last_wake_seen + k * period;
}

DeferDecision NeighborTable::should_defer(std::optional<NodeId> peer_hint,
                                          TimeUs now) {
  std::optional<TimeUs> earliest;
  auto consider = [&](const Record& r) {
    if (is_stale(r, now)) return;
    auto p = predict_next_wake(r, now);
    if (p && (!earliest || *p < *earliest)) earliest = p;
  };

  if (peer_hint) {
    auto it = recs_.find(*peer_hint);
    if (it != recs_.end()) consider(it->second);
  } else {
    std::optional<double> own = own_edc_ ? own_edc_() : std::nullopt;
    for (auto& [id, r] : recs_) {
      if (!r.advertised_edc) continue;
      if (own && *r.advertised_edc >= *own) continue;  // not a useful forwarder
      consider(r);
    }
  }

  if (!earliest) return DeferDecision{0, DeferReason::NoHistory, std::nullopt};
  if (*earliest - now > mac_->listen_len) {
    TimeUs guard = mac_->listen_len / 2;
    TimeUs defer = *earliest - guard - now;
    if (defer > mac_->wake_interval) defer = mac_->wake_interval;
    return DeferDecision{defer, DeferReason::PredictedAsleep, earliest};
  }
  return DeferDecision{0, DeferReason::PredictedAwake, earliest};
}

std::vector<NeighborTable::Snapshot> NeighborTable::fresh_neighbors(
    TimeUs now) const {
  std::vector<Snapshot> out;
  for (auto& [id, r] : recs_) {
    if (is_stale(r, now)) continue;
    out.push_back(Snapshot{id, r.p_link(), r.advertised_edc, now - r.last_heard});
  }
  return out;
}

std::optional<NeighborTable::Snapshot> NeighborTable::neighbor_status(
    NodeId peer, TimeUs now) const {
  auto it = recs_.find(peer);
  if (it == recs_.end()) return std::nullopt;
  const Record& r = it->second;
  return Snapshot{peer, r.p_link(), r.advertised_edc, now - r.last_heard};
}

void NeighborTable::note_attempt_failed(const std::vector<NodeId>& expected,
                                        TimeUs now) {
  bool any = false;
  for (NodeId peer : expected) {
    auto it = recs_.find(peer);
    if (it == recs_.end()) continue;
    push_link(it->second, false);
    any = true;
  }
  if (any) notify_changed(now);
}

void NeighborTable::clear() {
  for (auto& [id, r] : recs_) {
    if (r.stale_check) engine_->cancel(r.stale_check);
  }
  recs_.clear();
  missed_windows_ = 0;
}

Json NeighborTable::dump(TimeUs now) const {
  Json arr = Json::array();
  for (auto& [id, r] : recs_) {
    Json e;
    e["peer"] = id;
    e["p_link"] = r.p_link();
    e["expected"] = r.expected_count;
    e["coincidental"] = r.coincidental_count;
    e["wake_period_s"] = r.wake_period_est_s;
    e["stale"] = is_stale(r, now);
    if (r.advertised_edc) e["edc"] = *r.advertised_edc;
    arr.push_back(e);
  }
  return arr;
}

}  // namespace oppnet
