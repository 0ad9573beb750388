#include "oppnet/routing.hpp"

#include <algorithm>

#include "oppnet/node.hpp"
#include "oppnet/tlv.hpp"

namespace oppnet {

RoutingProtocol::RoutingProtocol(Node* node, RoutingTable* table,
                                 NeighborTable* neighbors, MacAnycast* mac,
                                 const RoutingParams* params, NodeId sink)
    : node_(node), table_(table), neighbors_(neighbors), mac_(mac),
      params_(params), sink_(sink) {}

void RoutingProtocol::boot(TimeUs now) {
  schedule_advertise(now, /*initial=*/true);
}

void RoutingProtocol::on_power_off(TimeUs /*now*/) {
  // Queue and MAC context live in RAM: lost on brown-out. The routing set is
  // part of the (optionally) persisted routing state.
  queue_.clear();
  adv_timer_ = 0;   // node cancels all tracked timers on power-off
  kick_timer_ = 0;
  last_data_sent_ = std::numeric_limits<TimeUs>::min();
  if (!params_->persist_routing_state) {
    routing_set_.clear();
  }
}

void RoutingProtocol::on_power_on(TimeUs now) {
  schedule_advertise(now, /*initial=*/true);
}

// ---------------------------------------------------------------------------
// Data path

void RoutingProtocol::originate(NodeId dest, uint32_t payload_len, TimeUs now) {
  if (!node_->is_on()) return;  // an OFF node offers no traffic

  Entry e;
  e.packet.origin = node_->node_id();
  e.packet.final_dest = dest;
  e.packet.seq = next_seq_++;
  e.packet.ttl = params_->ttl_default;
  e.packet.payload_len = payload_len;
  e.packet.originated_at = now;
  e.packet.hops.push_back(node_->node_id());

  ForwarderCriteria& c = e.packet.criteria;
  c.origin = e.packet.origin;
  c.packet_seq = e.packet.seq;
  c.final_dest = dest;
  if (dest == sink_) {
    c.metric = RouteMetric::UpwardEdc;
    c.sender_edc = table_->calculate_upwards_cost(dest, sink_).cost;
  } else {
    c.metric = RouteMetric::DownwardSet;
  }
  table_->mark_forwarded(e.packet.key());

  Json rec;
  rec["kind"] = "originate";
  rec["node"] = node_->node_id();
  rec["dest"] = dest;
  rec["seq"] = e.packet.seq;
  rec["metric"] = c.metric == RouteMetric::UpwardEdc ? "up" : "down";
  node_->trace_sink().emit(now, std::move(rec));

  drop_for_cap(now);
  queue_.push_back(std::move(e));
  kick(now);
}

void RoutingProtocol::drop_for_cap(TimeUs now) {
  while (queue_.size() >= params_->queue_cap) {
    auto it = std::find_if(queue_.begin(), queue_.end(),
                           [](const Entry& e) { return !e.in_flight; });
    if (it == queue_.end()) return;  // everything in flight (cap >= 1 anyway)
    Json rec;
    rec["kind"] = "queue_drop";
    rec["node"] = node_->node_id();
    rec["origin"] = it->packet.origin;
    rec["seq"] = it->packet.seq;
    node_->trace_sink().emit(now, std::move(rec));
    queue_.erase(it);
  }
}

void RoutingProtocol::kick(TimeUs now) {
  if (!node_->is_on() || mac_->busy() || queue_.empty()) return;
  start_attempt(now);
}

void RoutingProtocol::start_attempt(TimeUs now) {
  // First entry that is currently transmittable: upward needs a finite own
  // EDC for the progress tag; downward goes out regardless (the set
  // membership check happens at the receivers).
  std::optional<double> own = table_->own_edc();
  Entry* chosen = nullptr;
  TimeUs earliest_retry = -1;
  for (Entry& e : queue_) {
    if (e.in_flight) return;  // single outstanding attempt
    if (e.next_try > now) {
      if (earliest_retry < 0 || e.next_try < earliest_retry)
        earliest_retry = e.next_try;
      continue;
    }
    if (e.packet.criteria.metric == RouteMetric::UpwardEdc && !own) continue;
    chosen = &e;
    break;
  }
  if (!chosen) {
    if (earliest_retry >= 0) {
      if (kick_timer_) node_->cancel(kick_timer_);
      kick_timer_ = node_->schedule(earliest_retry - now, [this] {
        kick_timer_ = 0;
        kick(node_->engine().now());
      });
    }
    return;  // blocked on no-route: a route change re-kicks us
  }

  Packet pkt = chosen->packet;
  // Re-tag with the current metric. Downward packets carry it too: receivers
  // only accept when strictly deeper on the gradient, which keeps a downward
  // packet descending instead of wandering sideways into a sibling branch
  // whose neighbors have all seen it already (a dead end, since duplicates
  // are rejected).
  pkt.criteria.sender_edc = own;
  std::vector<uint8_t> piggy = maybe_piggyback(now);
  pkt.tlv.insert(pkt.tlv.end(), piggy.begin(), piggy.end());

  if (mac_->send_anycast(std::move(pkt), now)) {
    chosen->in_flight = true;
    last_data_sent_ = now;
  }
}

void RoutingProtocol::on_attempt_done(const AttemptResult& result, TimeUs now) {
  auto it = std::find_if(queue_.begin(), queue_.end(),
                         [](const Entry& e) { return e.in_flight; });
  if (it == queue_.end()) return;
  it->in_flight = false;

  switch (result.outcome) {
    case AttemptOutcome::Forwarded:
      queue_.erase(it);
      break;
    case AttemptOutcome::NoForwarder: {
      // Tell the DLL which neighbors stayed silent so link estimates decay.
      if (result.packet.criteria.metric == RouteMetric::UpwardEdc) {
        neighbors_->note_attempt_failed(table_->forwarder_set(), now);
      }
      ++it->retries;
      // A downward packet nobody accepts is almost always a false positive:
      // the neighbors' verdicts are deterministic, so long retry loops only
      // paper over a momentarily busy radio. Give up early and recover.
      int limit = it->packet.criteria.metric == RouteMetric::DownwardSet &&
                          !it->packet.criteria.return_to &&
                          it->packet.hops.size() >= 2
                      ? std::min(params_->max_retries, 4)
                      : params_->max_retries;
      if (it->retries > limit) {
        if (it->packet.criteria.metric == RouteMetric::DownwardSet &&
            !it->packet.criteria.return_to && it->packet.hops.size() >= 2) {
          // False-positive recovery: our set claimed the destination was
          // reachable through us, but no neighbor will take the packet.
          // Forget the entry and hand the packet back to the previous hop,
          // which will try its remaining branches.
          NodeId prev = it->packet.hops[it->packet.hops.size() - 2];
          routing_set_.erase(it->packet.final_dest);
          it->packet.criteria.return_to = prev;
          it->retries = 0;
          it->next_try = now;
          Json rec;
          rec["kind"] = "recover";
          rec["node"] = node_->node_id();
          rec["origin"] = it->packet.origin;
          rec["seq"] = it->packet.seq;
          rec["dest"] = it->packet.final_dest;
          rec["to"] = prev;
          node_->trace_sink().emit(now, std::move(rec));
          break;
        }
        Json rec;
        rec["kind"] = "retry_drop";
        rec["node"] = node_->node_id();
        rec["origin"] = it->packet.origin;
        rec["seq"] = it->packet.seq;
        rec["retries"] = it->retries - 1;
        node_->trace_sink().emit(now, std::move(rec));
        queue_.erase(it);
        break;
      }
      double jitter = node_->rng(RngPurpose::Retry).uniform(0.9, 1.1);
      it->next_try =
          now + static_cast<TimeUs>(params_->retry_backoff * jitter);
      break;
    }
    case AttemptOutcome::AbortedEnergy:
      // The node is browning out; the queue is about to be wiped anyway.
      break;
  }
  kick(now);
}

void RoutingProtocol::on_accepted(const Packet& packet, NodeId from,
                                  TimeUs now) {
  Packet pkt = packet;

  auto stripped = tlv::strip_routing_set(pkt.tlv);
  pkt.tlv = std::move(stripped.remaining);
  if (stripped.malformed) {
    Json rec;
    rec["kind"] = "tlv_malformed";
    rec["node"] = node_->node_id();
    rec["from"] = from;
    node_->trace_sink().emit(now, std::move(rec));
  }
  if (stripped.set) {
    // For an accepted upward packet the judge guaranteed the sender sits
    // higher on the gradient, so its set describes downward reachability.
    if (pkt.criteria.metric == RouteMetric::UpwardEdc) {
      merge_set(stripped.set->entries, from, now);
    } else {
      on_routing_set_overheard(from, stripped.set->entries, now);
    }
  }

  table_->mark_forwarded(pkt.key());
  if (pkt.criteria.return_to && pkt.final_dest != node_->node_id()) {
    // A downstream neighbor bounced this packet back: the set entry pointing
    // at it was a false positive. Drop that entry, rewind the recorded path
    // to this node and retry the other branches.
    auto itset = routing_set_.find(pkt.final_dest);
    if (itset != routing_set_.end() && itset->second.second == from) {
      routing_set_.erase(itset);
    }
    pkt.criteria.return_to.reset();
    while (!pkt.hops.empty() && pkt.hops.back() != node_->node_id()) {
      pkt.hops.pop_back();
    }
    if (pkt.hops.empty()) pkt.hops.push_back(node_->node_id());
  } else {
    pkt.criteria.return_to.reset();  // a destination ends any recovery
    pkt.hops.push_back(node_->node_id());
  }

  if (pkt.final_dest == node_->node_id()) {
    Json rec;
    rec["kind"] = "deliver";
    rec["node"] = node_->node_id();
    rec["origin"] = pkt.origin;
    rec["seq"] = pkt.seq;
    rec["latency_us"] = now - pkt.originated_at;
    rec["hops"] = pkt.hops;
    rec["metric"] =
        pkt.criteria.metric == RouteMetric::UpwardEdc ? "up" : "down";
    node_->trace_sink().emit(now, std::move(rec));
    return;
  }

  if (--pkt.ttl <= 0) {
    Json rec;
    rec["kind"] = "ttl_drop";
    rec["node"] = node_->node_id();
    rec["origin"] = pkt.origin;
    rec["seq"] = pkt.seq;
    node_->trace_sink().emit(now, std::move(rec));
    return;
  }

  Entry e;
  e.packet = std::move(pkt);
  drop_for_cap(now);
  queue_.push_back(std::move(e));
  kick(now);
}

// ---------------------------------------------------------------------------
// Routing sets

void RoutingProtocol::on_routing_set_overheard(NodeId peer,
                                               const std::vector<NodeId>& set,
                                               TimeUs now) {
  // Only sets from nodes higher on the gradient describe what is reachable
  // below us; anything else would reflect routes back upward.
  std::optional<double> own = table_->own_edc();
  if (!own) return;
  auto st = neighbors_->neighbor_status(peer, now);
  if (!st || !st->advertised_edc || *st->advertised_edc <= *own) return;
  merge_set(set, peer, now);
}

void RoutingProtocol::merge_set(const std::vector<NodeId>& set, NodeId via,
                                TimeUs now) {
  bool grew = false;
  auto touch = [&](NodeId id) {
    if (id == node_->node_id()) return;
    auto [it, inserted] = routing_set_.insert_or_assign(id, std::make_pair(now, via));
    (void)it;
    grew = grew || inserted;
  };
  for (NodeId id : set) touch(id);
  touch(via);

  // Expire and cap: oldest-refreshed entries go first.
  for (auto it = routing_set_.begin(); it != routing_set_.end();) {
    if (now - it->second.first > params_->set_ttl) it = routing_set_.erase(it);
    else ++it;
  }
  while (routing_set_.size() > params_->max_set_size) {
    auto victim = std::min_element(
        routing_set_.begin(), routing_set_.end(), [](auto& a, auto& b) {
          if (a.second.first != b.second.first)
            return a.second.first < b.second.first;
          return a.first < b.first;
        });
    routing_set_.erase(victim);
  }
  if (grew) {
    ++set_version_;
    // New reachability may unblock queued downward traffic.
    kick(now);
  }
}

bool RoutingProtocol::downward_member(NodeId dest, TimeUs now) const {
  auto it = routing_set_.find(dest);
  return it != routing_set_.end() && now - it->second.first <= params_->set_ttl;
}

std::vector<NodeId> RoutingProtocol::fresh_set(TimeUs now) const {
  std::vector<NodeId> out;
  for (auto& [id, meta] : routing_set_) {
    if (now - meta.first <= params_->set_ttl) out.push_back(id);
  }
  return out;
}

std::vector<uint8_t> RoutingProtocol::maybe_piggyback(TimeUs now) {
  if (node_->rng(RngPurpose::Piggyback).uniform() >= params_->p_piggyback) {
    return {};
  }
  std::vector<NodeId> entries = fresh_set(now);
  entries.push_back(node_->node_id());
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  size_t cap = std::min(params_->max_set_size, tlv::kMaxEntriesPerOption);
  if (entries.size() > cap) {
    // Keep the most recently refreshed entries (self always survives).
    std::sort(entries.begin(), entries.end(), [&](NodeId a, NodeId b) {
      auto ra = a == node_->node_id() ? now : routing_set_.at(a).first;
      auto rb = b == node_->node_id() ? now : routing_set_.at(b).first;
      if (ra != rb) return ra > rb;
      return a < b;
    });
    entries.resize(cap);
    std::sort(entries.begin(), entries.end());
    Json rec;
    rec["kind"] = "set_truncated";
    rec["node"] = node_->node_id();
    rec["kept"] = entries.size();
    node_->trace_sink().emit(now, std::move(rec));
  }
  return tlv::encode_routing_set(entries, set_version_);
}

// ---------------------------------------------------------------------------
// Advertisements

void RoutingProtocol::schedule_advertise(TimeUs /*now*/, bool initial) {
  if (adv_timer_) node_->cancel(adv_timer_);
  double u = node_->rng(RngPurpose::AdvJitter).uniform();
  TimeUs delay;
  if (initial) {
    // Stagger cold-boot advertisements across one interval.
    delay = static_cast<TimeUs>(params_->adv_interval * u);
    if (delay < 1) delay = 1;
  } else {
    delay = static_cast<TimeUs>(params_->adv_interval * (0.9 + 0.2 * u));
  }
  adv_timer_ = node_->schedule(delay, [this] {
    adv_timer_ = 0;
    do_advertise(node_->engine().now());
  });
}

void RoutingProtocol::do_advertise(TimeUs now) {
  schedule_advertise(now, /*initial=*/false);
  if (!node_->is_on()) return;
  if (mac_->busy()) return;  // data traffic wins the radio
  if (now - last_data_sent_ < params_->adv_interval &&
      last_data_sent_ != std::numeric_limits<TimeUs>::min()) {
    Json rec;
    rec["kind"] = "adv_suppressed";
    rec["node"] = node_->node_id();
    node_->trace_sink().emit(now, std::move(rec));
    return;
  }
  std::optional<double> edc = table_->own_edc();
  if (!edc) return;  // nothing useful to announce yet

  std::vector<uint8_t> tlv_bytes = maybe_piggyback(now);
  Json rec;
  rec["kind"] = "advertise";
  rec["node"] = node_->node_id();
  rec["edc"] = *edc;
  rec["piggyback"] = !tlv_bytes.empty();
  node_->trace_sink().emit(now, std::move(rec));
  mac_->send_advertisement(edc, std::move(tlv_bytes), now);
}

}  // namespace oppnet
