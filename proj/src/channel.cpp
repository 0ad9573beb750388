#include "oppnet/channel.hpp"

#include <cmath>

namespace oppnet {

bool Topology::in_range(NodeId a, NodeId b) const {
  if (a == b) return false;
  double dx = positions[a].first - positions[b].first;
  double dy = positions[a].second - positions[b].second;
  return std::sqrt(dx * dx + dy * dy) <= comm_range_m;
}

Channel::Channel(Engine* engine, TraceSink* trace, Topology topo,
                 ChannelParams params, uint64_t seed)
    : engine_(engine), trace_(trace), topo_(std::move(topo)), params_(params),
      seed_(seed) {
  size_t n = topo_.size();
  adjacency_.resize(n);
  clients_.resize(n, nullptr);
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = 0; b < n; ++b) {
      if (topo_.in_range(a, b)) adjacency_[a].push_back(b);
    }
  }
}

void Channel::register_client(ChannelClient* client) {
  clients_[client->node_id()] = client;
  loss_rng_.emplace(client->node_id(),
                    Rng(seed_, client->node_id(), RngPurpose::Loss));
}

TimeUs Channel::airtime_us(uint32_t bytes) const {
  TimeUs t = static_cast<TimeUs>(bytes) * 8 * kUsPerSec / params_.bitrate_bps;
  return t > 0 ? t : 1;
}

void Channel::begin_tx(NodeId sender, Frame frame, TimeUs now) {
  uint64_t id = next_tx_id_++;
  ActiveTx tx;
  tx.id = id;
  tx.sender = sender;
  tx.start = now;
  tx.end = now + airtime_us(frame.wire_bytes());
  tx.frame = std::move(frame);

  for (NodeId nbr : adjacency_[sender]) {
    ChannelClient* c = clients_[nbr];
    if (!c) continue;
    bool listening = c->radio_listening();
    // Any other in-range transmission already on the air corrupts reception
    // at this receiver, in both directions.
    bool overlapped = false;
    for (auto& [oid, other] : active_) {
      if (other.sender == nbr) continue;  // half-duplex
      if (!topo_.in_range(other.sender, nbr)) continue;
      overlapped = true;
      auto oit = other.exposed.find(nbr);
      if (oit != other.exposed.end()) oit->second = true;
    }
    if (listening) {
      tx.exposed.emplace(nbr, overlapped);
    }
    c->on_medium_delta(+1, now);
  }

  active_.emplace(id, std::move(tx));
  engine_->schedule_at(active_.at(id).end, kPrioChannel,
                       [this, id] { end_tx(id); });
}

void Channel::invalidate_exposures(NodeId node) {
  for (auto& [id, tx] : active_) tx.exposed.erase(node);
}

void Channel::abort_tx_from(NodeId sender) {
  for (auto& [id, tx] : active_) {
    if (tx.sender == sender) {
      tx.aborted = true;
      tx.exposed.clear();
    }
  }
}

void Channel::end_tx(uint64_t tx_id) {
  auto it = active_.find(tx_id);
  ActiveTx tx = std::move(it->second);
  active_.erase(it);
  TimeUs now = engine_->now();

  if (!tx.aborted) {
    if (ChannelClient* s = clients_[tx.sender]) s->on_tx_done(now);
  }

  // Free the medium first so receivers drop back from RX accounting before
  // they react to the frame (a reaction may start a new transmission).
  for (NodeId nbr : adjacency_[tx.sender]) {
    if (ChannelClient* c = clients_[nbr]) c->on_medium_delta(-1, now);
  }

  for (auto& [nbr, corrupted] : tx.exposed) {
    ChannelClient* c = clients_[nbr];
    if (!c) continue;
    if (corrupted) {
      c->on_frame_collision(now);
      continue;
    }
    if (params_.p_loss > 0.0 &&
        loss_rng_.at(nbr).uniform() < params_.p_loss) {
      continue;  // independent per-frame erasure
    }
    c->on_frame_received(tx.frame, now);
  }
}

}  // namespace oppnet
