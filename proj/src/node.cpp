#include "oppnet/node.hpp"

namespace oppnet {

Node::Node(NodeConfig cfg, Engine* engine, Channel* channel, TraceSink* trace,
           const MacParams* mac_params, const RoutingParams* routing_params,
           uint64_t seed)
    : cfg_(std::move(cfg)), engine_(engine), channel_(channel), trace_(trace),
      mac_params_(mac_params), routing_params_(routing_params), seed_(seed),
      store_(cfg_.energy),
      table_(cfg_.id, cfg_.is_sink, routing_params, trace),
      neighbors_(cfg_.id, engine, mac_params),
      mac_(this, mac_params),
      routing_(this, &table_, &neighbors_, &mac_, routing_params, cfg_.sink) {
  channel_->register_client(this);

  mac_.set_forwarding_judge(&table_);
  mac_.set_defer_hook(&neighbors_);
  mac_.subscribe_link_signals(
      [this](const EncounterSignal& sig) { neighbors_.on_link_signal(sig); });
  mac_.set_attempt_callback([this](const AttemptResult& res) {
    routing_.on_attempt_done(res, engine_->now());
  });
  mac_.set_deliver_callback([this](const Packet& pkt, NodeId from, TimeUs now) {
    routing_.on_accepted(pkt, from, now);
  });
  mac_.set_idle_callback([this](TimeUs now) { routing_.kick(now); });

  neighbors_.set_own_edc_provider([this] { return table_.own_edc(); });
  neighbors_.set_changed_callback([this](TimeUs now) {
    std::vector<NeighborEdc> in;
    for (const auto& s : neighbors_.fresh_neighbors(now)) {
      if (s.advertised_edc) in.push_back({s.peer, *s.advertised_edc, s.p_link});
    }
    table_.recompute(in, now);
  });
  neighbors_.subscribe_routing_overhearing(
      [this](const IRoutingOverhearingSource::RoutingOverheard& ov) {
        if (ov.routing_set) {
          routing_.on_routing_set_overheard(ov.peer, *ov.routing_set, ov.at);
        }
      });

  table_.set_downward_membership([this](NodeId dest, TimeUs now) {
    return routing_.downward_member(dest, now);
  });
  table_.set_changed_callback([this](TimeUs now) { routing_.kick(now); });

  if (cfg_.wake_phase) mac_.override_wake_phase(*cfg_.wake_phase);
}

// ---------------------------------------------------------------------------
// Services

Rng& Node::rng(RngPurpose purpose) {
  auto it = rngs_.find(purpose);
  if (it == rngs_.end()) {
    it = rngs_.emplace(purpose, Rng(seed_, cfg_.id, purpose)).first;
  }
  return it->second;
}

Engine::Handle Node::schedule(TimeUs delay, std::function<void()> fn) {
  auto cell = std::make_shared<Engine::Handle>(0);
  *cell = engine_->schedule_in(
      delay, kPrioNode, [this, cell, fn = std::move(fn)] {
        tracked_.erase(*cell);
        fn();
      });
  tracked_.insert(*cell);
  return *cell;
}

void Node::cancel(Engine::Handle h) {
  if (h && engine_->cancel(h)) tracked_.erase(h);
}

double Node::level_mj(TimeUs now) {
  sync_energy(now);
  return store_.level_mj();
}

TimeUs Node::cumulative_on_us(TimeUs now) const {
  return cumulative_on_ + (on_ ? now - last_transition_ : 0);
}

// ---------------------------------------------------------------------------
// Energy accounting

void Node::sync_energy(TimeUs now) {
  TimeUs dt = now - last_accrue_;
  if (dt > 0) {
    store_.accrue(activity_, dt);
    time_in_[static_cast<int>(activity_)] += dt;
    last_accrue_ = now;
  }
}

Activity Node::resolve_activity() const {
  if (!on_) return Activity::Off;
  if (transmitting_) return Activity::Tx;
  if (mac_.wants_listen()) {
    return medium_busy_ > 0 ? Activity::Rx : Activity::IdleListen;
  }
  return Activity::Sleep;
}

void Node::update_radio(TimeUs now) {
  bool was_listening = on_ && !transmitting_ && listening_cache_;
  listening_cache_ = !transmitting_ && mac_.wants_listen();
  bool now_listening = on_ && listening_cache_;
  if (was_listening && !now_listening) channel_->invalidate_exposures(cfg_.id);

  Activity next = resolve_activity();
  if (next != activity_) {
    sync_energy(now);
    activity_ = next;
    reschedule_power_event(now);
  }
}

void Node::reschedule_power_event(TimeUs /*now*/) {
  if (power_event_) {
    engine_->cancel(power_event_);
    power_event_ = 0;
  }
  std::optional<TimeUs> t;
  if (on_) {
    t = store_.time_until_below(store_.config().e_off_fj, activity_);
  } else {
    t = store_.time_until_at_least(store_.config().e_on_fj, Activity::Off);
  }
  if (!t) return;  // level never crosses under the current regime
  power_event_ = engine_->schedule_in(*t, kPrioNode, [this] {
    power_event_ = 0;
    TimeUs now = engine_->now();
    sync_energy(now);
    check_lifecycle(now);
  });
}

void Node::check_lifecycle(TimeUs now) {
  if (on_ && store_.level_fj() < store_.config().e_off_fj) {
    go_off(now);
  } else if (!on_ && store_.level_fj() >= store_.config().e_on_fj) {
    go_on(now);
  } else {
    reschedule_power_event(now);
  }
}

void Node::trace_lifecycle(TimeUs now, bool on) {
  Json rec;
  rec["kind"] = "lifecycle";
  rec["node"] = cfg_.id;
  rec["state"] = on ? "on" : "off";
  rec["level_mj"] = store_.level_mj();
  trace_->emit(now, std::move(rec));
}

void Node::go_off(TimeUs now) {
  sync_energy(now);
  on_ = false;
  ++off_transitions_;
  cumulative_on_ += now - last_transition_;
  last_transition_ = now;

  if (transmitting_) {
    channel_->abort_tx_from(cfg_.id);
    transmitting_ = false;
  }
  channel_->invalidate_exposures(cfg_.id);
  listening_cache_ = false;

  mac_.on_power_off(now);
  routing_.on_power_off(now);
  for (Engine::Handle h : tracked_) engine_->cancel(h);
  tracked_.clear();

  if (!routing_params_->persist_routing_state) {
    table_.reset_routes();
    neighbors_.clear();
  }

  activity_ = Activity::Off;
  trace_lifecycle(now, false);
  reschedule_power_event(now);
}

void Node::go_on(TimeUs now) {
  sync_energy(now);
  on_ = true;
  last_transition_ = now;
  trace_lifecycle(now, true);
  mac_.on_power_on(now);
  routing_.on_power_on(now);
  update_radio(now);
  reschedule_power_event(now);
}

void Node::apply_harvest_steps(TimeUs /*now*/) {
  for (const auto& [at, rate_nw] : cfg_.harvest_steps) {
    int64_t rate = rate_nw;
    engine_->schedule_at(at, kPrioNode, [this, rate] {
      TimeUs now = engine_->now();
      sync_energy(now);
      store_.set_harvest_nw(rate);
      check_lifecycle(now);
    });
  }
}

// ---------------------------------------------------------------------------
// Lifecycle entry points

void Node::boot(TimeUs now) {
  last_accrue_ = now;
  last_transition_ = now;
  apply_harvest_steps(now);
  if (store_.level_fj() >= store_.config().e_on_fj) {
    on_ = true;
    trace_lifecycle(now, true);
    mac_.boot(now);
    routing_.boot(now);
    update_radio(now);
  } else {
    on_ = false;
    activity_ = Activity::Off;
    trace_lifecycle(now, false);
  }
  reschedule_power_event(now);
}

void Node::finalize(TimeUs end, bool dump_neighbors) {
  sync_energy(end);
  if (on_) {
    cumulative_on_ += end - last_transition_;
    last_transition_ = end;
  }

  Json rec;
  rec["kind"] = "ledger";
  rec["node"] = cfg_.id;
  rec["initial_fj"] = store_.config().initial_fj;
  rec["harvest_fj"] = store_.harvest_gross_fj();
  rec["overflow_fj"] = store_.overflow_lost_fj();
  rec["deficit_fj"] = store_.deficit_unmet_fj();
  rec["final_fj"] = store_.level_fj();
  rec["conserved"] = store_.conservation_holds();
  Json consumed, times;
  for (int a = 0; a < kNumActivities; ++a) {
    const char* name = activity_name(static_cast<Activity>(a));
    consumed[name] = store_.consumed_fj(static_cast<Activity>(a));
    times[name] = time_in_[a];
  }
  rec["consumed_fj"] = std::move(consumed);
  rec["time_us"] = std::move(times);
  rec["on_us"] = cumulative_on_;
  rec["off_transitions"] = off_transitions_;
  TimeUs radio_active = time_in_[static_cast<int>(Activity::IdleListen)] +
                        time_in_[static_cast<int>(Activity::Rx)] +
                        time_in_[static_cast<int>(Activity::Tx)];
  rec["radio_active_us"] = radio_active;
  trace_->emit(end, std::move(rec));

  if (dump_neighbors) {
    Json nd;
    nd["kind"] = "neighbor_dump";
    nd["node"] = cfg_.id;
    nd["neighbors"] = neighbors_.dump(end);
    trace_->emit(end, std::move(nd));
  }
}

// ---------------------------------------------------------------------------
// ChannelClient

bool Node::radio_listening() const {
  return on_ && !transmitting_ && mac_.wants_listen();
}

void Node::on_medium_delta(int delta, TimeUs now) {
  medium_busy_ += delta;
  update_radio(now);
}

void Node::begin_tx(Frame frame, TimeUs now) {
  channel_->invalidate_exposures(cfg_.id);  // we stop listening to transmit
  transmitting_ = true;
  update_radio(now);
  channel_->begin_tx(cfg_.id, std::move(frame), now);
}

void Node::on_tx_done(TimeUs now) {
  transmitting_ = false;
  mac_.on_tx_complete(now);
  update_radio(now);
}

void Node::on_frame_received(const Frame& frame, TimeUs now) {
  if (!on_) return;
  mac_.on_frame(frame, now);
}

void Node::on_frame_collision(TimeUs now) {
  if (!on_) return;
  mac_.on_collision(now);
}

}  // namespace oppnet
