#include "oppnet/mac.hpp"

#include "oppnet/node.hpp"

namespace oppnet {

MacAnycast::MacAnycast(Node* node, const MacParams* params)
    : node_(node), params_(params) {}

uint64_t MacAnycast::new_train_id() {
  return (static_cast<uint64_t>(node_->node_id()) << 32) | ++train_counter_;
}

void MacAnycast::emit_signal(EncounterKind kind, std::optional<NodeId> peer,
                             const Frame* frame, TimeUs now) {
  EncounterSignal sig{kind, peer, frame, now};
  if (node_->trace_sink().trace_signals) {
    Json rec;
    rec["kind"] = "signal";
    rec["node"] = node_->node_id();
    rec["signal"] = encounter_name(kind);
    if (peer) rec["peer"] = *peer;
    node_->trace_sink().emit(now, std::move(rec));
  }
  for (auto& l : listeners_) l(sig);
}

bool MacAnycast::wants_listen() const {
  return window_open_ || in_gap_ || (acceptance_ && !acceptance_->tx_in_flight);
}

// ---------------------------------------------------------------------------
// Wake schedule

void MacAnycast::boot(TimeUs now) {
  if (!phase_set_) {
    phase_ = static_cast<TimeUs>(
        node_->rng(RngPurpose::Phase).uniform_int(params_->wake_interval));
    phase_set_ = true;
  }
  if (node_->is_on()) schedule_next_window(now);
}

void MacAnycast::schedule_next_window(TimeUs now) {
  TimeUs k = 0;
  if (now > phase_) {
    k = (now - phase_ + params_->wake_interval - 1) / params_->wake_interval;
  }
  TimeUs at = phase_ + k * params_->wake_interval;
  if (at < now) at += params_->wake_interval;
  window_timer_ =
      node_->schedule(at - now, [this] { open_window(node_->engine().now()); });
}

void MacAnycast::open_window(TimeUs now) {
  window_open_ = true;
  window_peer_.reset();
  node_->update_radio(now);
  window_timer_ = node_->schedule(params_->listen_len,
                                  [this] { close_window(node_->engine().now()); });
}

void MacAnycast::close_window(TimeUs now) {
  // One end-of-expected-period signal per listening window, received or not.
  emit_signal(EncounterKind::ExpectedPeriodEnd, window_peer_, nullptr, now);
  window_open_ = false;
  node_->update_radio(now);
  schedule_next_window(now);
}

// ---------------------------------------------------------------------------
// Sender side

bool MacAnycast::send_anycast(Packet packet, TimeUs now) {
  if (busy() || !node_->is_on()) return false;

  attempt_.emplace();
  attempt_->packet = std::move(packet);
  attempt_->id = new_train_id();

  TimeUs delay = 0;
  if (params_->defer_enabled && defer_) {
    DeferDecision d = defer_->should_defer(std::nullopt, now);
    delay = d.defer_for;
    Json rec;
    rec["kind"] = "defer";
    rec["node"] = node_->node_id();
    rec["defer_us"] = d.defer_for;
    rec["reason"] = defer_reason_name(d.reason);
    if (d.predicted_wake) rec["predicted_us"] = *d.predicted_wake;
    node_->trace_sink().emit(now, std::move(rec));
  }

  strobing_started_ = false;
  attempt_->timer = node_->schedule(delay, [this] {
    TimeUs t = node_->engine().now();
    attempt_->started = t;
    attempt_->deadline = t + params_->max_duration;
    strobing_started_ = true;
    start_strobe(t);
  });
  return true;
}

void MacAnycast::start_strobe(TimeUs now) {
  Frame f;
  f.kind = FrameKind::DataStrobe;
  f.src = node_->node_id();
  f.attempt_id = attempt_->id;
  f.strobe_seq = attempt_->strobe_seq++;
  f.contention_flag = attempt_->contention;
  f.packet = attempt_->packet;

  TimeUs airtime = node_->channel().airtime_us(f.wire_bytes());
  if (now + airtime + params_->ack_window > attempt_->deadline) {
    finish_attempt(AttemptOutcome::NoForwarder, kNoNode, now, true);
    return;
  }

  ++attempt_->strobes;
  in_gap_ = false;
  tx_kind_ = TxKind::Strobe;
  if (node_->trace_sink().trace_strobes) {
    Json rec;
    rec["kind"] = "mac_strobe";
    rec["node"] = node_->node_id();
    rec["seq"] = f.strobe_seq;
    rec["contention"] = f.contention_flag;
    node_->trace_sink().emit(now, std::move(rec));
  }
  node_->begin_tx(std::move(f), now);
}

void MacAnycast::gap_elapsed(TimeUs now) {
  in_gap_ = false;
  if (now >= attempt_->deadline) {
    finish_attempt(AttemptOutcome::NoForwarder, kNoNode, now, true);
    return;
  }
  start_strobe(now);
}

void MacAnycast::finish_attempt(AttemptOutcome outcome, NodeId forwarder,
                                TimeUs now, bool notify) {
  AttemptResult res;
  res.packet = std::move(attempt_->packet);
  res.outcome = outcome;
  res.forwarder = forwarder;
  res.strobes_sent = attempt_->strobes;
  res.started = attempt_->started;
  res.ended = now;
  if (attempt_->timer) node_->cancel(attempt_->timer);
  attempt_.reset();
  in_gap_ = false;

  Json rec;
  rec["kind"] = "mac_attempt";
  rec["node"] = node_->node_id();
  rec["origin"] = res.packet.origin;
  rec["seq"] = res.packet.seq;
  rec["outcome"] = outcome_name(outcome);
  rec["strobes"] = res.strobes_sent;
  if (outcome == AttemptOutcome::Forwarded) rec["to"] = forwarder;
  rec["level_mj"] = node_->level_mj(now);
  node_->trace_sink().emit(now, std::move(rec));

  node_->update_radio(now);
  if (notify) {
    if (attempt_cb_) attempt_cb_(res);
    if (idle_cb_) idle_cb_(node_->engine().now());
  }
}

// ---------------------------------------------------------------------------
// Advertisement train

bool MacAnycast::send_advertisement(std::optional<double> edc,
                                    std::vector<uint8_t> tlv, TimeUs now) {
  if (busy() || !node_->is_on()) return false;
  adv_.emplace();
  adv_->id = new_train_id();
  adv_->edc = edc;
  adv_->tlv = std::move(tlv);
  // Phase-align the train to our own wake grid: start right after our next
  // listen slot and end before the following one. The node thereby checks
  // the channel immediately before advertising and, more importantly, is
  // never deafened through its own wake slot by its own train.
  TimeUs wi = params_->wake_interval;
  TimeUs start = phase_ + params_->listen_len;
  if (start < now) {
    start += (now - start + wi - 1) / wi * wi;
  }
  adv_->deadline = start + wi - params_->listen_len;
  if (start > now) {
    adv_->timer = node_->schedule(start - now, [this] {
      adv_->timer = 0;
      adv_->started = true;
      adv_strobe(node_->engine().now());
    });
  } else {
    adv_->started = true;
    adv_strobe(now);
  }
  return true;
}

void MacAnycast::adv_strobe(TimeUs now) {
  Frame f;
  f.kind = FrameKind::Advertisement;
  f.src = node_->node_id();
  f.attempt_id = adv_->id;
  f.strobe_seq = adv_->strobe_seq++;
  f.adv_edc = adv_->edc;
  f.adv_tlv = adv_->tlv;

  TimeUs airtime = node_->channel().airtime_us(f.wire_bytes());
  if (now + airtime > adv_->deadline) {
    finish_adv(now);
    return;
  }
  in_gap_ = false;
  tx_kind_ = TxKind::Adv;
  node_->begin_tx(std::move(f), now);
}

void MacAnycast::finish_adv(TimeUs now) {
  if (adv_->timer) node_->cancel(adv_->timer);
  adv_.reset();
  in_gap_ = false;
  node_->update_radio(now);
  if (idle_cb_) idle_cb_(now);
}

// ---------------------------------------------------------------------------
// TX completion

void MacAnycast::on_tx_complete(TimeUs now) {
  switch (tx_kind_) {
    case TxKind::Strobe: {
      tx_kind_ = TxKind::None;
      if (!attempt_) return;
      in_gap_ = true;
      TimeUs gap = params_->ack_window *
                   (attempt_->contention ? params_->backoff_slots : 1);
      attempt_->timer =
          node_->schedule(gap, [this] { gap_elapsed(node_->engine().now()); });
      break;
    }
    case TxKind::Adv: {
      tx_kind_ = TxKind::None;
      if (!adv_) return;
      in_gap_ = true;  // listen briefly between advertisement strobes
      // Jitter the gap: both wake grids and the train start are phase-
      // locked, so a fixed strobe cadence would repeat the exact same
      // coverage pattern every train and could leave an unlucky neighbor
      // phase permanently unable to decode a strobe.
      TimeUs gap = params_->ack_window +
                   node_->rng(RngPurpose::AdvJitter)
                       .uniform_int(params_->ack_window);
      adv_->timer = node_->schedule(gap, [this] {
        in_gap_ = false;
        adv_strobe(node_->engine().now());
      });
      break;
    }
    case TxKind::Ack: {
      tx_kind_ = TxKind::None;
      if (!acceptance_) return;
      acceptance_->tx_in_flight = false;
      arm_cessation(now);
      break;
    }
    case TxKind::None:
      break;
  }
  node_->update_radio(now);
}

// ---------------------------------------------------------------------------
// Receive side

void MacAnycast::on_frame(const Frame& frame, TimeUs now) {
  if (window_open_) window_peer_ = frame.src;

  switch (frame.kind) {
    case FrameKind::Ack:
      if (attempt_ && in_gap_ && frame.attempt_id == attempt_->id) {
        // The forwarder negotiation succeeded: stop strobing immediately.
        emit_signal(EncounterKind::Expected, frame.acker, &frame, now);
        finish_attempt(AttemptOutcome::Forwarded, frame.acker, now, true);
      } else {
        emit_signal(EncounterKind::Coincidental, frame.src, &frame, now);
        handle_foreign_ack(frame, now);
      }
      return;
    case FrameKind::Advertisement:
      emit_signal(EncounterKind::Coincidental, frame.src, &frame, now);
      return;
    case FrameKind::DataStrobe:
      emit_signal(EncounterKind::Coincidental, frame.src, &frame, now);
      handle_data_strobe(frame, now);
      return;
  }
}

void MacAnycast::handle_data_strobe(const Frame& frame, TimeUs now) {
  if (!frame.packet || !judge_) return;

  if (acceptance_) {
    if (acceptance_->attempt_id == frame.attempt_id) {
      // Our ACK did not take (collision or missed); answer again.
      if (acceptance_->ack_timer) node_->cancel(acceptance_->ack_timer);
      if (acceptance_->cessation_timer) node_->cancel(acceptance_->cessation_timer);
      acceptance_->ack_timer = 0;
      acceptance_->cessation_timer = 0;
      acceptance_->acked = false;  // new round of the ACK race
      schedule_ack(frame.contention_flag, now);
    }
    return;  // engaged with another attempt: ignore
  }
  // Radio committed to our own data or advertisement train. Trains are
  // phase-aligned to our wake grid, so this deafness never covers one of our
  // own listen slots; senders simply catch the next slot.
  if (attempt_ || (adv_ && adv_->started)) return;

  Verdict v = judge_->judge(frame.packet->criteria, now);
  if (v != Verdict::Accept) return;

  if (adv_) {
    // Incoming data outranks an advertisement train that has not started
    // strobing yet: drop the pending train and take the packet.
    if (adv_->timer) node_->cancel(adv_->timer);
    adv_.reset();
  }

  acceptance_.emplace();
  acceptance_->attempt_id = frame.attempt_id;
  acceptance_->sender = frame.src;
  acceptance_->packet = *frame.packet;
  acceptance_->strobe_airtime = node_->channel().airtime_us(frame.wire_bytes());
  acceptance_->accepted_at = now;
  node_->update_radio(now);  // hold the radio in listen while engaged
  schedule_ack(frame.contention_flag, now);
}

void MacAnycast::schedule_ack(bool contention, TimeUs now) {
  int slot = 0;
  if (contention) {
    slot = static_cast<int>(
        node_->rng(RngPurpose::Backoff).uniform_int(params_->backoff_slots));
  }
  TimeUs delay = static_cast<TimeUs>(slot) * params_->ack_window;
  if (delay == 0) {
    send_ack(now);
  } else {
    acceptance_->ack_timer =
        node_->schedule(delay, [this] { send_ack(node_->engine().now()); });
  }
}

void MacAnycast::send_ack(TimeUs now) {
  if (!acceptance_) return;
  acceptance_->ack_timer = 0;
  Frame f;
  f.kind = FrameKind::Ack;
  f.src = node_->node_id();
  f.attempt_id = acceptance_->attempt_id;
  f.acker = node_->node_id();
  acceptance_->acked = true;
  acceptance_->ack_time = now;
  acceptance_->tx_in_flight = true;
  tx_kind_ = TxKind::Ack;
  node_->begin_tx(std::move(f), now);
}

void MacAnycast::arm_cessation(TimeUs now) {
  if (acceptance_->cessation_timer) node_->cancel(acceptance_->cessation_timer);
  TimeUs quiet = acceptance_->strobe_airtime +
                 params_->ack_window * (params_->backoff_slots + 2);
  acceptance_->cessation_timer =
      node_->schedule(quiet, [this] { deliver_up(node_->engine().now()); });
  node_->update_radio(now);
}

void MacAnycast::handle_foreign_ack(const Frame& frame, TimeUs now) {
  if (!acceptance_ || frame.attempt_id != acceptance_->attempt_id) return;
  if (frame.acker == node_->node_id()) return;
  // Another node answered the current round before we did: stand down, it
  // will carry the packet.
  if (!acceptance_->acked) abandon_acceptance(now);
}

void MacAnycast::abandon_acceptance(TimeUs now) {
  if (acceptance_->ack_timer) node_->cancel(acceptance_->ack_timer);
  if (acceptance_->cessation_timer) node_->cancel(acceptance_->cessation_timer);
  acceptance_.reset();
  node_->update_radio(now);
  if (idle_cb_) idle_cb_(now);
}

void MacAnycast::deliver_up(TimeUs now) {
  Packet pkt = std::move(acceptance_->packet);
  NodeId from = acceptance_->sender;
  acceptance_.reset();
  node_->update_radio(now);
  if (deliver_cb_) deliver_cb_(pkt, from, now);
  if (idle_cb_) idle_cb_(node_->engine().now());
}

void MacAnycast::on_collision(TimeUs now) {
  // While strobing, undecodable energy in the ACK gap means several
  // acceptors answered at once: switch to contention mode.
  if (attempt_ && in_gap_) attempt_->contention = true;

  // After acking, undecodable energy may be our sender still strobing behind
  // interference: the medium is not quiet, so hold the cessation timer. The
  // hold is bounded by the sender's maximum train length, past which the
  // strobing for this attempt must have ceased.
  if (acceptance_ && acceptance_->acked && acceptance_->cessation_timer &&
      now - acceptance_->accepted_at <= params_->max_duration) {
    arm_cessation(now);
  }
}

// ---------------------------------------------------------------------------
// Power lifecycle

void MacAnycast::on_power_off(TimeUs now) {
  if (attempt_) {
    if (strobing_started_) {
      finish_attempt(AttemptOutcome::AbortedEnergy, kNoNode, now, false);
    } else {
      attempt_.reset();
    }
  }
  adv_.reset();
  acceptance_.reset();
  tx_kind_ = TxKind::None;
  in_gap_ = false;
  window_open_ = false;
  strobing_started_ = false;
  // Pending timers are cancelled wholesale by the node.
}

void MacAnycast::on_power_on(TimeUs now) {
  schedule_next_window(now);
}

}  // namespace oppnet
