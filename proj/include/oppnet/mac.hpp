#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "oppnet/engine.hpp"
#include "oppnet/interfaces.hpp"
#include "oppnet/params.hpp"
#include "oppnet/types.hpp"

namespace oppnet {

class Node;

// Strobed low-power-listening anycast MAC. The sender repeats the data frame
// across a full wake interval; any duty-cycled neighbor that hears a strobe
// asks the forwarding judge and, on accept, answers with an ACK. Colliding
// ACKs switch the attempt into contention mode with uniform backoff slots.
class MacAnycast : public IOpportunisticLinkLayer, public ILinkOverhearingSource {
 public:
  MacAnycast(Node* node, const MacParams* params);

  // IOpportunisticLinkLayer
  bool send_anycast(Packet packet, TimeUs now) override;
  bool busy() const override { return attempt_ || adv_ || acceptance_; }
  void set_forwarding_judge(IForwardingJudge* judge) override { judge_ = judge; }
  void set_defer_hook(IDeferTransmission* defer) override { defer_ = defer; }
  void set_attempt_callback(AttemptCallback cb) override { attempt_cb_ = std::move(cb); }
  void set_deliver_callback(DeliverCallback cb) override { deliver_cb_ = std::move(cb); }

  // Fired whenever the MAC becomes free for the next send.
  void set_idle_callback(std::function<void(TimeUs)> cb) { idle_cb_ = std::move(cb); }

  // ILinkOverhearingSource
  void subscribe_link_signals(Listener listener) override {
    listeners_.push_back(std::move(listener));
  }

  // Advertisement strobe train spanning one wake interval (no ACKs).
  bool send_advertisement(std::optional<double> edc, std::vector<uint8_t> tlv,
                          TimeUs now);

  void boot(TimeUs now);
  void on_power_off(TimeUs now);
  void on_power_on(TimeUs now);

  // Channel callbacks, routed through the owning node.
  void on_frame(const Frame& frame, TimeUs now);
  void on_collision(TimeUs now);
  void on_tx_complete(TimeUs now);

  bool wants_listen() const;
  TimeUs wake_phase() const { return phase_; }
  void override_wake_phase(TimeUs phase) {
    phase_ = phase;
    phase_set_ = true;
  }

 private:
  enum class TxKind { None, Strobe, Adv, Ack };

  struct Attempt {
    Packet packet;
    uint64_t id;
    TimeUs started = 0;     // first strobe
    TimeUs deadline = 0;
    int strobes = 0;
    uint32_t strobe_seq = 0;
    bool contention = false;
    Engine::Handle timer = 0;  // defer-start or gap timer
  };

  struct Advert {
    uint64_t id;
    std::optional<double> edc;
    std::vector<uint8_t> tlv;
    TimeUs deadline = 0;
    uint32_t strobe_seq = 0;
    Engine::Handle timer = 0;
    // False while waiting for the wake-grid-aligned start; the node stays
    // fully receptive until the first strobe goes out.
    bool started = false;
  };

  struct Acceptance {
    uint64_t attempt_id;
    NodeId sender;
    Packet packet;
    TimeUs strobe_airtime;
    TimeUs accepted_at = 0;
    bool acked = false;
    bool tx_in_flight = false;
    TimeUs ack_time = 0;
    Engine::Handle ack_timer = 0;
    Engine::Handle cessation_timer = 0;
  };

  void start_strobe(TimeUs now);
  void gap_elapsed(TimeUs now);
  void finish_attempt(AttemptOutcome outcome, NodeId forwarder, TimeUs now,
                      bool notify);
  void adv_strobe(TimeUs now);
  void finish_adv(TimeUs now);

  void handle_data_strobe(const Frame& frame, TimeUs now);
  void handle_foreign_ack(const Frame& frame, TimeUs now);
  void schedule_ack(bool contention, TimeUs now);
  void send_ack(TimeUs now);
  void arm_cessation(TimeUs now);
  void abandon_acceptance(TimeUs now);
  void deliver_up(TimeUs now);

  void schedule_next_window(TimeUs now);
  void open_window(TimeUs now);
  void close_window(TimeUs now);

  void emit_signal(EncounterKind kind, std::optional<NodeId> peer,
                   const Frame* frame, TimeUs now);
  uint64_t new_train_id();

  Node* node_;
  const MacParams* params_;
  IForwardingJudge* judge_ = nullptr;
  IDeferTransmission* defer_ = nullptr;
  AttemptCallback attempt_cb_;
  DeliverCallback deliver_cb_;
  std::function<void(TimeUs)> idle_cb_;
  std::vector<Listener> listeners_;

  std::optional<Attempt> attempt_;
  std::optional<Advert> adv_;
  std::optional<Acceptance> acceptance_;
  TxKind tx_kind_ = TxKind::None;
  bool in_gap_ = false;        // sender listening for ACKs between strobes
  bool strobing_started_ = false;

  bool window_open_ = false;
  std::optional<NodeId> window_peer_;
  Engine::Handle window_timer_ = 0;

  TimeUs phase_ = 0;
  bool phase_set_ = false;
  uint32_t train_counter_ = 0;
};

}  // namespace oppnet
