#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oppnet/time.hpp"

namespace oppnet {

using NodeId = uint16_t;
constexpr NodeId kNoNode = 0xffff;

// ---------------------------------------------------------------------------
// Forwarder selection criteria, attached to every packet handed to the MAC.

enum class RouteMetric { UpwardEdc, DownwardSet };

struct ForwarderCriteria {
  RouteMetric metric = RouteMetric::UpwardEdc;
  // Present iff metric == UpwardEdc. nullopt means the sender had no route
  // when tagging (never transmitted in that state, but kept total).
  std::optional<double> sender_edc;
  NodeId final_dest = kNoNode;
  NodeId origin = kNoNode;
  uint32_t packet_seq = 0;
  // Downward false-positive recovery: when set, this packet is being handed
  // back to the named previous hop because no forwarder could place it. Only
  // that node accepts; it forgets the poisoned set entry and tries the
  // remaining branches.
  std::optional<NodeId> return_to;
};

// Identity of a network packet, used for duplicate suppression.
struct PacketKey {
  NodeId origin;
  uint32_t seq;
  bool operator<(const PacketKey& o) const {
    if (origin != o.origin) return origin < o.origin;
    return seq < o.seq;
  }
  bool operator==(const PacketKey& o) const {
    return origin == o.origin && seq == o.seq;
  }
};

// ---------------------------------------------------------------------------
// Network packet.

struct Packet {
  NodeId origin = kNoNode;
  NodeId final_dest = kNoNode;
  uint32_t seq = 0;
  int ttl = 16;
  uint32_t payload_len = 0;
  ForwarderCriteria criteria;
  // Concatenated TLV option bytes riding on the packet (may be empty).
  std::vector<uint8_t> tlv;

  // Simulator-side metadata (not on the wire): route record and birth time.
  std::vector<NodeId> hops;
  TimeUs originated_at = 0;

  PacketKey key() const { return PacketKey{origin, seq}; }
};

// ---------------------------------------------------------------------------
// MAC frames.

enum class FrameKind { DataStrobe, Ack, Advertisement };

constexpr uint32_t kMacHeaderBytes = 12;
constexpr uint32_t kNetHeaderBytes = 10;
constexpr uint32_t kAckBytes = 8;
constexpr uint32_t kAdvPayloadBytes = 6;

struct Frame {
  FrameKind kind = FrameKind::DataStrobe;
  NodeId src = kNoNode;
  uint64_t attempt_id = 0;  // identifies one strobe train / anycast attempt
  uint32_t strobe_seq = 0;
  bool contention_flag = false;
  NodeId acker = kNoNode;                // Ack only
  std::optional<Packet> packet;          // DataStrobe only
  std::optional<double> adv_edc;         // Advertisement only; nullopt = no route
  std::vector<uint8_t> adv_tlv;          // Advertisement piggyback

  uint32_t wire_bytes() const {
    switch (kind) {
      case FrameKind::Ack:
        return kAckBytes;
      case FrameKind::Advertisement:
        return kMacHeaderBytes + kAdvPayloadBytes +
               static_cast<uint32_t>(adv_tlv.size());
      case FrameKind::DataStrobe:
        return kMacHeaderBytes + kNetHeaderBytes +
               (packet ? packet->payload_len +
                             static_cast<uint32_t>(packet->tlv.size())
                       : 0);
    }
    return kMacHeaderBytes;
  }
};

// ---------------------------------------------------------------------------
// Overhearing signals (MAC -> neighbor table).

enum class EncounterKind { Expected, Coincidental, ExpectedPeriodEnd };

inline const char* encounter_name(EncounterKind k) {
  switch (k) {
    case EncounterKind::Expected: return "expected";
    case EncounterKind::Coincidental: return "coincidental";
    case EncounterKind::ExpectedPeriodEnd: return "expected_period_end";
  }
  return "?";
}

struct EncounterSignal {
  EncounterKind kind;
  std::optional<NodeId> peer;   // absent for ExpectedPeriodEnd with no reception
  const Frame* frame = nullptr; // absent for ExpectedPeriodEnd
  TimeUs at = 0;
};

// ---------------------------------------------------------------------------
// Judge verdicts and defer decisions.

enum class Verdict { Accept, Reject };

enum class DeferReason { NoHistory, PredictedAsleep, PredictedAwake };

inline const char* defer_reason_name(DeferReason r) {
  switch (r) {
    case DeferReason::NoHistory: return "no_history";
    case DeferReason::PredictedAsleep: return "predicted_asleep";
    case DeferReason::PredictedAwake: return "predicted_awake";
  }
  return "?";
}

struct DeferDecision {
  TimeUs defer_for = 0;
  DeferReason reason = DeferReason::NoHistory;
  std::optional<TimeUs> predicted_wake;  // diagnostic
};

// ---------------------------------------------------------------------------
// Anycast attempt outcome (MAC -> routing).

enum class AttemptOutcome { Forwarded, NoForwarder, AbortedEnergy };

inline const char* outcome_name(AttemptOutcome o) {
  switch (o) {
    case AttemptOutcome::Forwarded: return "forwarded";
    case AttemptOutcome::NoForwarder: return "no_forwarder";
    case AttemptOutcome::AbortedEnergy: return "aborted_energy";
  }
  return "?";
}

struct AttemptResult {
  Packet packet;
  AttemptOutcome outcome = AttemptOutcome::NoForwarder;
  NodeId forwarder = kNoNode;  // valid iff Forwarded
  int strobes_sent = 0;
  TimeUs started = 0;
  TimeUs ended = 0;
};

}  // namespace oppnet
