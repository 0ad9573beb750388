#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oppnet/types.hpp"

namespace oppnet::tlv {

// Routing-set option, bit-exact wire format:
//   [type: 1][length: 1][flags: 1 (bit0 = bloom, must be 0)]
//   [version: 2 big-endian][entries: length-3 bytes, 2-byte big-endian each]
constexpr uint8_t kRoutingSetType = 0x52;
constexpr size_t kMaxEntriesPerOption = 126;  // (255 - 3) / 2

struct DecodedRoutingSet {
  uint16_t version = 0;
  std::vector<NodeId> entries;
};

std::vector<uint8_t> encode_routing_set(const std::vector<NodeId>& entries,
                                        uint16_t version);

// Decode a single routing-set option body (value bytes after type+length).
std::optional<DecodedRoutingSet> decode_routing_set_value(
    const uint8_t* data, size_t len);

struct StripResult {
  std::vector<uint8_t> remaining;  // all options except the routing set
  std::optional<DecodedRoutingSet> set;
  bool malformed = false;
};

// Walk a concatenated option list, remove the routing-set option and decode
// it. Unknown option types are preserved untouched. A malformed tail is
// dropped (the carrier packet is still usable).
StripResult strip_routing_set(const std::vector<uint8_t>& options);

}  // namespace oppnet::tlv
