#include "oppnet/tlv.hpp"

namespace oppnet::tlv {

std::vector<uint8_t> encode_routing_set(const std::vector<NodeId>& entries,
                                        uint16_t version) {
  size_t n = entries.size();
  if (n > kMaxEntriesPerOption) n = kMaxEntriesPerOption;
  std::vector<uint8_t> out;
  out.reserve(2 + 3 + 2 * n);
  out.push_back(kRoutingSetType);
  out.push_back(static_cast<uint8_t>(3 + 2 * n));
  out.push_back(0x00);  // flags: bloom bit clear
  out.push_back(static_cast<uint8_t>(version >> 8));
  out.push_back(static_cast<uint8_t>(version & 0xff));
  for (size_t i = 0; i < n; ++i) {
    out.push_back(static_cast<uint8_t>(entries[i] >> 8));
    out.push_back(static_cast<uint8_t>(entries[i] & 0xff));
  }
  return out;
}

std::optional<DecodedRoutingSet> decode_routing_set_value(const uint8_t* data,
                                                          size_t len) {
  if (len < 3) return std::nullopt;
  if (data[0] & 0x01) return std::nullopt;  // bloom variant not supported
  if ((len - 3) % 2 != 0) return std::nullopt;
  DecodedRoutingSet set;
  set.version = static_cast<uint16_t>((data[1] << 8) | data[2]);
  for (size_t i = 3; i + 1 < len; i += 2) {
    set.entries.push_back(static_cast<NodeId>((data[i] << 8) | data[i + 1]));
  }
  return set;
}

StripResult strip_routing_set(const std::vector<uint8_t>& options) {
  StripResult res;
  size_t i = 0;
  while (i < options.size()) {
    if (i + 2 > options.size()) {
      res.malformed = true;
      break;
    }
    uint8_t type = options[i];
    uint8_t len = options[i + 1];
    if (i + 2 + len > options.size()) {
      res.malformed = true;
      break;
    }
    if (type == kRoutingSetType && !res.set) {
      auto decoded = decode_routing_set_value(options.data() + i + 2, len);
      if (decoded) {
        res.set = std::move(decoded);
      } else {
        res.malformed = true;  // option dropped either way
      }
    } else {
      res.remaining.insert(res.remaining.end(), options.begin() + i,
                           options.begin() + i + 2 + len);
    }
    i += 2 + static_cast<size_t>(len);
  }
  return res;
}

}  // namespace oppnet::tlv
