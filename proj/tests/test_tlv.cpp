#include <doctest.h>

#include "oppnet/rng.hpp"
#include "oppnet/tlv.hpp"

using namespace oppnet;

TEST_CASE("routing-set option encodes to the exact wire bytes") {
  auto bytes = tlv::encode_routing_set({3, 5, 7}, 1);
  std::vector<uint8_t> expect = {
      0x52,        // type
      0x09,        // length: flags + version + 3 entries
      0x00,        // flags (bloom bit clear)
      0x00, 0x01,  // version, big-endian
      0x00, 0x03, 0x00, 0x05, 0x00, 0x07,
  };
  CHECK(bytes == expect);
}

TEST_CASE("encode/decode round trip") {
  auto bytes = tlv::encode_routing_set({1, 1000, 65000}, 0xBEEF);
  auto dec = tlv::decode_routing_set_value(bytes.data() + 2, bytes[1]);
  REQUIRE(dec.has_value());
  CHECK(dec->version == 0xBEEF);
  CHECK(dec->entries == std::vector<NodeId>{1, 1000, 65000});
}

TEST_CASE("strip removes the routing set and preserves unknown options") {
  std::vector<uint8_t> unknown = {0x99, 0x02, 0xAA, 0xBB};
  auto rs = tlv::encode_routing_set({9}, 2);
  std::vector<uint8_t> all = unknown;
  all.insert(all.end(), rs.begin(), rs.end());
  std::vector<uint8_t> unknown2 = {0x7f, 0x00};
  all.insert(all.end(), unknown2.begin(), unknown2.end());

  auto res = tlv::strip_routing_set(all);
  CHECK_FALSE(res.malformed);
  REQUIRE(res.set.has_value());
  CHECK(res.set->entries == std::vector<NodeId>{9});
  std::vector<uint8_t> expect_rest = unknown;
  expect_rest.insert(expect_rest.end(), unknown2.begin(), unknown2.end());
  CHECK(res.remaining == expect_rest);
}

TEST_CASE("malformed tail is dropped without losing prior options") {
  std::vector<uint8_t> all = {0x99, 0x01, 0xAA,  // fine
                              0x52, 0x20};       // claims 32 bytes, has none
  auto res = tlv::strip_routing_set(all);
  CHECK(res.malformed);
  CHECK_FALSE(res.set.has_value());
  CHECK(res.remaining == std::vector<uint8_t>{0x99, 0x01, 0xAA});
}

TEST_CASE("bloom flag bit and odd entry bytes are rejected as malformed") {
  auto bytes = tlv::encode_routing_set({4}, 0);
  bytes[2] = 0x01;  // bloom variant
  CHECK_FALSE(tlv::decode_routing_set_value(bytes.data() + 2, bytes[1]).has_value());

  auto odd = tlv::encode_routing_set({4}, 0);
  odd.push_back(0xFF);
  odd[1] = static_cast<uint8_t>(odd[1] + 1);
  CHECK_FALSE(tlv::decode_routing_set_value(odd.data() + 2, odd[1]).has_value());
}

TEST_CASE("property: random sets round-trip through strip") {
  Rng rng(7, 1, RngPurpose::Phase);
  for (int iter = 0; iter < 500; ++iter) {
    size_t n = rng.uniform_int(30);
    std::vector<NodeId> entries;
    for (size_t i = 0; i < n; ++i) {
      entries.push_back(static_cast<NodeId>(rng.uniform_int(0xfffe)));
    }
    uint16_t version = static_cast<uint16_t>(rng.uniform_int(0x10000));
    auto bytes = tlv::encode_routing_set(entries, version);
    auto res = tlv::strip_routing_set(bytes);
    CHECK_FALSE(res.malformed);
    REQUIRE(res.set.has_value());
    CHECK(res.set->entries == entries);
    CHECK(res.set->version == version);
    CHECK(res.remaining.empty());
  }
}
