#include <doctest.h>

#include <cmath>

#include "oppnet/routing_table.hpp"
#include "oppnet/rng.hpp"

using namespace oppnet;

namespace {

// Independent oracle: minimum EDC over ALL subsets of neighbors, not just
// prefixes of the sorted order.
double subset_min_edc(const std::vector<NeighborEdc>& ns, double w) {
  double best = std::numeric_limits<double>::infinity();
  size_t n = ns.size();
  for (size_t mask = 1; mask < (1u << n); ++mask) {
    double sp = 0, spe = 0;
    for (size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        sp += ns[i].p_link;
        spe += ns[i].p_link * ns[i].advertised_edc;
      }
    }
    best = std::min(best, w + (1.0 + spe) / sp);
  }
  return best;
}

}  // namespace

TEST_CASE("one neighbor (edc 0, p 1.0), w 0.2 -> EDC 1.2") {
  auto r = compute_edc({{1, 0.0, 1.0}}, 0.2);
  REQUIRE(r.edc.has_value());
  CHECK(*r.edc == doctest::Approx(1.2));
  CHECK(r.forwarder_set == std::vector<NodeId>{1});
}

TEST_CASE("two neighbors, w 0: prefixes 3.0 and 2.5, both kept") {
  auto r = compute_edc({{1, 1.0, 0.5}, {2, 2.0, 0.5}}, 0.0);
  REQUIRE(r.edc.has_value());
  CHECK(*r.edc == doctest::Approx(2.5));
  CHECK(r.forwarder_set == std::vector<NodeId>{1, 2});
}

TEST_CASE("empty neighbor list means no route") {
  auto r = compute_edc({}, 0.1);
  CHECK_FALSE(r.edc.has_value());
  CHECK(r.forwarder_set.empty());
}

TEST_CASE("p_link = 0 neighbors are excluded") {
  auto r = compute_edc({{1, 0.0, 0.0}}, 0.1);
  CHECK_FALSE(r.edc.has_value());
}

TEST_CASE("ties in advertised edc break by node id") {
  auto r1 = compute_edc({{5, 1.0, 0.4}, {2, 1.0, 0.4}}, 0.1);
  auto r2 = compute_edc({{2, 1.0, 0.4}, {5, 1.0, 0.4}}, 0.1);
  CHECK(r1.forwarder_set == r2.forwarder_set);
  REQUIRE(!r1.forwarder_set.empty());
  CHECK(r1.forwarder_set.front() == 2);
}

TEST_CASE("greedy prefix equals exhaustive subset minimum on random inputs") {
  Rng rng(11, 0, RngPurpose::Phase);
  for (int iter = 0; iter < 200; ++iter) {
    size_t n = 1 + rng.uniform_int(8);
    std::vector<NeighborEdc> ns;
    for (size_t i = 0; i < n; ++i) {
      ns.push_back({static_cast<NodeId>(i), rng.uniform() * 5.0,
                    0.05 + 0.95 * rng.uniform()});
    }
    double w = rng.uniform() * 0.5;
    auto r = compute_edc(ns, w);
    REQUIRE(r.edc.has_value());
    CHECK(*r.edc == doctest::Approx(subset_min_edc(ns, w)).epsilon(1e-12));
  }
}

TEST_CASE("monotonicity: adding a neighbor never increases the EDC") {
  Rng rng(13, 0, RngPurpose::Phase);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<NeighborEdc> ns;
    size_t n = 1 + rng.uniform_int(6);
    for (size_t i = 0; i < n; ++i) {
      ns.push_back({static_cast<NodeId>(i), rng.uniform() * 5.0,
                    0.05 + 0.95 * rng.uniform()});
    }
    auto before = compute_edc(ns, 0.1);
    ns.push_back({static_cast<NodeId>(n), rng.uniform() * 5.0,
                  0.05 + 0.95 * rng.uniform()});
    auto after = compute_edc(ns, 0.1);
    REQUIRE(before.edc.has_value());
    REQUIRE(after.edc.has_value());
    CHECK(*after.edc <= *before.edc + 1e-12);
  }
}

TEST_CASE("sink pins EDC to zero with an empty forwarder set") {
  RoutingParams params;
  RoutingTable t(0, true, &params, nullptr);
  t.recompute({{1, 3.0, 0.9}}, 0);
  REQUIRE(t.own_edc().has_value());
  CHECK(*t.own_edc() == 0.0);
  CHECK(t.forwarder_set().empty());
}

TEST_CASE("upward judge: strict progress with margin") {
  RoutingParams params;  // margin 0.5
  RoutingTable t(3, false, &params, nullptr);
  t.recompute({{0, 0.0, 1.0}}, 0);  // own EDC = 0.1 + 1 = 1.1

  ForwarderCriteria c;
  c.metric = RouteMetric::UpwardEdc;
  c.origin = 9;
  c.packet_seq = 1;

  c.sender_edc = 2.5;  // 1.1 + 0.5 <= 2.5
  CHECK(t.judge(c, 0) == Verdict::Accept);

  RoutingTable t2(3, false, &params, nullptr);
  t2.recompute({{0, 1.3, 1.0}}, 0);  // own EDC = 0.1 + (1 + 1.3) = 2.4
  CHECK(t2.judge(c, 0) == Verdict::Reject);  // 2.9 > 2.5
}

TEST_CASE("no route or no sender tag rejects upward") {
  RoutingParams params;
  RoutingTable t(3, false, &params, nullptr);
  ForwarderCriteria c;
  c.metric = RouteMetric::UpwardEdc;
  c.sender_edc = 99.0;
  c.origin = 9;
  c.packet_seq = 1;
  CHECK(t.judge(c, 0) == Verdict::Reject);  // own EDC is infinite
}

TEST_CASE("duplicates are rejected once forwarded") {
  RoutingParams params;
  RoutingTable t(3, false, &params, nullptr);
  t.recompute({{0, 0.0, 1.0}}, 0);
  ForwarderCriteria c;
  c.metric = RouteMetric::UpwardEdc;
  c.sender_edc = 5.0;
  c.origin = 9;
  c.packet_seq = 42;
  CHECK(t.judge(c, 0) == Verdict::Accept);
  t.mark_forwarded(PacketKey{9, 42});
  CHECK(t.judge(c, 0) == Verdict::Reject);
}

TEST_CASE("downward judge: self or routing-set membership") {
  RoutingParams params;
  RoutingTable t(3, false, &params, nullptr);
  t.set_downward_membership([](NodeId dest, TimeUs) { return dest == 7; });

  ForwarderCriteria c;
  c.metric = RouteMetric::DownwardSet;
  c.origin = 0;
  c.packet_seq = 1;

  c.final_dest = 3;
  CHECK(t.judge(c, 0) == Verdict::Accept);  // self
  c.final_dest = 7;
  c.packet_seq = 2;
  CHECK(t.judge(c, 0) == Verdict::Accept);  // member
  c.final_dest = 8;
  c.packet_seq = 3;
  CHECK(t.judge(c, 0) == Verdict::Reject);
}

TEST_CASE("calculate_upwards_cost is sink-rooted") {
  RoutingParams params;
  RoutingTable t(3, false, &params, nullptr);
  t.recompute({{0, 0.0, 1.0}}, 0);
  auto up = t.calculate_upwards_cost(0, 0);
  CHECK(up.supported);
  CHECK(*up.cost == doctest::Approx(1.1));
  auto bad = t.calculate_upwards_cost(5, 0);
  CHECK_FALSE(bad.supported);
}
