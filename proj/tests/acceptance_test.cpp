// Acceptance gate: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Each criterion builds its scenarios inline, runs the
// simulator through the public API and checks the observable outputs
// (summary JSON and trace records) only.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oppnet/rng.hpp"
#include "oppnet/routing_table.hpp"
#include "oppnet/scenario.hpp"
#include "oppnet/sim.hpp"
#include "oppnet/tlv.hpp"

using namespace oppnet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

RunResult run_doc(const Json& doc, const std::string& trace_path = "",
                  std::optional<uint64_t> seed_override = std::nullopt) {
  Scenario s = parse_scenario(doc);
  RunOptions opts;
  opts.trace_path = trace_path;
  opts.seed_override = seed_override;
  return run_scenario(s, opts);
}

std::vector<Json> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot read trace " + path);
  std::vector<Json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(Json::parse(line));
  }
  return out;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Json* flow_of(const Json& summary, int src, int dest) {
  for (const auto& f : summary["flows"]) {
    if (f["src"] == src && f["dest"] == dest) return &f;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Scenario documents shared between criteria.

Json line5_doc() {
  // Load is sized so the end of the line keeps up: each relayed packet
  // occupies the next hop for up to a wake interval, so a 10 s period
  // leaves comfortable headroom over the ~4 s worst-case service time.
  // The two-minute warm-up lets link estimates (and with them the EDC
  // gradient) converge before the first packet is tagged.
  return Json{
      {"duration_s", 1200.0},
      {"seed", 5},
      {"sink", 0},
      {"topology", {{"generator", "line"}, {"nodes", 5}, {"spacing_m", 20.0}}},
      {"routing", {{"adv_interval_s", 5.0}}},
      {"energy", {{"harvest_mw", 20.0}}},  // always on
      {"traffic", Json::array({Json{{"type", "periodic"},
                                    {"src", 4},
                                    {"period_s", 10.0},
                                    {"start_s", 120.0},
                                    {"count", 100}}})},
  };
}

Json grid49_doc() {
  // 7x7 grid, sink in the corner, two sources six hops away on the far
  // edge. Relays harvest 4.5 mW: enough to recover, not enough to stay up
  // through sustained forwarding, so they cycle. Sources and sink harvest
  // plenty so offered load and final delivery are never energy-limited.
  return Json{
      {"duration_s", 7200.0},
      {"seed", 42},
      {"sink", 0},
      {"topology",
       {{"generator", "grid"}, {"nodes", 49}, {"cols", 7}, {"spacing_m", 20.0}}},
      {"comm_range_m", 30.0},
      {"routing", {{"adv_interval_s", 20.0}, {"w", 0.5}}},
      {"energy",
       {{"harvest_mw", 4.5}, {"capacity_mj", 25.0}, {"initial_mj", 25.0}}},
      {"energy_overrides",
       {{"0", {{"harvest_mw", 20.0}}},
        {"42", {{"harvest_mw", 20.0}}},
        {"48", {{"harvest_mw", 20.0}}}}},
      {"traffic", Json::array({Json{{"type", "periodic"},
                                    {"src", 42},
                                    {"period_s", 13.0},
                                    {"start_s", 300.0},
                                    {"count", 500}},
                               Json{{"type", "periodic"},
                                    {"src", 48},
                                    {"period_s", 13.0},
                                    {"start_s", 300.0},
                                    {"count", 500}}})},
  };
}

Json grid25_doc(double p_piggyback) {
  // Downward routing walks the gradient and may need false-positive
  // recovery detours, so destinations get a generous TTL and retry budget
  // and packets are spaced far enough apart not to contend for relays.
  return Json{
      {"duration_s", 1800.0},
      {"seed", 11},
      {"sink", 0},
      {"topology",
       {{"generator", "grid"}, {"nodes", 25}, {"cols", 5}, {"spacing_m", 20.0}}},
      {"comm_range_m", 30.0},
      {"routing",
       {{"adv_interval_s", 5.0},
        {"w", 0.5},
        {"p_piggyback", p_piggyback},
        {"max_retries", 30},
        {"ttl_default", 64}}},
      {"energy", {{"harvest_mw", 20.0}}},
      // Warm-up: 14 advertisement intervals before the sweep starts.
      {"traffic", Json::array({Json{{"type", "sweep_downward"},
                                    {"src", 0},
                                    {"start_s", 70.0},
                                    {"gap_s", 60.0}}})},
  };
}

Json two_node_defer_doc(bool defer_enabled) {
  Json doc{
      {"duration_s", 330.0},
      {"seed", 9},
      {"sink", 0},
      {"topology", {{"generator", "line"}, {"nodes", 2}, {"spacing_m", 20.0}}},
      {"wake_phase_overrides", {{"0", 0.3}}},
      {"routing", {{"adv_interval_s", 5.0}}},
      {"energy", {{"harvest_mw", 20.0}}},
      {"traffic", Json::array({Json{{"type", "periodic"},
                                    {"src", 1},
                                    {"period_s", 2.0},
                                    {"start_s", 10.0},
                                    {"count", 150}}})},
  };
  if (!defer_enabled) doc["mac"] = {{"defer_enabled", false}};
  return doc;
}

constexpr const char* kTraceA1 = "acc_a1.jsonl";
constexpr const char* kTraceA1Rerun = "acc_a1_rerun.jsonl";
constexpr const char* kTraceA4 = "acc_a4.jsonl";
constexpr const char* kTraceA4Rerun = "acc_a4_rerun.jsonl";
constexpr const char* kTraceA4Seed43 = "acc_a4_seed43.jsonl";
constexpr const char* kTraceA9 = "acc_a9.jsonl";

// Results cached across criteria so expensive runs happen once.
struct Shared {
  Json a1_summary;
  Json a4_summary;
  double a1_runtime_s = 0;
  double a4_runtime_s = 0;
  std::vector<Json> a1_trace;
  std::vector<Json> a4_trace;
} g;

// ---------------------------------------------------------------------------
// A1: always-on line baseline.

Outcome check_a1() {
  auto t0 = std::chrono::steady_clock::now();
  RunResult res = run_doc(line5_doc(), kTraceA1);
  double rt = elapsed_s(t0);
  g.a1_summary = res.summary;
  g.a1_runtime_s = rt;
  g.a1_trace = load_trace(kTraceA1);

  const Json* f = flow_of(res.summary, 4, 0);
  if (!f) return {false, "flow 4->0 missing from summary"};
  int offered = (*f)["offered"];
  int delivered = (*f)["delivered"];
  int dups = res.summary["duplicate_deliveries"];

  // Every delivered packet: the EDC tag stamped on each hop's strobes must
  // strictly decrease toward the sink. Tags are observed by the acceptors
  // (accept-verdict judge records carry sender_edc).
  std::map<std::pair<int, uint32_t>, std::vector<double>> tags;
  std::set<std::pair<int, uint32_t>> delivered_keys;
  for (const Json& r : g.a1_trace) {
    const std::string kind = r.value("kind", "");
    if (kind == "judge" && r["verdict"] == "accept" && r["metric"] == "up" &&
        r.contains("sender_edc")) {
      tags[{r["origin"].get<int>(), r["seq"].get<uint32_t>()}].push_back(
          r["sender_edc"].get<double>());
    } else if (kind == "deliver") {
      delivered_keys.insert({r["origin"].get<int>(), r["seq"].get<uint32_t>()});
    }
  }
  int monotonic_violations = 0;
  int checked = 0;
  for (const auto& key : delivered_keys) {
    auto it = tags.find(key);
    if (it == tags.end() || it->second.size() < 2) continue;
    ++checked;
    for (size_t i = 1; i < it->second.size(); ++i) {
      if (!(it->second[i] < it->second[i - 1])) {
        ++monotonic_violations;
        break;
      }
    }
  }

  bool pass = offered == 100 && delivered == 100 && dups == 0 &&
              monotonic_violations == 0 && checked == 100 && rt < 5.0;
  std::ostringstream d;
  d << "delivered " << delivered << "/" << offered << ", dups " << dups
    << ", EDC-tag chains checked " << checked << " (violations "
    << monotonic_violations << "), runtime " << rt << " s";
  return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// A2: forwarder-set metric against two independent oracles.

double edc_of_subset(const std::vector<NeighborEdc>& subset, double w) {
  double psum = 0.0, wsum = 0.0;
  for (const auto& n : subset) {
    psum += n.p_link;
    wsum += n.p_link * n.advertised_edc;
  }
  return w + (1.0 + wsum) / psum;
}

Outcome check_a2() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(2026, 0, RngPurpose::Phase);
  constexpr double kTol = 1e-9;
  int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    int n = 1 + static_cast<int>(rng.uniform_int(8));
    double w = rng.uniform();
    std::vector<NeighborEdc> table;
    for (int i = 0; i < n; ++i) {
      double p = rng.uniform() < 0.1 ? 0.0 : rng.uniform(0.05, 1.0);
      table.push_back({static_cast<NodeId>(i + 1), rng.uniform(0.0, 10.0), p});
    }

    EdcResult got = compute_edc(table, w);

    std::vector<NeighborEdc> usable;
    for (const auto& e : table) {
      if (e.p_link > 0.0) usable.push_back(e);
    }
    std::sort(usable.begin(), usable.end(), [](const auto& a, const auto& b) {
      return a.advertised_edc != b.advertised_edc
                 ? a.advertised_edc < b.advertised_edc
                 : a.id < b.id;
    });

    // Oracle 1: exhaustive over sorted prefixes.
    std::optional<double> prefix_min;
    for (size_t k = 1; k <= usable.size(); ++k) {
      std::vector<NeighborEdc> prefix(usable.begin(), usable.begin() + k);
      double v = edc_of_subset(prefix, w);
      if (!prefix_min || v < *prefix_min) prefix_min = v;
    }
    // Oracle 2: exhaustive over all non-empty subsets.
    std::optional<double> subset_min;
    for (uint32_t mask = 1; mask < (1u << usable.size()); ++mask) {
      std::vector<NeighborEdc> subset;
      for (size_t i = 0; i < usable.size(); ++i) {
        if (mask & (1u << i)) subset.push_back(usable[i]);
      }
      double v = edc_of_subset(subset, w);
      if (!subset_min || v < *subset_min) subset_min = v;
    }

    if (got.edc.has_value() != prefix_min.has_value()) {
      return {false, "trial " + std::to_string(trial) +
                         ": route presence disagrees with oracle"};
    }
    if (got.edc) {
      if (std::fabs(*got.edc - *prefix_min) > kTol ||
          std::fabs(*got.edc - *subset_min) > kTol) {
        std::ostringstream d;
        d << "trial " << trial << ": got " << *got.edc << " prefix-oracle "
          << *prefix_min << " subset-oracle " << *subset_min;
        return {false, d.str()};
      }
    }
  }
  double rt = elapsed_s(t0);
  std::ostringstream d;
  d << trials << " random tables match prefix and subset oracles (1e-9), "
    << "runtime " << rt << " s";
  return {rt < 5.0, d.str()};
}

// ---------------------------------------------------------------------------
// A3: energy ledgers re-derive the final level; hysteresis invariant.

void ensure_a4_run();  // defined with check_a4 below

Outcome check_a3() {
  ensure_a4_run();  // A3 audits the intermittent-grid ledger too
  int ledgers = 0, on_records = 0;
  for (const auto* trace : {&g.a1_trace, &g.a4_trace}) {
    if (trace->empty()) return {false, "prerequisite trace missing"};
    // e_on per node from the effective parameters in the header.
    std::map<int, double> e_on_mj;
    for (const Json& r : *trace) {
      const std::string kind = r.value("kind", "");
      if (kind == "header") {
        for (const auto& nc : r["params"]["nodes"]) {
          e_on_mj[nc["id"].get<int>()] = nc["e_on_mj"].get<double>();
        }
      } else if (kind == "ledger") {
        ++ledgers;
        int64_t consumed = 0;
        for (const auto& [act, fj] : r["consumed_fj"].items()) {
          (void)act;
          consumed += fj.get<int64_t>();
        }
        int64_t rederived = r["initial_fj"].get<int64_t>() +
                            r["harvest_fj"].get<int64_t>() - consumed -
                            r["overflow_fj"].get<int64_t>() +
                            r["deficit_fj"].get<int64_t>();
        // 1 fJ = 1e-12 mJ, so exact equality is far inside the 1e-9 mJ bound.
        if (rederived != r["final_fj"].get<int64_t>() ||
            r["conserved"] != true) {
          return {false, "node " + r["node"].dump() +
                             ": ledger does not re-derive the final level"};
        }
      } else if (kind == "lifecycle" && r["state"] == "on") {
        ++on_records;
        double level = r["level_mj"].get<double>();
        double e_on = e_on_mj.at(r["node"].get<int>());
        if (level < e_on - 1e-9) {
          std::ostringstream d;
          d << "node " << r["node"] << " turned ON at " << level
            << " mJ, below e_on " << e_on;
          return {false, d.str()};
        }
      }
    }
  }
  std::ostringstream d;
  d << ledgers << " ledgers re-derive exactly; " << on_records
    << " ON transitions all at or above e_on";
  return {ledgers > 0 && on_records > 0, d.str()};
}

// ---------------------------------------------------------------------------
// A4: intermittent 7x7 grid, two six-hop flows.

void ensure_a4_run() {
  if (!g.a4_trace.empty()) return;
  auto t0 = std::chrono::steady_clock::now();
  RunResult res = run_doc(grid49_doc(), kTraceA4);
  g.a4_runtime_s = elapsed_s(t0);
  g.a4_summary = res.summary;
  g.a4_trace = load_trace(kTraceA4);
}

Outcome check_a4() {
  ensure_a4_run();
  const Json& summary = g.a4_summary;
  double rt = g.a4_runtime_s;

  std::ostringstream d;
  bool pass = true;

  for (int src : {42, 48}) {
    const Json* f = flow_of(summary, src, 0);
    if (!f) return {false, "flow missing"};
    double ratio = (*f)["delivery_ratio"];
    int routes = (*f)["distinct_routes"];
    if ((*f)["offered"] != 500 || ratio < 0.9 || routes < 2) pass = false;
    d << "flow " << src << "->0: ratio " << ratio << " routes " << routes
      << "; ";
  }
  int dups = summary["duplicate_deliveries"];
  if (dups != 0) pass = false;

  // Relays (everything except the sink and the two mains-powered sources)
  // must be duty-cycled into the 2%..30% band.
  double duty_lo = 1.0, duty_hi = 0.0;
  int relay_offs = 0;
  for (const auto& n : summary["nodes"]) {
    int id = n["id"];
    if (id == 0 || id == 42 || id == 48) continue;
    double duty = n["duty_cycle"];
    duty_lo = std::min(duty_lo, duty);
    duty_hi = std::max(duty_hi, duty);
    relay_offs += n["off_transitions"].get<int>();
    if (duty < 0.02 || duty > 0.30) pass = false;
  }
  if (relay_offs < 10) pass = false;  // A5 needs a real sample of shutdowns
  if (rt >= 60.0) pass = false;

  d << "dups " << dups << ", relay duty [" << duty_lo << ", " << duty_hi
    << "], relay OFF transitions " << relay_offs << ", runtime " << rt << " s";
  return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// A5: shutdown sawtooth — OFF transitions follow communication bursts.

Outcome check_a5() {
  if (g.a4_trace.empty()) return {false, "prerequisite A4 trace missing"};
  TimeUs wake_interval = 1'000'000;
  std::map<int, std::vector<TimeUs>> comm;  // per-node radio burst times
  std::vector<std::pair<int, TimeUs>> offs;
  for (const Json& r : g.a4_trace) {
    const std::string kind = r.value("kind", "");
    if (kind == "header") {
      wake_interval = us_from_s(r["params"]["mac"]["wake_interval_s"].get<double>());
    } else if (kind == "mac_attempt" || kind == "advertise" ||
               kind == "judge" || kind == "deliver") {
      comm[r["node"].get<int>()].push_back(r["t"].get<TimeUs>());
    } else if (kind == "lifecycle" && r["state"] == "off") {
      int id = r["node"].get<int>();
      if (id != 0 && id != 42 && id != 48) offs.emplace_back(id, r["t"].get<TimeUs>());
    }
  }
  int preceded = 0;
  for (const auto& [id, t] : offs) {
    const auto& times = comm[id];  // already time-ordered
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it != times.begin() && t - *std::prev(it) <= wake_interval) ++preceded;
  }
  double frac = offs.empty() ? 0.0
                             : static_cast<double>(preceded) /
                                   static_cast<double>(offs.size());
  std::ostringstream d;
  d << preceded << "/" << offs.size()
    << " relay shutdowns preceded by communication within one wake interval ("
    << frac * 100.0 << "%)";
  return {!offs.empty() && frac >= 0.8, d.str()};
}

// ---------------------------------------------------------------------------
// A6: downward reachability via piggybacked routing sets.

Outcome check_a6() {
  RunResult with = run_doc(grid25_doc(0.5));
  RunResult without = run_doc(grid25_doc(0.0));

  int delivered_with = 0, offered_with = 0;
  for (const auto& f : with.summary["flows"]) {
    if (f["src"] != 0) continue;
    offered_with += f["offered"].get<int>();
    delivered_with += f["delivered"].get<int>();
  }

  // One-hop neighborhood of the sink, from the grid geometry.
  auto pos = [](int id) {
    return std::pair<double, double>{(id % 5) * 20.0, (id / 5) * 20.0};
  };
  std::set<int> one_hop;
  for (int id = 1; id < 25; ++id) {
    auto [x, y] = pos(id);
    if (std::hypot(x, y) <= 30.0) one_hop.insert(id);
  }
  int beyond_one_hop_delivered = 0;
  for (const auto& f : without.summary["flows"]) {
    if (f["src"] != 0) continue;
    if (!one_hop.count(f["dest"].get<int>())) {
      beyond_one_hop_delivered += f["delivered"].get<int>();
    }
  }

  bool pass = offered_with == 24 && delivered_with == 24 &&
              with.summary["duplicate_deliveries"] == 0 &&
              beyond_one_hop_delivered == 0;
  std::ostringstream d;
  d << "piggyback 0.5: " << delivered_with << "/" << offered_with
    << " downward destinations reached; piggyback 0: "
    << beyond_one_hop_delivered << " deliveries beyond one hop (expected 0)";
  return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// A7: routing-set TLV round-trip and corruption fuzzing.

Outcome check_a7() {
  Rng rng(77, 0, RngPurpose::Phase);

  for (int trial = 0; trial < 10'000; ++trial) {
    size_t count = rng.uniform_int(tlv::kMaxEntriesPerOption + 1);
    std::vector<NodeId> entries;
    for (size_t i = 0; i < count; ++i) {
      entries.push_back(static_cast<NodeId>(rng.uniform_int(65'536)));
    }
    uint16_t version = static_cast<uint16_t>(rng.uniform_int(65'536));
    std::vector<uint8_t> wire = tlv::encode_routing_set(entries, version);
    tlv::StripResult rt = tlv::strip_routing_set(wire);
    if (!rt.set || rt.malformed || !rt.remaining.empty() ||
        rt.set->version != version || rt.set->entries != entries) {
      return {false, "round-trip mismatch at trial " + std::to_string(trial)};
    }
  }

  // Fuzz: an intact foreign option followed by a corrupted routing set. The
  // decode must never throw, and the carrier's other content (the foreign
  // option) must survive so the packet itself remains deliverable. The
  // forwarding path on top of this is exercised by the unit tests, which
  // check that a malformed set is logged and the carrier still forwards.
  int carrier_preserved = 0;
  for (int trial = 0; trial < 10'000; ++trial) {
    std::vector<uint8_t> foreign{0x20, 0x03, 0xaa, 0xbb, 0xcc};
    std::vector<NodeId> entries;
    size_t count = 1 + rng.uniform_int(20);
    for (size_t i = 0; i < count; ++i) {
      entries.push_back(static_cast<NodeId>(rng.uniform_int(65'536)));
    }
    std::vector<uint8_t> wire = foreign;
    std::vector<uint8_t> rs = tlv::encode_routing_set(entries, 1);
    wire.insert(wire.end(), rs.begin(), rs.end());

    // Corrupt only bytes of the routing-set option.
    size_t flips = 1 + rng.uniform_int(4);
    for (size_t i = 0; i < flips; ++i) {
      size_t at = foreign.size() + rng.uniform_int(wire.size() - foreign.size());
      wire[at] ^= static_cast<uint8_t>(1 + rng.uniform_int(255));
    }
    if (rng.uniform() < 0.5 && wire.size() > foreign.size() + 1) {
      wire.resize(foreign.size() + 1 +
                  rng.uniform_int(wire.size() - foreign.size() - 1));
    }

    tlv::StripResult rt = tlv::strip_routing_set(wire);  // must not throw
    if (rt.remaining.size() >= foreign.size() &&
        std::equal(foreign.begin(), foreign.end(), rt.remaining.begin())) {
      ++carrier_preserved;
    }
  }

  // Pure-garbage buffers: still no crash.
  for (int trial = 0; trial < 2'000; ++trial) {
    std::vector<uint8_t> junk(rng.uniform_int(64));
    for (auto& b : junk) b = static_cast<uint8_t>(rng.uniform_int(256));
    (void)tlv::strip_routing_set(junk);
  }

  std::ostringstream d;
  d << "10000 round-trips exact; 10000 corrupted sets decoded without "
       "crashing, carrier content preserved in "
    << carrier_preserved << "/10000; 2000 garbage buffers survived";
  return {carrier_preserved == 10'000, d.str()};
}

// ---------------------------------------------------------------------------
// A8: determinism — byte-identical traces per seed, distinct across seeds.

Outcome check_a8() {
  run_doc(line5_doc(), kTraceA1Rerun);
  bool a1_same = file_bytes(kTraceA1) == file_bytes(kTraceA1Rerun);

  run_doc(grid49_doc(), kTraceA4Rerun);
  bool a4_same = file_bytes(kTraceA4) == file_bytes(kTraceA4Rerun);

  run_doc(grid49_doc(), kTraceA4Seed43, 43);
  bool seeds_differ = file_bytes(kTraceA4) != file_bytes(kTraceA4Seed43);

  std::ostringstream d;
  d << "same-seed reruns byte-identical (line: " << (a1_same ? "yes" : "NO")
    << ", grid: " << (a4_same ? "yes" : "NO")
    << "); seed 42 vs 43 traces differ: " << (seeds_differ ? "yes" : "NO");
  return {a1_same && a4_same && seeds_differ, d.str()};
}

// ---------------------------------------------------------------------------
// A9: wake-phase predictor halves the strobing cost.

double strobes_per_delivery(const Json& summary, const std::string& trace) {
  int64_t strobes = 0;
  for (const Json& r : load_trace(trace)) {
    if (r.value("kind", "") == "mac_attempt" && r["node"] == 1) {
      strobes += r["strobes"].get<int64_t>();
    }
  }
  const Json* f = flow_of(summary, 1, 0);
  int delivered = f ? (*f)["delivered"].get<int>() : 0;
  return delivered > 0 ? static_cast<double>(strobes) / delivered : 1e18;
}

Outcome check_a9() {
  RunResult with = run_doc(two_node_defer_doc(true), kTraceA9);
  RunResult base = run_doc(two_node_defer_doc(false), "acc_a9_nodefer.jsonl");

  std::vector<Json> trace = load_trace(kTraceA9);
  TimeUs listen_len = 20'000, wake_interval = 1'000'000;
  TimeUs phase = 300'000;  // node 0's overridden wake phase
  for (const Json& r : trace) {
    if (r.value("kind", "") == "header") {
      listen_len = us_from_s(r["params"]["mac"]["listen_len_s"].get<double>());
      wake_interval =
          us_from_s(r["params"]["mac"]["wake_interval_s"].get<double>());
    }
  }

  // Observations = acked forwards (each teaches the sender one wake sample).
  int observations = 0, predictions = 0, accurate = 0;
  for (const Json& r : trace) {
    const std::string kind = r.value("kind", "");
    if (kind == "mac_attempt" && r["node"] == 1 &&
        r["outcome"] == "forwarded") {
      ++observations;
    } else if (kind == "defer" && r["node"] == 1 && observations >= 10 &&
               r.contains("predicted_us")) {
      ++predictions;
      TimeUs predicted = r["predicted_us"].get<TimeUs>();
      TimeUs off = (predicted - phase) % wake_interval;
      if (off < 0) off += wake_interval;
      TimeUs dist = std::min<TimeUs>(off, wake_interval - off);
      if (dist <= listen_len) ++accurate;
    }
  }

  double with_mean = strobes_per_delivery(with.summary, kTraceA9);
  double base_mean =
      strobes_per_delivery(base.summary, "acc_a9_nodefer.jsonl");

  bool pass = predictions >= 5 && accurate == predictions &&
              with_mean <= 0.5 * base_mean;
  std::ostringstream d;
  d << accurate << "/" << predictions
    << " predictions within listen_len of the true window start; strobes per "
       "delivery "
    << with_mean << " deferred vs " << base_mean << " baseline";
  std::remove("acc_a9_nodefer.jsonl");
  return {pass, d.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "always-on line baseline", check_a1},
      {2, "forwarder-set metric vs exhaustive oracles", check_a2},
      {3, "energy ledger re-derivation and ON hysteresis", check_a3},
      {4, "intermittent grid delivery and route diversity", check_a4},
      {5, "communication-driven shutdown sawtooth", check_a5},
      {6, "downward reachability via piggybacked sets", check_a6},
      {7, "routing-set TLV round-trip and fuzzing", check_a7},
      {8, "seeded determinism", check_a8},
      {9, "wake-phase deferral", check_a9},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "A" << c.id << ": " << (o.pass ? "PASS" : "FAIL") << " — "
              << c.title << " — " << o.detail << "\n";
    std::cout.flush();
  }

  for (const char* f : {kTraceA1, kTraceA1Rerun, kTraceA4, kTraceA4Rerun,
                        kTraceA4Seed43, kTraceA9}) {
    std::remove(f);
  }

  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
