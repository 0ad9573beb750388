#include "oppnet/metrics.hpp"

#include <algorithm>
#include <fstream>

#include "oppnet/energy.hpp"

namespace oppnet {

namespace {

double quantile(std::vector<TimeUs> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double idx = q * static_cast<double>(v.size() - 1);
  size_t lo = static_cast<size_t>(idx);
  size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = idx - static_cast<double>(lo);
  double us = static_cast<double>(v[lo]) * (1.0 - frac) +
              static_cast<double>(v[hi]) * frac;
  return us / 1e6;
}

std::string route_string(const Json& hops) {
  std::string out;
  for (const auto& h : hops) {
    if (!out.empty()) out += '>';
    out += std::to_string(h.get<int>());
  }
  return out;
}

}  // namespace

void MetricsBuilder::consume(const Json& rec) {
  ++records_;
  const std::string kind = rec.value("kind", "");

  if (kind == "header") {
    duration_s_ = rec.value("duration_s", 0.0);
    return;
  }
  if (kind == "originate") {
    NodeId origin = rec["node"].get<NodeId>();
    NodeId dest = rec["dest"].get<NodeId>();
    flows_[{origin, dest}].offered++;
    return;
  }
  if (kind == "deliver") {
    NodeId origin = rec["origin"].get<NodeId>();
    NodeId dest = rec["node"].get<NodeId>();
    uint32_t seq = rec["seq"].get<uint32_t>();
    if (!delivered_keys_.insert({origin, seq}).second) {
      ++duplicate_deliveries_;
      return;
    }
    FlowStats& f = flows_[{origin, dest}];
    f.delivered++;
    f.latencies.push_back(rec["latency_us"].get<TimeUs>());
    int hops = static_cast<int>(rec["hops"].size()) - 1;
    f.hop_hist[hops]++;
    std::string route = route_string(rec["hops"]);
    f.routes.insert(route);
    f.route_rows.emplace_back(seq, std::move(route));
    return;
  }
  if (kind == "ledger") {
    NodeId id = rec["node"].get<NodeId>();
    node_stats_[id].ledger = rec;
    return;
  }
  if (rec.contains("level_mj") && rec.contains("node")) {
    NodeId id = rec["node"].get<NodeId>();
    energy_series_[id].emplace_back(rec["t"].get<TimeUs>(),
                                    rec["level_mj"].get<double>());
  }
}

Json MetricsBuilder::summary() const {
  Json j;
  j["duration_s"] = duration_s_;
  j["records"] = records_;
  j["duplicate_deliveries"] = duplicate_deliveries_;

  Json flows = Json::array();
  for (const auto& [key, f] : flows_) {
    Json e;
    e["src"] = key.first;
    e["dest"] = key.second;
    e["offered"] = f.offered;
    e["delivered"] = f.delivered;
    e["delivery_ratio"] =
        f.offered > 0 ? static_cast<double>(f.delivered) / f.offered : 0.0;
    e["latency_p50_s"] = quantile(f.latencies, 0.50);
    e["latency_p95_s"] = quantile(f.latencies, 0.95);
    Json hist;
    for (const auto& [hops, count] : f.hop_hist) {
      hist[std::to_string(hops)] = count;
    }
    e["hop_histogram"] = std::move(hist);
    e["distinct_routes"] = f.routes.size();
    flows.push_back(std::move(e));
  }
  j["flows"] = std::move(flows);

  Json nodes = Json::array();
  TimeUs duration_us = us_from_s(duration_s_);
  for (const auto& [id, ns] : node_stats_) {
    const Json& l = ns.ledger;
    Json e;
    e["id"] = id;
    e["final_mj"] = mj_from_fj(l["final_fj"].get<int64_t>());
    e["conserved"] = l["conserved"];
    e["off_transitions"] = l["off_transitions"];
    if (duration_us > 0) {
      e["on_fraction"] = static_cast<double>(l["on_us"].get<TimeUs>()) /
                         static_cast<double>(duration_us);
      e["duty_cycle"] =
          static_cast<double>(l["radio_active_us"].get<TimeUs>()) /
          static_cast<double>(duration_us);
    }
    Json consumed;
    for (auto it = l["consumed_fj"].begin(); it != l["consumed_fj"].end(); ++it) {
      consumed[it.key()] = mj_from_fj(it.value().get<int64_t>());
    }
    e["consumed_mj"] = std::move(consumed);
    e["time_us"] = l["time_us"];
    nodes.push_back(std::move(e));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

void MetricsBuilder::write_energy_csvs(const std::string& dir) const {
  for (const auto& [id, series] : energy_series_) {
    std::ofstream out(dir + "/energy_" + std::to_string(id) + ".csv",
                      std::ios::trunc);
    out << "time_s,energy_mj\n";
    for (const auto& [t, mj] : series) {
      out << s_from_us(t) << ',' << mj << '\n';
    }
  }
}

void MetricsBuilder::write_route_csvs(const std::string& dir) const {
  for (const auto& [key, f] : flows_) {
    if (f.route_rows.empty()) continue;
    std::ofstream out(dir + "/routes_" + std::to_string(key.first) + "_" +
                          std::to_string(key.second) + ".csv",
                      std::ios::trunc);
    out << "seq,route\n";
    for (const auto& [seq, route] : f.route_rows) {
      out << seq << ',' << route << '\n';
    }
  }
}

}  // namespace oppnet
