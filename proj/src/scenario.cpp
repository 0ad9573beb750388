#include "oppnet/scenario.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "oppnet/rng.hpp"

namespace oppnet {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("scenario: " + msg);
}

// Strict-mode helper: every key consumed must be declared up front.
void check_keys(const Json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) { ok = true; break; }
    }
    if (!ok) fail(where + ": unknown key '" + it.key() + "'");
  }
}

double get_num(const Json& obj, const char* key, double dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number()) fail(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

int64_t get_int(const Json& obj, const char* key, int64_t dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number_integer()) fail(std::string(key) + " must be an integer");
  return obj[key].get<int64_t>();
}

bool get_bool(const Json& obj, const char* key, bool dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_boolean()) fail(std::string(key) + " must be a boolean");
  return obj[key].get<bool>();
}

TimeUs get_time_s(const Json& obj, const char* key, TimeUs dflt) {
  if (!obj.contains(key)) return dflt;
  return us_from_s(get_num(obj, key, 0.0));
}

void parse_power_mw(const Json& obj, EnergyConfig& e) {
  check_keys(obj, "energy.power_mw", {"sleep", "idle_listen", "rx", "tx", "cpu"});
  auto set = [&](const char* key, Activity a) {
    if (obj.contains(key)) {
      e.power_nw[static_cast<int>(a)] = nw_from_mw(get_num(obj, key, 0.0));
    }
  };
  set("sleep", Activity::Sleep);
  set("idle_listen", Activity::IdleListen);
  set("rx", Activity::Rx);
  set("tx", Activity::Tx);
  set("cpu", Activity::Cpu);
}

void parse_energy(const Json& obj, EnergyConfig& e, const std::string& where) {
  check_keys(obj, where,
             {"capacity_mj", "e_on_mj", "e_off_mj", "initial_mj", "harvest_mw",
              "power_mw"});
  if (obj.contains("capacity_mj")) e.capacity_fj = fj_from_mj(get_num(obj, "capacity_mj", 0));
  if (obj.contains("e_on_mj")) e.e_on_fj = fj_from_mj(get_num(obj, "e_on_mj", 0));
  if (obj.contains("e_off_mj")) e.e_off_fj = fj_from_mj(get_num(obj, "e_off_mj", 0));
  if (obj.contains("initial_mj")) e.initial_fj = fj_from_mj(get_num(obj, "initial_mj", 0));
  if (obj.contains("harvest_mw")) e.harvest_nw = nw_from_mw(get_num(obj, "harvest_mw", 0));
  if (obj.contains("power_mw")) parse_power_mw(obj["power_mw"], e);
}

void validate_energy(const EnergyConfig& e, const std::string& where) {
  if (!(e.e_off_fj < e.e_on_fj)) fail(where + ": hysteresis rule e_off_mj < e_on_mj violated");
  if (!(e.e_on_fj <= e.capacity_fj)) fail(where + ": e_on_mj must be <= capacity_mj");
  if (e.initial_fj < 0 || e.initial_fj > e.capacity_fj)
    fail(where + ": initial_mj must be within [0, capacity_mj]");
  auto p = [&](Activity a) { return e.power_nw[static_cast<int>(a)]; };
  if (!(p(Activity::Tx) >= p(Activity::Rx)))
    fail(where + ": power rule tx >= rx violated");
  if (!(p(Activity::Rx) >= p(Activity::IdleListen)))
    fail(where + ": power rule rx >= idle_listen violated");
  if (!(p(Activity::IdleListen) >= p(Activity::Sleep)))
    fail(where + ": power rule idle_listen >= sleep violated");
  if (p(Activity::Sleep) < 0) fail(where + ": negative power");
}

Topology parse_topology(const Json& obj, uint64_t seed) {
  check_keys(obj, "topology",
             {"generator", "nodes", "spacing_m", "cols", "area_m", "positions"});
  Topology topo;
  if (obj.contains("positions")) {
    if (obj.contains("generator")) fail("topology: give either positions or a generator");
    for (const auto& p : obj["positions"]) {
      if (!p.is_array() || p.size() != 2) fail("topology.positions entries must be [x, y]");
      topo.positions.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    if (topo.positions.empty()) fail("topology.positions is empty");
    return topo;
  }
  if (!obj.contains("generator")) fail("topology needs positions or a generator");
  std::string gen = obj["generator"].get<std::string>();
  int n = static_cast<int>(get_int(obj, "nodes", 0));
  if (n < 2) fail("topology.nodes must be >= 2");
  if (n > 0xfffe) fail("topology.nodes too large");
  double spacing = get_num(obj, "spacing_m", 20.0);
  if (gen == "line") {
    for (int i = 0; i < n; ++i) topo.positions.emplace_back(i * spacing, 0.0);
  } else if (gen == "grid") {
    int cols = static_cast<int>(get_int(obj, "cols", 0));
    if (cols <= 0) fail("topology.cols required for the grid generator");
    for (int i = 0; i < n; ++i) {
      topo.positions.emplace_back((i % cols) * spacing, (i / cols) * spacing);
    }
  } else if (gen == "random") {
    if (!obj.contains("area_m") || !obj["area_m"].is_array() ||
        obj["area_m"].size() != 2) {
      fail("topology.area_m = [width, height] required for the random generator");
    }
    double w = obj["area_m"][0].get<double>();
    double h = obj["area_m"][1].get<double>();
    Rng rng(seed, 0xfffe, RngPurpose::Phase);
    for (int i = 0; i < n; ++i) {
      topo.positions.emplace_back(rng.uniform() * w, rng.uniform() * h);
    }
  } else {
    fail("topology.generator must be line, grid or random");
  }
  return topo;
}

NodeId parse_node_id(const std::string& key, size_t n, const std::string& where) {
  size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(key, &pos);
  } catch (...) {
    fail(where + ": key '" + key + "' is not a node id");
  }
  if (pos != key.size() || v >= n) fail(where + ": node id '" + key + "' out of range");
  return static_cast<NodeId>(v);
}

TrafficSpec parse_traffic(const Json& obj, size_t n_nodes, NodeId sink) {
  TrafficSpec t;
  std::string type = obj.value("type", "");
  if (type == "periodic") {
    check_keys(obj, "traffic[periodic]",
               {"type", "src", "dest", "period_s", "jitter_s", "count",
                "start_s", "payload"});
    t.kind = TrafficSpec::Kind::Periodic;
    t.period = get_time_s(obj, "period_s", 0);
    if (t.period <= 0) fail("traffic.period_s must be > 0");
    t.jitter = get_time_s(obj, "jitter_s", 0);
    t.count = static_cast<int>(get_int(obj, "count", 0));
    t.dest = static_cast<NodeId>(get_int(obj, "dest", sink));
  } else if (type == "poisson") {
    check_keys(obj, "traffic[poisson]",
               {"type", "src", "dest", "rate_per_s", "start_s", "stop_s",
                "payload"});
    t.kind = TrafficSpec::Kind::Poisson;
    t.rate_per_s = get_num(obj, "rate_per_s", 0.0);
    if (t.rate_per_s <= 0) fail("traffic.rate_per_s must be > 0");
    t.stop = get_time_s(obj, "stop_s", 0);
    t.dest = static_cast<NodeId>(get_int(obj, "dest", sink));
  } else if (type == "sweep_downward") {
    check_keys(obj, "traffic[sweep_downward]",
               {"type", "src", "start_s", "gap_s", "payload"});
    t.kind = TrafficSpec::Kind::SweepDownward;
    t.gap = get_time_s(obj, "gap_s", us_from_s(1.0));
  } else {
    fail("traffic.type must be periodic, poisson or sweep_downward");
  }
  t.src = static_cast<NodeId>(get_int(obj, "src", 0));
  t.start = get_time_s(obj, "start_s", 0);
  t.payload = static_cast<uint32_t>(get_int(obj, "payload", 32));
  if (t.src >= n_nodes) fail("traffic.src out of range");
  if (t.kind != TrafficSpec::Kind::SweepDownward && t.dest >= n_nodes)
    fail("traffic.dest out of range");
  return t;
}

}  // namespace

Scenario parse_scenario(const Json& doc) {
  check_keys(doc, "scenario",
             {"name", "duration_s", "seed", "sink", "topology", "comm_range_m",
              "bitrate_bps", "p_loss", "mac", "routing", "energy",
              "energy_overrides", "wake_phase_overrides", "harvest_trace",
              "traffic", "trace"});

  Scenario s;
  s.name = doc.value("name", "unnamed");
  if (!doc.contains("duration_s")) fail("duration_s is required");
  s.duration = get_time_s(doc, "duration_s", 0);
  if (s.duration <= 0) fail("duration_s must be > 0");
  s.seed = static_cast<uint64_t>(get_int(doc, "seed", 1));

  if (!doc.contains("topology")) fail("topology is required");
  s.topology = parse_topology(doc["topology"], s.seed);
  size_t n = s.topology.size();

  s.sink = static_cast<NodeId>(get_int(doc, "sink", 0));
  if (s.sink >= n) fail("sink out of range");

  s.channel.comm_range_m = get_num(doc, "comm_range_m", s.channel.comm_range_m);
  if (s.channel.comm_range_m <= 0) fail("comm_range_m must be > 0");
  s.channel.bitrate_bps = get_int(doc, "bitrate_bps", s.channel.bitrate_bps);
  if (s.channel.bitrate_bps <= 0) fail("bitrate_bps must be > 0");
  s.channel.p_loss = get_num(doc, "p_loss", 0.0);
  if (s.channel.p_loss < 0 || s.channel.p_loss >= 1) fail("p_loss must be in [0, 1)");
  s.topology.comm_range_m = s.channel.comm_range_m;

  if (doc.contains("mac")) {
    const Json& m = doc["mac"];
    check_keys(m, "mac",
               {"wake_interval_s", "listen_len_s", "ack_window_s",
                "max_duration_s", "backoff_slots", "defer_enabled"});
    s.mac.wake_interval = get_time_s(m, "wake_interval_s", s.mac.wake_interval);
    s.mac.listen_len = get_time_s(m, "listen_len_s", s.mac.listen_len);
    s.mac.ack_window = get_time_s(m, "ack_window_s", s.mac.ack_window);
    s.mac.max_duration = get_time_s(m, "max_duration_s", s.mac.max_duration);
    s.mac.backoff_slots = static_cast<int>(get_int(m, "backoff_slots", s.mac.backoff_slots));
    s.mac.defer_enabled = get_bool(m, "defer_enabled", s.mac.defer_enabled);
  }
  if (s.mac.wake_interval <= 0) fail("mac.wake_interval_s must be > 0");
  if (s.mac.listen_len <= 0 || s.mac.listen_len >= s.mac.wake_interval)
    fail("mac.listen_len_s must be in (0, wake_interval_s)");
  if (s.mac.ack_window <= 0) fail("mac.ack_window_s must be > 0");
  if (s.mac.max_duration < s.mac.wake_interval)
    fail("mac.max_duration_s must be >= wake_interval_s");
  if (s.mac.backoff_slots < 1) fail("mac.backoff_slots must be >= 1");
  if (s.duration < s.mac.wake_interval + s.mac.listen_len)
    fail("duration_s must be >= wake_interval_s + listen_len_s");

  if (doc.contains("routing")) {
    const Json& r = doc["routing"];
    check_keys(r, "routing",
               {"w", "margin", "p_piggyback", "adv_interval_s", "set_ttl_s",
                "ttl_default", "max_set_size", "queue_cap", "max_retries",
                "retry_backoff_s", "persist_routing_state"});
    s.routing.w = get_num(r, "w", s.routing.w);
    s.routing.margin = get_num(r, "margin", s.routing.margin);
    s.routing.p_piggyback = get_num(r, "p_piggyback", s.routing.p_piggyback);
    s.routing.adv_interval = get_time_s(r, "adv_interval_s", s.routing.adv_interval);
    s.routing.set_ttl = get_time_s(r, "set_ttl_s", s.routing.set_ttl);
    s.routing.ttl_default = static_cast<int>(get_int(r, "ttl_default", s.routing.ttl_default));
    s.routing.max_set_size = static_cast<size_t>(get_int(r, "max_set_size", s.routing.max_set_size));
    s.routing.queue_cap = static_cast<size_t>(get_int(r, "queue_cap", s.routing.queue_cap));
    s.routing.max_retries = static_cast<int>(get_int(r, "max_retries", s.routing.max_retries));
    s.routing.retry_backoff = get_time_s(r, "retry_backoff_s", s.routing.retry_backoff);
    s.routing.persist_routing_state =
        get_bool(r, "persist_routing_state", s.routing.persist_routing_state);
  }
  if (s.routing.w < 0) fail("routing.w must be >= 0");
  if (s.routing.margin < 0) fail("routing.margin must be >= 0");
  if (s.routing.p_piggyback < 0 || s.routing.p_piggyback > 1)
    fail("routing.p_piggyback must be in [0, 1]");
  if (s.routing.adv_interval <= 0) fail("routing.adv_interval_s must be > 0");
  if (s.routing.set_ttl <= 0) fail("routing.set_ttl_s must be > 0");
  if (s.routing.ttl_default < 1) fail("routing.ttl_default must be >= 1");
  if (s.routing.max_set_size < 1) fail("routing.max_set_size must be >= 1");
  if (s.routing.queue_cap < 1) fail("routing.queue_cap must be >= 1");
  if (s.routing.max_retries < 0) fail("routing.max_retries must be >= 0");
  if (s.routing.retry_backoff <= 0) fail("routing.retry_backoff_s must be > 0");

  EnergyConfig base;
  if (doc.contains("energy")) parse_energy(doc["energy"], base, "energy");
  validate_energy(base, "energy");

  s.nodes.resize(n);
  for (size_t i = 0; i < n; ++i) {
    NodeConfig& nc = s.nodes[i];
    nc.id = static_cast<NodeId>(i);
    nc.is_sink = (nc.id == s.sink);
    nc.sink = s.sink;
    nc.energy = base;
  }

  if (doc.contains("energy_overrides")) {
    const Json& ov = doc["energy_overrides"];
    if (!ov.is_object()) fail("energy_overrides must be an object");
    for (auto it = ov.begin(); it != ov.end(); ++it) {
      NodeId id = parse_node_id(it.key(), n, "energy_overrides");
      std::string where = "energy_overrides." + it.key();
      parse_energy(it.value(), s.nodes[id].energy, where);
      validate_energy(s.nodes[id].energy, where);
    }
  }
  if (doc.contains("wake_phase_overrides")) {
    const Json& ov = doc["wake_phase_overrides"];
    if (!ov.is_object()) fail("wake_phase_overrides must be an object");
    for (auto it = ov.begin(); it != ov.end(); ++it) {
      NodeId id = parse_node_id(it.key(), n, "wake_phase_overrides");
      TimeUs phase = us_from_s(it.value().get<double>());
      if (phase < 0 || phase >= s.mac.wake_interval)
        fail("wake_phase_overrides." + it.key() + " must be in [0, wake_interval_s)");
      s.nodes[id].wake_phase = phase;
    }
  }
  if (doc.contains("harvest_trace")) {
    const Json& ht = doc["harvest_trace"];
    if (!ht.is_object()) fail("harvest_trace must be an object");
    for (auto it = ht.begin(); it != ht.end(); ++it) {
      NodeId id = parse_node_id(it.key(), n, "harvest_trace");
      TimeUs prev = -1;
      for (const auto& step : it.value()) {
        if (!step.is_array() || step.size() != 2)
          fail("harvest_trace." + it.key() + " entries must be [t_s, mw]");
        TimeUs at = us_from_s(step[0].get<double>());
        if (at <= prev) fail("harvest_trace." + it.key() + " must be strictly increasing");
        prev = at;
        s.nodes[id].harvest_steps.emplace_back(at, nw_from_mw(step[1].get<double>()));
      }
    }
  }

  if (doc.contains("traffic")) {
    if (!doc["traffic"].is_array()) fail("traffic must be an array");
    for (const auto& t : doc["traffic"]) {
      s.traffic.push_back(parse_traffic(t, n, s.sink));
    }
  }

  if (doc.contains("trace")) {
    const Json& tr = doc["trace"];
    check_keys(tr, "trace", {"signals", "strobes"});
    s.trace_signals = get_bool(tr, "signals", false);
    s.trace_strobes = get_bool(tr, "strobes", false);
  }

  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open file: " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const std::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

Json Scenario::effective() const {
  Json j;
  j["name"] = name;
  j["duration_s"] = s_from_us(duration);
  j["seed"] = seed;
  j["sink"] = sink;
  j["comm_range_m"] = channel.comm_range_m;
  j["bitrate_bps"] = channel.bitrate_bps;
  j["p_loss"] = channel.p_loss;
  j["mac"] = {{"wake_interval_s", s_from_us(mac.wake_interval)},
              {"listen_len_s", s_from_us(mac.listen_len)},
              {"ack_window_s", s_from_us(mac.ack_window)},
              {"max_duration_s", s_from_us(mac.max_duration)},
              {"backoff_slots", mac.backoff_slots},
              {"defer_enabled", mac.defer_enabled}};
  j["routing"] = {{"w", routing.w},
                  {"margin", routing.margin},
                  {"p_piggyback", routing.p_piggyback},
                  {"adv_interval_s", s_from_us(routing.adv_interval)},
                  {"set_ttl_s", s_from_us(routing.set_ttl)},
                  {"ttl_default", routing.ttl_default},
                  {"max_set_size", routing.max_set_size},
                  {"queue_cap", routing.queue_cap},
                  {"max_retries", routing.max_retries},
                  {"retry_backoff_s", s_from_us(routing.retry_backoff)},
                  {"persist_routing_state", routing.persist_routing_state}};
  Json pos = Json::array();
  for (auto& [x, y] : topology.positions) pos.push_back({x, y});
  j["positions"] = std::move(pos);
  Json nodes = Json::array();
  for (const NodeConfig& nc : this->nodes) {
    Json e;
    e["id"] = nc.id;
    e["capacity_mj"] = mj_from_fj(nc.energy.capacity_fj);
    e["e_on_mj"] = mj_from_fj(nc.energy.e_on_fj);
    e["e_off_mj"] = mj_from_fj(nc.energy.e_off_fj);
    e["initial_mj"] = mj_from_fj(nc.energy.initial_fj);
    e["harvest_mw"] = static_cast<double>(nc.energy.harvest_nw) / 1e6;
    if (nc.wake_phase) e["wake_phase_s"] = s_from_us(*nc.wake_phase);
    nodes.push_back(std::move(e));
  }
  j["nodes"] = std::move(nodes);
  j["n_traffic_flows"] = traffic.size();
  return j;
}

}  // namespace oppnet
