#include "oppnet/sim.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

#include "oppnet/engine.hpp"
#include "oppnet/metrics.hpp"
#include "oppnet/node.hpp"
#include "oppnet/rng.hpp"

namespace oppnet {

RunResult run_scenario(const Scenario& scenario_in, const RunOptions& opts) {
  Scenario scenario = scenario_in;
  if (opts.seed_override) scenario.seed = *opts.seed_override;

  Engine engine;
  TraceSink trace;
  trace.trace_signals = scenario.trace_signals;
  trace.trace_strobes = scenario.trace_strobes;
  if (!opts.trace_path.empty()) trace.open(opts.trace_path);

  MetricsBuilder metrics;
  trace.set_observer([&metrics](const Json& rec) { metrics.consume(rec); });

  Channel channel(&engine, &trace, scenario.topology, scenario.channel,
                  scenario.seed);

  std::vector<std::unique_ptr<Node>> nodes;
  nodes.reserve(scenario.nodes.size());
  for (const NodeConfig& nc : scenario.nodes) {
    nodes.push_back(std::make_unique<Node>(nc, &engine, &channel, &trace,
                                           &scenario.mac, &scenario.routing,
                                           scenario.seed));
  }

  Json header;
  header["kind"] = "header";
  header["duration_s"] = s_from_us(scenario.duration);
  header["seed"] = scenario.seed;
  header["params"] = scenario.effective();
  trace.emit(0, std::move(header));

  for (auto& n : nodes) n->boot(0);

  // Traffic. Arrival times are drawn up front from per-flow streams so the
  // offered load is a pure function of (scenario, seed), independent of how
  // the protocol reacts.
  for (size_t fi = 0; fi < scenario.traffic.size(); ++fi) {
    const TrafficSpec& t = scenario.traffic[fi];
    Node* src = nodes[t.src].get();
    Rng rng(scenario.seed + 1000003ull * (fi + 1), t.src, RngPurpose::Traffic);
    auto emit_at = [&](TimeUs at, NodeId dest, uint32_t payload) {
      if (at > scenario.duration) return false;
      engine.schedule_at(at, kPrioNode, [src, dest, payload, &engine] {
        src->routing().originate(dest, payload, engine.now());
      });
      return true;
    };
    switch (t.kind) {
      case TrafficSpec::Kind::Periodic: {
        int k = 0;
        while (t.count == 0 || k < t.count) {
          TimeUs at = t.start + static_cast<TimeUs>(k) * t.period;
          if (t.jitter > 0) {
            at += static_cast<TimeUs>(rng.uniform() * static_cast<double>(t.jitter));
          }
          if (!emit_at(at, t.dest, t.payload)) break;
          ++k;
        }
        break;
      }
      case TrafficSpec::Kind::Poisson: {
        TimeUs stop = t.stop > 0 ? t.stop : scenario.duration;
        TimeUs at = t.start;
        for (;;) {
          at += us_from_s(rng.exponential(1.0 / t.rate_per_s));
          if (at > stop) break;
          if (!emit_at(at, t.dest, t.payload)) break;
        }
        break;
      }
      case TrafficSpec::Kind::SweepDownward: {
        TimeUs at = t.start;
        for (NodeId dest = 0; dest < nodes.size(); ++dest) {
          if (dest == t.src) continue;
          emit_at(at, dest, t.payload);
          at += t.gap;
        }
        break;
      }
    }
  }

  // Final event: close the books at exactly t = duration.
  bool dump_neighbors = opts.dump_neighbors;
  TimeUs duration = scenario.duration;
  engine.schedule_at(duration, kPrioEnd, [&nodes, &trace, &engine, duration,
                                          dump_neighbors] {
    for (auto& n : nodes) n->finalize(duration, dump_neighbors);
    Json footer;
    footer["kind"] = "footer";
    footer["events"] = engine.total_dispatched();
    footer["records_before_footer"] = trace.count();
    trace.emit(duration, std::move(footer));
  });

  engine.run_until(scenario.duration);
  trace.flush();

  for (auto& n : nodes) {
    if (!n->energy().conservation_holds()) {
      throw std::logic_error("energy ledger does not balance for node " +
                             std::to_string(n->node_id()));
    }
  }

  RunResult res;
  res.summary = metrics.summary();
  res.trace_records = trace.count();
  res.events_dispatched = engine.total_dispatched();
  return res;
}

}  // namespace oppnet
