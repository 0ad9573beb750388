#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "oppnet/metrics.hpp"
#include "oppnet/scenario.hpp"
#include "oppnet/sim.hpp"

namespace fs = std::filesystem;
using namespace oppnet;

namespace {

int log_level() {
  const char* v = std::getenv("OPPNET_LOG");
  return v ? std::atoi(v) : 0;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << '\n';
}

int do_run(const std::string& scenario_path, std::optional<uint64_t> seed,
           const std::string& seeds_range, const std::string& out_dir,
           bool dump_neighbors) {
  Scenario scenario = load_scenario(scenario_path);

  std::vector<uint64_t> seeds;
  if (!seeds_range.empty()) {
    auto dots = seeds_range.find("..");
    if (dots == std::string::npos) {
      std::cerr << "--seeds expects the form A..B\n";
      return 2;
    }
    uint64_t a = std::stoull(seeds_range.substr(0, dots));
    uint64_t b = std::stoull(seeds_range.substr(dots + 2));
    if (b < a) std::swap(a, b);
    for (uint64_t s = a; s <= b; ++s) seeds.push_back(s);
  } else {
    seeds.push_back(seed.value_or(scenario.seed));
  }

  bool fan_out = seeds.size() > 1;
  std::vector<int> rc(seeds.size(), 0);

  auto one = [&](size_t i) {
    uint64_t s = seeds[i];
    fs::path dir = out_dir;
    if (fan_out) dir /= "seed_" + std::to_string(s);
    fs::create_directories(dir);
    RunOptions opts;
    opts.seed_override = s;
    opts.trace_path = (dir / "trace.jsonl").string();
    opts.dump_neighbors = dump_neighbors;
    try {
      RunResult res = run_scenario(scenario, opts);
      write_json(dir / "summary.json", res.summary);
      if (log_level() > 0) {
        std::cerr << "seed " << s << ": " << res.events_dispatched
                  << " events, " << res.trace_records << " trace records\n";
      }
    } catch (const std::exception& e) {
      std::cerr << "run failed (seed " << s << "): " << e.what() << '\n';
      rc[i] = 1;
    }
  };

  if (fan_out) {
    size_t workers = std::min<size_t>(
        seeds.size(), std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < seeds.size(); i = next++) one(i);
      });
    }
    for (auto& t : pool) t.join();
  } else {
    one(0);
  }

  for (int c : rc) {
    if (c != 0) return 1;
  }
  std::cout << "ok: " << seeds.size() << " run(s) under " << out_dir << '\n';
  return 0;
}

int do_summarize(const std::string& trace_path, std::string out_dir) {
  std::ifstream in(trace_path);
  if (!in) {
    std::cerr << "cannot open trace: " << trace_path << '\n';
    return 2;
  }
  if (out_dir.empty()) {
    out_dir = fs::path(trace_path).parent_path().string();
    if (out_dir.empty()) out_dir = ".";
  }
  fs::create_directories(out_dir);

  MetricsBuilder metrics;
  std::string line;
  int64_t lines = 0;
  bool truncated = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      metrics.consume(Json::parse(line));
      ++lines;
    } catch (const std::exception&) {
      truncated = true;
      break;
    }
  }
  if (truncated || !metrics.saw_ledgers()) {
    std::cerr << "warning: trace appears truncated after " << lines
              << " records; summary is partial\n";
  }
  Json summary = metrics.summary();
  write_json(fs::path(out_dir) / "summary.json", summary);
  metrics.write_energy_csvs(out_dir);
  metrics.write_route_csvs(out_dir);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int do_validate(const std::string& scenario_path) {
  try {
    Scenario s = load_scenario(scenario_path);
    std::cout << "valid scenario '" << s.name << "' ("
              << s.topology.size() << " nodes, "
              << s_from_us(s.duration) << " s)\n";
    if (log_level() > 0) std::cout << s.effective().dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oppnet: opportunistic-routing sensor network simulator"};
  app.require_subcommand(1);

  std::string scenario_path, trace_path, out_dir = "out", seeds_range;
  std::optional<uint64_t> seed;
  bool dump_neighbors = false;

  CLI::App* run = app.add_subcommand("run", "execute a scenario");
  run->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--seeds", seeds_range, "seed range A..B, one isolated run each");
  run->add_option("--out", out_dir, "output directory (default: out)");
  run->add_flag("--dump-neighbors", dump_neighbors,
                "append per-node neighbor table dumps to the trace");

  CLI::App* summarize = app.add_subcommand("summarize", "recompute metrics from a trace");
  summarize->add_option("--trace", trace_path, "JSONL trace file")->required();
  std::string sum_out;
  summarize->add_option("--out", sum_out, "output directory (default: beside the trace)");

  CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("--scenario", scenario_path, "scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return do_run(scenario_path, seed, seeds_range, out_dir, dump_neighbors);
    }
    if (summarize->parsed()) return do_summarize(trace_path, sum_out);
    if (validate->parsed()) return do_validate(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
