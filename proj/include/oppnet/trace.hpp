#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <utility>

#include <json.hpp>

#include "oppnet/time.hpp"

namespace oppnet {

using Json = nlohmann::json;

// JSON-lines trace sink. One object per record of interest:
//   {"t": <us>, "node": <id>, "kind": <string>, ...}
// Records are also fanned out to an optional observer (the metrics builder),
// so the run-time summary and the trace-recomputed summary see the same
// stream.
class TraceSink {
 public:
  void open(const std::string& path) {
    file_.open(path, std::ios::trunc);
    if (!file_) throw std::runtime_error("cannot open trace file: " + path);
  }

  void set_observer(std::function<void(const Json&)> obs) { observer_ = std::move(obs); }

  void emit(TimeUs t, Json rec) {
    rec["t"] = t;
    if (observer_) observer_(rec);
    if (file_.is_open()) {
      file_ << rec.dump() << '\n';
    }
    ++count_;
  }

  void flush() {
    if (file_.is_open()) file_.flush();
  }

  int64_t count() const { return count_; }

  // Optional kinds, off by default to keep traces at a sane size.
  bool trace_signals = false;
  bool trace_strobes = false;

 private:
  std::ofstream file_;
  std::function<void(const Json&)> observer_;
  int64_t count_ = 0;
};

}  // namespace oppnet
