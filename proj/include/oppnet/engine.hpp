#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

#include "oppnet/time.hpp"

namespace oppnet {

// Dispatch priorities. Channel events settle reception state before node
// timers read it at the same timestamp.
constexpr int kPrioChannel = 0;
constexpr int kPrioNode = 1;
constexpr int kPrioEnd = 9;

// Deterministic discrete-event engine. Total dispatch order is
// (fire_at, priority, seq); seq breaks all remaining ties.
class Engine {
 public:
  using Handle = uint64_t;
  using Callback = std::function<void()>;

  Handle schedule_at(TimeUs fire_at, int priority, Callback cb) {
    if (fire_at < now_) {
      throw std::logic_error("schedule in the past: protocol logic bug");
    }
    Handle h = next_seq_++;
    queue_.insert(Key{fire_at, priority, h});
    pending_.emplace(h, Pending{fire_at, priority, std::move(cb)});
    return h;
  }

  Handle schedule_in(TimeUs delay, int priority, Callback cb) {
    return schedule_at(now_ + delay, priority, std::move(cb));
  }

  // True if the event was pending and is now removed.
  bool cancel(Handle h) {
    auto it = pending_.find(h);
    if (it == pending_.end()) return false;
    queue_.erase(Key{it->second.fire_at, it->second.priority, h});
    pending_.erase(it);
    return true;
  }

  // Dispatches all events with fire_at <= t_end. The clock stops at the last
  // dispatched event; it never runs ahead of activity.
  int64_t run_until(TimeUs t_end) {
    int64_t dispatched = 0;
    while (!queue_.empty()) {
      Key top = *queue_.begin();
      if (top.fire_at > t_end) break;
      queue_.erase(queue_.begin());
      auto it = pending_.find(top.seq);
      Callback cb = std::move(it->second.cb);
      pending_.erase(it);
      now_ = top.fire_at;
      cb();
      ++dispatched;
    }
    total_dispatched_ += dispatched;
    return dispatched;
  }

  TimeUs now() const { return now_; }
  size_t pending_count() const { return queue_.size(); }
  int64_t total_dispatched() const { return total_dispatched_; }

 private:
  struct Key {
    TimeUs fire_at;
    int priority;
    Handle seq;
    bool operator<(const Key& o) const {
      if (fire_at != o.fire_at) return fire_at < o.fire_at;
      if (priority != o.priority) return priority < o.priority;
      return seq < o.seq;
    }
  };
  struct Pending {
    TimeUs fire_at;
    int priority;
    Callback cb;
  };

  std::set<Key> queue_;
  std::map<Handle, Pending> pending_;
  TimeUs now_ = 0;
  Handle next_seq_ = 1;
  int64_t total_dispatched_ = 0;
};

}  // namespace oppnet
