#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

#include "oppnet/time.hpp"

namespace oppnet {

// Radio/CPU activity being charged for. Off is the powered-down device state
// (nothing consumed, harvesting continues).
enum class Activity : int { Sleep = 0, IdleListen = 1, Rx = 2, Tx = 3, Cpu = 4, Off = 5 };

constexpr int kNumActivities = 6;

inline const char* activity_name(Activity a) {
  switch (a) {
    case Activity::Sleep: return "sleep";
    case Activity::IdleListen: return "idle_listen";
    case Activity::Rx: return "rx";
    case Activity::Tx: return "tx";
    case Activity::Cpu: return "cpu";
    case Activity::Off: return "off";
  }
  return "?";
}

// Fixed-point unit conventions:
//   energy  : femtojoules (int64)
//   power   : nanowatts  (int64)
//   time    : microseconds
// 1 nW * 1 us = 1 fJ exactly, so all accrual arithmetic is integer-exact and
// the conservation ledger balances to the femtojoule.
constexpr int64_t kFjPerMj = 1'000'000'000'000ll;  // 1 mJ = 1e12 fJ
constexpr int64_t kNwPerMw = 1'000'000ll;          // 1 mW = 1e6 nW

inline int64_t fj_from_mj(double mj) { return static_cast<int64_t>(std::llround(mj * 1e12)); }
inline double mj_from_fj(int64_t fj) { return static_cast<double>(fj) * 1e-12; }
inline int64_t nw_from_mw(double mw) { return static_cast<int64_t>(std::llround(mw * 1e6)); }

struct EnergyConfig {
  int64_t capacity_fj = fj_from_mj(10.0);
  int64_t e_on_fj = fj_from_mj(8.0);
  int64_t e_off_fj = fj_from_mj(2.0);
  int64_t initial_fj = fj_from_mj(10.0);
  int64_t harvest_nw = nw_from_mw(1.0);
  // Indexed by Activity; Off draws nothing.
  std::array<int64_t, kNumActivities> power_nw = {
      nw_from_mw(0.005), nw_from_mw(2.0), nw_from_mw(6.0),
      nw_from_mw(12.0),  nw_from_mw(1.0), 0};
};

// Harvested-energy state with hysteresis thresholds plus a double-entry
// activity ledger. Clamping losses are booked explicitly so the final level
// is always reconstructible from the ledger.
class EnergyStore {
 public:
  EnergyStore() = default;
  explicit EnergyStore(const EnergyConfig& cfg)
      : cfg_(cfg), level_(cfg.initial_fj) {}

  void accrue(Activity activity, TimeUs duration_us) {
    if (duration_us <= 0) return;
    int64_t pw = cfg_.power_nw[static_cast<int>(activity)];
    int64_t consumed = pw * duration_us;
    int64_t harvested = cfg_.harvest_nw * duration_us;
    consumed_fj_[static_cast<int>(activity)] += consumed;
    harvest_gross_fj_ += harvested;
    int64_t next = level_ + harvested - consumed;
    if (next > cfg_.capacity_fj) {
      overflow_lost_fj_ += next - cfg_.capacity_fj;
      next = cfg_.capacity_fj;
    }
    if (next < 0) {
      deficit_unmet_fj_ += -next;
      next = 0;
    }
    level_ = next;
  }

  // Harvest rate may change mid-run (piecewise-constant harvest trace).
  // Caller accrues up to the change point first.
  void set_harvest_nw(int64_t nw) { cfg_.harvest_nw = nw; }

  int64_t level_fj() const { return level_; }
  double level_mj() const { return mj_from_fj(level_); }
  const EnergyConfig& config() const { return cfg_; }

  int64_t net_power_nw(Activity a) const {
    return cfg_.harvest_nw - cfg_.power_nw[static_cast<int>(a)];
  }

  // Exact time until level >= target under constant net power, or nullopt
  // when the level can never get there. Already past -> 0.
  std::optional<TimeUs> time_until_at_least(int64_t target_fj, Activity a) const {
    if (level_ >= target_fj) return TimeUs{0};
    int64_t net = net_power_nw(a);
    if (net <= 0) return std::nullopt;
    int64_t delta = target_fj - level_;
    return (delta + net - 1) / net;  // ceil
  }

  // Exact time until level < target (strict) under constant net power.
  std::optional<TimeUs> time_until_below(int64_t target_fj, Activity a) const {
    if (level_ < target_fj) return TimeUs{0};
    int64_t net = net_power_nw(a);
    if (net >= 0) return std::nullopt;
    int64_t drain = -net;
    return (level_ - target_fj) / drain + 1;
  }

  // Ledger accessors.
  int64_t consumed_fj(Activity a) const { return consumed_fj_[static_cast<int>(a)]; }
  int64_t harvest_gross_fj() const { return harvest_gross_fj_; }
  int64_t overflow_lost_fj() const { return overflow_lost_fj_; }
  int64_t deficit_unmet_fj() const { return deficit_unmet_fj_; }

  // Double-entry check: reconstruct the final level from the ledger. Integer
  // arithmetic makes this exact, not merely within tolerance.
  bool conservation_holds() const {
    int64_t consumed = 0;
    for (int64_t c : consumed_fj_) consumed += c;
    return cfg_.initial_fj + harvest_gross_fj_ - consumed - overflow_lost_fj_ +
               deficit_unmet_fj_ ==
           level_;
  }

 private:
  EnergyConfig cfg_;
  int64_t level_ = 0;
  std::array<int64_t, kNumActivities> consumed_fj_ = {};
  int64_t harvest_gross_fj_ = 0;
  int64_t overflow_lost_fj_ = 0;
  int64_t deficit_unmet_fj_ = 0;
};

}  // namespace oppnet
