#pragma once

#include <cmath>
#include <cstdint>

namespace oppnet {

// Simulation time in integer microseconds. Integer time keeps event ordering
// exact and identical across platforms.
using TimeUs = int64_t;

constexpr TimeUs kUsPerSec = 1'000'000;

inline TimeUs us_from_s(double seconds) {
  return static_cast<TimeUs>(std::llround(seconds * static_cast<double>(kUsPerSec)));
}

inline double s_from_us(TimeUs t) {
  return static_cast<double>(t) / static_cast<double>(kUsPerSec);
}

}  // namespace oppnet
