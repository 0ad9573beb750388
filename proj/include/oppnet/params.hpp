#pragma once

#include <cstdint>

#include "oppnet/time.hpp"

namespace oppnet {

struct MacParams {
  TimeUs wake_interval = 1'000'000;
  TimeUs listen_len = 20'000;
  TimeUs ack_window = 2'000;
  TimeUs max_duration = 1'500'000;
  int backoff_slots = 8;
  bool defer_enabled = true;
};

struct RoutingParams {
  double w = 0.1;
  double margin = 0.5;
  double p_piggyback = 0.5;
  TimeUs adv_interval = 30'000'000;
  TimeUs set_ttl = 300'000'000;
  int ttl_default = 16;
  size_t max_set_size = 64;
  size_t queue_cap = 16;
  int max_retries = 10;
  TimeUs retry_backoff = 1'000'000;
  bool persist_routing_state = true;
};

struct ChannelParams {
  double comm_range_m = 30.0;
  int64_t bitrate_bps = 250'000;
  double p_loss = 0.0;
};

}  // namespace oppnet
