#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dcm/core.hpp"

namespace dcm {

// Analysis-side knobs. Defaults are the notional day thresholds and window
// widths; any threshold can be overridden from the config file.
struct RunConfig {
  // Matching windows. A control candidate must hold a qualifying message in
  // [t - start, t - end) days and no message at all within +-exclusion days.
  int candidate_window_start_days = 8;
  int candidate_window_end_days = 2;
  int exclusion_days = 1;
  int monitoring_hours = 24;

  // Activity recency thresholds (upper edge of each bucket, inclusive).
  int active_days = 7;
  int recent_days = 30;
  int former_days = 90;
  int new_days = 7;

  int bin_size = 1000;
  int quality_period_days = 14;
  int smoothing_window = 5;  // centered moving average, bins

  std::uint64_t seed = 1;

  // Event types scored by the metrics stage.
  std::vector<std::string> event_types{kVisitEvent, kAddToCartEvent, kPurchaseEvent};

  // Which event types drive the conversion/visit recency buckets.
  std::string conversion_event_type = kPurchaseEvent;
  std::string visit_event_type = kVisitEvent;

  // Optional (max_hours_since_message, weight) steps; empty = plain counting.
  std::vector<std::pair<double, double>> reward_weights;

  Timestamp candidate_window_start() const { return days_to_seconds(candidate_window_start_days); }
  Timestamp candidate_window_end() const { return days_to_seconds(candidate_window_end_days); }
  Timestamp exclusion_window() const { return days_to_seconds(exclusion_days); }
  Timestamp monitoring_window() const { return hours_to_seconds(monitoring_hours); }

  // Throws ConfigError on any violated invariant.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Reads the top-level keys of a JSON config file. A nested "sim" object is
// allowed (the simulator owns it); unknown top-level keys are rejected.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json_text(const std::string& text, const std::string& origin);

std::string run_config_to_json_text(const RunConfig& config);
RunConfig run_config_from_snapshot(const std::string& json_text);

}  // namespace dcm
