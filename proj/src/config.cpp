#include "dcm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dcm/errors.hpp"

namespace dcm {

using nlohmann::json;

void RunConfig::validate() const {
  if (!(candidate_window_start_days > candidate_window_end_days))
    throw ConfigError("candidate_window_start_days must exceed candidate_window_end_days");
  if (!(candidate_window_end_days >= exclusion_days))
    throw ConfigError("candidate_window_end_days must be >= exclusion_days");
  if (exclusion_days < 0) throw ConfigError("exclusion_days must be >= 0");
  if (monitoring_hours <= 0) throw ConfigError("monitoring_hours must be positive");
  if (!(active_days < recent_days && recent_days < former_days))
    throw ConfigError("activity thresholds must be strictly increasing (active < recent < former)");
  if (active_days <= 0) throw ConfigError("active_days must be positive");
  if (new_days < 0) throw ConfigError("new_days must be >= 0");
  if (bin_size < 1) throw ConfigError("bin_size must be >= 1");
  if (quality_period_days < 1) throw ConfigError("quality_period_days must be >= 1");
  if (smoothing_window < 1) throw ConfigError("smoothing_window must be >= 1");
  if (event_types.empty()) throw ConfigError("event_types must name at least one event type");
  if (conversion_event_type.empty() || visit_event_type.empty())
    throw ConfigError("conversion/visit event types must be non-empty");
  double prev_hours = 0.0;
  for (const auto& [hours, weight] : reward_weights) {
    if (hours <= prev_hours)
      throw ConfigError("reward_weights hours must be strictly increasing");
    if (weight < 0.0 || weight > 1.0)
      throw ConfigError("reward_weights weights must lie in [0, 1]");
    prev_hours = hours;
  }
}

namespace {

const std::set<std::string> kKnownKeys = {
    "candidate_window_start_days", "candidate_window_end_days", "exclusion_days",
    "monitoring_hours", "active_days", "recent_days", "former_days", "new_days",
    "bin_size", "quality_period_days", "smoothing_window", "seed", "event_types",
    "conversion_event_type", "visit_event_type", "reward_weights", "sim"};

RunConfig parse_run_config(const json& j, const std::string& origin) {
  if (!j.is_object()) throw ConfigError(origin + ": config root must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kKnownKeys.count(key)) throw ConfigError(origin + ": unknown config key '" + key + "'");
  }
  RunConfig cfg;
  try {
    auto read_int = [&](const char* key, int& out) {
      if (j.contains(key)) out = j.at(key).get<int>();
    };
    read_int("candidate_window_start_days", cfg.candidate_window_start_days);
    read_int("candidate_window_end_days", cfg.candidate_window_end_days);
    read_int("exclusion_days", cfg.exclusion_days);
    read_int("monitoring_hours", cfg.monitoring_hours);
    read_int("active_days", cfg.active_days);
    read_int("recent_days", cfg.recent_days);
    read_int("former_days", cfg.former_days);
    read_int("new_days", cfg.new_days);
    read_int("bin_size", cfg.bin_size);
    read_int("quality_period_days", cfg.quality_period_days);
    read_int("smoothing_window", cfg.smoothing_window);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("event_types"))
      cfg.event_types = j.at("event_types").get<std::vector<std::string>>();
    if (j.contains("conversion_event_type"))
      cfg.conversion_event_type = j.at("conversion_event_type").get<std::string>();
    if (j.contains("visit_event_type"))
      cfg.visit_event_type = j.at("visit_event_type").get<std::string>();
    if (j.contains("reward_weights")) {
      cfg.reward_weights.clear();
      for (const auto& step : j.at("reward_weights")) {
        if (!step.is_array() || step.size() != 2)
          throw ConfigError(origin + ": reward_weights entries must be [max_hours, weight] pairs");
        cfg.reward_weights.emplace_back(step[0].get<double>(), step[1].get<double>());
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return parse_run_config(j, origin);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_config_from_json_text(buf.str(), path.string());
}

std::string run_config_to_json_text(const RunConfig& config) {
  json j;
  j["candidate_window_start_days"] = config.candidate_window_start_days;
  j["candidate_window_end_days"] = config.candidate_window_end_days;
  j["exclusion_days"] = config.exclusion_days;
  j["monitoring_hours"] = config.monitoring_hours;
  j["active_days"] = config.active_days;
  j["recent_days"] = config.recent_days;
  j["former_days"] = config.former_days;
  j["new_days"] = config.new_days;
  j["bin_size"] = config.bin_size;
  j["quality_period_days"] = config.quality_period_days;
  j["smoothing_window"] = config.smoothing_window;
  j["seed"] = config.seed;
  j["event_types"] = config.event_types;
  j["conversion_event_type"] = config.conversion_event_type;
  j["visit_event_type"] = config.visit_event_type;
  json weights = json::array();
  for (const auto& [hours, weight] : config.reward_weights)
    weights.push_back(json::array({hours, weight}));
  j["reward_weights"] = weights;
  return j.dump();
}

RunConfig run_config_from_snapshot(const std::string& json_text) {
  return run_config_from_json_text(json_text, "<config snapshot>");
}

}  // namespace dcm
