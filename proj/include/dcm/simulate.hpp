#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcm/config.hpp"
#include "dcm/core.hpp"
#include "dcm/logs.hpp"
#include "dcm/strata.hpp"

namespace dcm {

// Target population slice. Baselines are organic event rates per 24 h; the
// message effect during a monitoring window is either multiplicative
// (`lift`, effect = baseline * lift) or absolute (`effect_per_day`, which
// wins when both are set). `suppression` scales down organic activity inside
// message windows, which is what lets weak messages land below baseline.
struct StratumSpec {
  Subcategory subcategory = Subcategory::kActivelyLooking;
  double proportion = 0;
  std::map<std::string, double> baseline_per_day;
  std::map<std::string, double> lift;
  std::map<std::string, double> effect_per_day;
  double suppression = 0;

  // Seeding overrides, in days before the simulation start. Defaults are
  // derived from the stratum's required recency buckets.
  std::optional<std::pair<double, double>> conversion_age_days;
  std::optional<std::pair<double, double>> visit_age_days;
  std::optional<std::pair<double, double>> first_seen_age_days;
};

// confidence = clamp01(0.5 + alpha * (strength percentile - 0.5) + noise).
// strength_spread widens per-message effect multipliers to U[1-s, 1+s];
// zero spread collapses the percentile to 0.5.
struct ScoreModel {
  double alpha = 0;
  double noise_sd = 0.02;
  double strength_spread = 0;
};

struct SimConfig {
  int n_contacts = 1000;
  int horizon_days = 14;
  Timestamp start_time = 1'700'000'000;
  double messages_per_week = 2.5;
  int max_messages_per_week = 35;
  std::map<std::string, std::vector<std::string>> treatments;  // attribute -> labels
  std::vector<StratumSpec> strata;
  ScoreModel score;
  RunConfig run;  // thresholds, monitoring window, scored event types

  SimConfig();  // fills the default treatment catalog

  // Throws ConfigError on infeasible seeding ranges or malformed knobs.
  void validate() const;
};

struct GroundTruthCell {
  Subcategory subcategory = Subcategory::kUnclassifiable;
  std::string event_type;
  double baseline_events = 0;      // expected per monitored window, unmessaged
  double uplifted_events = 0;      // expected per monitored window after a message
  double attributable_share = 0;   // (uplifted - baseline) / uplifted, clamped at 0
};

struct GroundTruth {
  std::vector<GroundTruthCell> cells;
  int monitoring_hours = 24;
};

// Throws UnknownStratum when no cell matches.
double true_attributable_share(const GroundTruth& truth, Subcategory stratum,
                               const std::string& event_type);

struct Population {
  std::vector<ContactProfile> profiles;
  std::vector<BehaviorEvent> seed_events;   // pre-start history establishing strata
  std::vector<Subcategory> intended;        // aligned with profiles
};

// Ages seed events so every contact classifies into its intended stratum at
// the simulation start (round-trip property).
Population generate_population(const SimConfig& config, std::uint64_t seed);

struct SimResult {
  MessageLog messages;
  EventLog events;
  std::vector<ContactProfile> contacts;
  GroundTruth truth;
  std::vector<double> message_strengths;   // aligned with messages.records
  std::vector<Subcategory> intended_strata;  // aligned with contacts
};

SimResult run_simulation(const SimConfig& config, std::uint64_t seed, int threads = 0);

SimConfig load_sim_config(const std::filesystem::path& path);
SimConfig sim_config_from_json_text(const std::string& text, const std::string& origin);

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth load_ground_truth(const std::filesystem::path& path);

}  // namespace dcm
