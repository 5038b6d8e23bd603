#include "dcm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dcm/errors.hpp"
#include "dcm/parallel.hpp"
#include "dcm/rng.hpp"

namespace dcm {

using nlohmann::json;

namespace {

// Stream tags keep the population, schedule and event draws independent.
constexpr std::uint64_t kPopulationStream = 0xA1;
constexpr std::uint64_t kScheduleStream = 0xB2;
constexpr std::uint64_t kEventStream = 0xC3;

Rng contact_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t contact) {
  return Rng(mix_seed(mix_seed(seed, tag), contact));
}

struct AgeRange {
  double lo = 0, hi = 0;  // days before start
};

// Which recency buckets the subcategory requires at the simulation start.
struct SeedPlan {
  bool is_new = false;
  std::optional<RecencyBucket> conversion;
  std::optional<RecencyBucket> visit;
};

SeedPlan seed_plan_for(Subcategory subcategory) {
  using B = RecencyBucket;
  switch (subcategory) {
    case Subcategory::kNew: return {true, std::nullopt, std::nullopt};
    case Subcategory::kActivelyConverting: return {false, B::kActive, std::nullopt};
    case Subcategory::kRecentlyConverted: return {false, B::kRecent, std::nullopt};
    case Subcategory::kFormerlyConvertedActivelyLooking: return {false, B::kFormer, B::kActive};
    case Subcategory::kFormerlyConvertedRecentlyLooked: return {false, B::kFormer, B::kRecent};
    case Subcategory::kActivelyLooking: return {false, std::nullopt, B::kActive};
    case Subcategory::kRecentlyLooked: return {false, std::nullopt, B::kRecent};
    case Subcategory::kFormerlyConvertedFormerlyLooked: return {false, B::kFormer, B::kFormer};
    case Subcategory::kFormerlyLooked: return {false, std::nullopt, B::kFormer};
    case Subcategory::kUnclassifiable: return {false, std::nullopt, std::nullopt};
  }
  return {};
}

// Feasible age interval (in days) for a seed event that must land in the
// given bucket when evaluated at the start time.
AgeRange bucket_age_bounds(RecencyBucket bucket, const RunConfig& run) {
  switch (bucket) {
    case RecencyBucket::kActive: return {0.0, double(run.active_days)};
    case RecencyBucket::kRecent: return {double(run.active_days), double(run.recent_days)};
    case RecencyBucket::kFormer: return {double(run.recent_days), double(run.former_days)};
    case RecencyBucket::kNone: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

// Default: stay clear of both edges so integer-second rounding cannot move
// the seed into a neighbouring bucket.
AgeRange default_age_range(RecencyBucket bucket, const RunConfig& run) {
  const AgeRange bounds = bucket_age_bounds(bucket, run);
  const double span = bounds.hi - bounds.lo;
  return {bounds.lo + 0.15 * span, bounds.hi - 0.15 * span};
}

void check_age_range(const AgeRange& range, const AgeRange& bounds, const std::string& what) {
  if (!(range.lo <= range.hi))
    throw ConfigError(what + ": age range must satisfy lo <= hi");
  if (range.lo <= bounds.lo + 0.01 || range.hi > bounds.hi - 0.01 + 1e-12)
    throw ConfigError(what + ": ages must lie inside (" + std::to_string(bounds.lo) + ", " +
                      std::to_string(bounds.hi) + ") days before the start");
}

double resolved_effect(const StratumSpec& spec, const std::string& event_type) {
  if (auto it = spec.effect_per_day.find(event_type); it != spec.effect_per_day.end())
    return it->second;
  const double base = spec.baseline_per_day.count(event_type)
                          ? spec.baseline_per_day.at(event_type)
                          : 0.0;
  if (auto it = spec.lift.find(event_type); it != spec.lift.end()) return base * it->second;
  return 0.0;
}

double baseline_of(const StratumSpec& spec, const std::string& event_type) {
  auto it = spec.baseline_per_day.find(event_type);
  return it == spec.baseline_per_day.end() ? 0.0 : it->second;
}

std::string contact_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%07zu", index);
  return buf;
}

}  // namespace

SimConfig::SimConfig() {
  treatments = {
      {"tone", {"casual", "business"}},
      {"topic", {"featured", "seasonal"}},
      {"value_prop", {"convenience", "low_cost", "quality"}},
  };
}

void SimConfig::validate() const {
  run.validate();
  if (n_contacts < 1) throw ConfigError("n_contacts must be >= 1");
  if (horizon_days < 1) throw ConfigError("horizon_days must be >= 1");
  if (start_time < days_to_seconds(run.former_days + run.new_days + 30))
    throw ConfigError("start_time leaves no room for seeded history");
  if (messages_per_week < 0) throw ConfigError("messages_per_week must be >= 0");
  if (max_messages_per_week < 1) throw ConfigError("max_messages_per_week must be >= 1");
  if (treatments.empty()) throw ConfigError("treatment catalog must not be empty");
  for (const auto& [attr, labels] : treatments) {
    if (attr.empty()) throw ConfigError("treatment attribute names must be non-empty");
    if (labels.empty()) throw ConfigError("attribute '" + attr + "' needs at least one label");
    for (const auto& label : labels)
      if (label.empty()) throw ConfigError("treatment labels must be non-empty");
  }
  if (strata.empty()) throw ConfigError("at least one stratum spec is required");
  {
    std::set<Subcategory> seen;
    for (const StratumSpec& s : strata)
      if (!seen.insert(s.subcategory).second)
        throw ConfigError(std::string("duplicate stratum spec: ") +
                          std::string(subcategory_label(s.subcategory)));
  }
  double proportion_sum = 0;
  for (const StratumSpec& s : strata) {
    const std::string name(subcategory_label(s.subcategory));
    if (s.proportion < 0) throw ConfigError(name + ": proportion must be >= 0");
    proportion_sum += s.proportion;
    if (s.suppression < 0 || s.suppression >= 1)
      throw ConfigError(name + ": suppression must lie in [0, 1)");
    for (const auto& [type, rate] : s.baseline_per_day)
      if (rate < 0) throw ConfigError(name + "/" + type + ": baseline must be >= 0");
    for (const auto& [type, value] : s.lift)
      if (value < 0) throw ConfigError(name + "/" + type + ": lift must be >= 0");
    for (const auto& [type, value] : s.effect_per_day) {
      if (value < 0) throw ConfigError(name + "/" + type + ": effect must be >= 0");
      if (value > 0 && baseline_of(s, type) <= 0)
        throw ConfigError(name + "/" + type + ": a message effect needs a positive baseline");
    }
    for (const auto& [type, value] : s.lift)
      if (value > 0 && baseline_of(s, type) <= 0)
        throw ConfigError(name + "/" + type + ": a message effect needs a positive baseline");

    const SeedPlan plan = seed_plan_for(s.subcategory);
    if (plan.is_new) {
      if (s.conversion_age_days || s.visit_age_days)
        throw ConfigError(name + ": new contacts take no seed events");
      if (s.first_seen_age_days)
        check_age_range({s.first_seen_age_days->first, s.first_seen_age_days->second},
                        {-0.02, double(run.new_days)}, name + "/first_seen");
    } else {
      if (s.conversion_age_days) {
        if (!plan.conversion) throw ConfigError(name + ": takes no conversion seed");
        check_age_range({s.conversion_age_days->first, s.conversion_age_days->second},
                        bucket_age_bounds(*plan.conversion, run), name + "/conversion");
      }
      if (s.visit_age_days) {
        if (!plan.visit) throw ConfigError(name + ": takes no visit seed");
        check_age_range({s.visit_age_days->first, s.visit_age_days->second},
                        bucket_age_bounds(*plan.visit, run), name + "/visit");
      }
      if (s.first_seen_age_days) {
        if (s.first_seen_age_days->first <= double(run.new_days))
          throw ConfigError(name + ": first_seen must predate the new-contact threshold");
        if (s.first_seen_age_days->first > s.first_seen_age_days->second)
          throw ConfigError(name + "/first_seen: age range must satisfy lo <= hi");
      }
    }
  }
  if (std::abs(proportion_sum - 1.0) > 1e-6)
    throw ConfigError("stratum proportions must sum to 1");
  if (score.noise_sd < 0) throw ConfigError("score noise_sd must be >= 0");
  if (score.strength_spread < 0 || score.strength_spread > 1)
    throw ConfigError("strength_spread must lie in [0, 1]");
}

Population generate_population(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  Population pop;
  pop.profiles.resize(config.n_contacts);
  pop.intended.resize(config.n_contacts);

  std::vector<double> cumulative;
  double acc = 0;
  for (const StratumSpec& s : config.strata) {
    acc += s.proportion;
    cumulative.push_back(acc);
  }

  const Timestamp t0 = config.start_time;
  for (int i = 0; i < config.n_contacts; ++i) {
    Rng rng = contact_stream(seed, kPopulationStream, std::uint64_t(i));
    const double u = rng.uniform01();
    std::size_t si = 0;
    while (si + 1 < cumulative.size() && u >= cumulative[si]) ++si;
    const StratumSpec& spec = config.strata[si];
    const SeedPlan plan = seed_plan_for(spec.subcategory);
    pop.intended[i] = spec.subcategory;

    ContactProfile profile;
    profile.contact_id = contact_name(std::size_t(i));

    auto draw_age_seconds = [&](const AgeRange& range) {
      return Timestamp(std::llround(rng.uniform(range.lo, range.hi) * double(kSecondsPerDay)));
    };

    Timestamp max_seed_age = 0;
    std::optional<Timestamp> conversion_at, visit_at;
    if (plan.conversion) {
      const AgeRange range = spec.conversion_age_days
                                 ? AgeRange{spec.conversion_age_days->first,
                                            spec.conversion_age_days->second}
                                 : default_age_range(*plan.conversion, config.run);
      const Timestamp age = draw_age_seconds(range);
      conversion_at = t0 - age;
      max_seed_age = std::max(max_seed_age, age);
    }
    if (plan.visit) {
      const AgeRange range =
          spec.visit_age_days
              ? AgeRange{spec.visit_age_days->first, spec.visit_age_days->second}
              : default_age_range(*plan.visit, config.run);
      const Timestamp age = draw_age_seconds(range);
      visit_at = t0 - age;
      max_seed_age = std::max(max_seed_age, age);
    }

    if (plan.is_new) {
      const AgeRange range = spec.first_seen_age_days
                                 ? AgeRange{spec.first_seen_age_days->first,
                                            spec.first_seen_age_days->second}
                                 : AgeRange{0.5, 0.8 * double(config.run.new_days)};
      profile.first_seen_at = t0 - draw_age_seconds(range);
    } else if (spec.first_seen_age_days) {
      const Timestamp age = draw_age_seconds(
          {spec.first_seen_age_days->first, spec.first_seen_age_days->second});
      profile.first_seen_at = t0 - std::max(age, max_seed_age);
    } else {
      const Timestamp floor_age =
          std::max(max_seed_age, days_to_seconds(config.run.new_days)) + days_to_seconds(2);
      profile.first_seen_at = t0 - floor_age;
    }

    if (conversion_at)
      pop.seed_events.push_back(
          {profile.contact_id, config.run.conversion_event_type, *conversion_at});
    if (visit_at)
      pop.seed_events.push_back({profile.contact_id, config.run.visit_event_type, *visit_at});
    pop.profiles[i] = std::move(profile);
  }
  return pop;
}

namespace {

struct GeneratedMessage {
  Timestamp sent_at;
  double score;
  double strength;
  TreatmentVector treatment;
};

struct GeneratedEvent {
  Timestamp occurred_at;
  std::uint32_t type_index;
};

// Piecewise-constant rate over [gen_start, gen_end); inside a message's
// monitoring window the organic rate is scaled by (1 - suppression) and the
// message effect (scaled by its strength) is added on top. Overlapping
// windows take the most recent message's strength; effects never stack.
struct RateProfile {
  struct Segment {
    Timestamp start, end;
    double strength;  // < 0 means uncovered
  };
  std::vector<Segment> segments;

  RateProfile(std::span<const GeneratedMessage> messages, Timestamp gen_start, Timestamp gen_end,
              Timestamp window) {
    std::vector<Timestamp> bounds;
    bounds.push_back(gen_start);
    bounds.push_back(gen_end);
    for (const auto& m : messages) {
      if (m.sent_at < gen_end) bounds.push_back(std::max(gen_start, m.sent_at));
      const Timestamp we = m.sent_at + window;
      if (we > gen_start && we < gen_end) bounds.push_back(we);
    }
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
      const Timestamp lo = bounds[b], hi = bounds[b + 1];
      double strength = -1.0;
      // Most recent message whose window covers lo.
      for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->sent_at <= lo) {
          if (lo < it->sent_at + window) strength = it->strength;
          break;
        }
      }
      segments.push_back({lo, hi, strength});
    }
  }
};

}  // namespace

SimResult run_simulation(const SimConfig& config, std::uint64_t seed, int threads) {
  const Population pop = generate_population(config, seed);
  const Timestamp t0 = config.start_time;
  const Timestamp horizon = days_to_seconds(config.horizon_days);
  const Timestamp window = config.run.monitoring_window();
  const Timestamp gen_end = t0 + horizon + window;

  // Stratum spec per contact.
  std::vector<std::uint32_t> spec_of(pop.profiles.size());
  {
    std::map<Subcategory, std::uint32_t> by_sub;
    for (std::uint32_t s = 0; s < config.strata.size(); ++s)
      by_sub[config.strata[s].subcategory] = s;
    for (std::size_t i = 0; i < pop.profiles.size(); ++i) spec_of[i] = by_sub.at(pop.intended[i]);
  }

  // Event types each stratum generates organically or via messages.
  std::vector<std::vector<std::string>> generated_types(config.strata.size());
  for (std::size_t s = 0; s < config.strata.size(); ++s) {
    std::set<std::string> types;
    for (const auto& [type, rate] : config.strata[s].baseline_per_day)
      if (rate > 0) types.insert(type);
    for (const auto& [type, value] : config.strata[s].effect_per_day)
      if (value > 0) types.insert(type);
    for (const auto& [type, value] : config.strata[s].lift)
      if (value > 0 && baseline_of(config.strata[s], type) > 0) types.insert(type);
    generated_types[s].assign(types.begin(), types.end());
  }

  std::vector<std::vector<GeneratedMessage>> contact_messages(pop.profiles.size());
  std::vector<std::vector<GeneratedEvent>> contact_events(pop.profiles.size());

  parallel_for(pop.profiles.size(), threads, [&](std::size_t i) {
    const StratumSpec& spec = config.strata[spec_of[i]];

    // Message schedule.
    Rng schedule_rng = contact_stream(seed, kScheduleStream, i);
    std::vector<GeneratedMessage>& msgs = contact_messages[i];
    for (Timestamp week_start = 0; week_start < horizon; week_start += days_to_seconds(7)) {
      const Timestamp week_len = std::min(days_to_seconds(7), horizon - week_start);
      const double mean = config.messages_per_week * double(week_len) / double(days_to_seconds(7));
      int n = schedule_rng.poisson(mean);
      n = std::min(n, config.max_messages_per_week);
      for (int m = 0; m < n; ++m) {
        GeneratedMessage msg;
        msg.sent_at = t0 + week_start +
                      Timestamp(std::floor(schedule_rng.uniform01() * double(week_len)));
        for (const auto& [attr, labels] : config.treatments)
          msg.treatment[attr] = labels[schedule_rng.bounded(labels.size())];
        const double spread = config.score.strength_spread;
        double pct = 0.5;
        msg.strength = 1.0;
        if (spread > 0) {
          msg.strength = schedule_rng.uniform(1.0 - spread, 1.0 + spread);
          pct = (msg.strength - (1.0 - spread)) / (2.0 * spread);
        }
        double score = 0.5 + config.score.alpha * (pct - 0.5);
        if (config.score.noise_sd > 0) score += schedule_rng.normal(0.0, config.score.noise_sd);
        msg.score = std::clamp(score, 0.0, 1.0);
        msgs.push_back(std::move(msg));
      }
    }
    std::stable_sort(msgs.begin(), msgs.end(),
                     [](const GeneratedMessage& a, const GeneratedMessage& b) {
                       return a.sent_at < b.sent_at;
                     });

    // Organic + message-driven events, one counting process per type.
    const RateProfile profile(contact_messages[i], t0, gen_end, window);
    std::vector<GeneratedEvent>& evts = contact_events[i];
    for (std::uint32_t ti = 0; ti < generated_types[spec_of[i]].size(); ++ti) {
      const std::string& type = generated_types[spec_of[i]][ti];
      const double base = baseline_of(spec, type) / double(kSecondsPerDay);
      const double effect = resolved_effect(spec, type) / double(kSecondsPerDay);
      Rng event_rng = contact_stream(seed, mix_seed(kEventStream, fnv1a64(type)), i);
      double need = event_rng.exponential(1.0);  // unit-rate exposure to spend
      for (const RateProfile::Segment& seg : profile.segments) {
        const double rate = seg.strength < 0
                                ? base
                                : std::max(0.0, base * (1.0 - spec.suppression) +
                                                    effect * seg.strength);
        if (rate <= 0.0) continue;
        double pos = 0.0;
        const double span = double(seg.end - seg.start);
        for (;;) {
          const double step = need / rate;
          if (pos + step > span) {
            need -= (span - pos) * rate;
            break;
          }
          pos += step;
          const Timestamp at =
              std::max<Timestamp>(t0 + 1, seg.start + Timestamp(std::ceil(pos)));
          evts.push_back({at, ti});
          need = event_rng.exponential(1.0);
        }
      }
    }
  });

  // Deterministic assembly, contact-major.
  SimResult result;
  result.contacts = pop.profiles;
  result.intended_strata = pop.intended;

  for (std::size_t i = 0; i < pop.profiles.size(); ++i) {
    const std::string& contact = pop.profiles[i].contact_id;
    std::uint32_t seq = 0;
    for (const GeneratedMessage& m : contact_messages[i]) {
      MessageRecord record;
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "-%03u", seq++);
      record.message_id = "m" + contact.substr(1) + suffix;
      record.contact_id = contact;
      record.sent_at = m.sent_at;
      record.treatment = m.treatment;
      record.confidence_score = m.score;
      record.cluster_key = derive_cluster_key(m.treatment);
      result.messages.records.push_back(std::move(record));
      result.message_strengths.push_back(m.strength);
    }
  }
  result.messages.reindex();

  struct Tagged {
    Timestamp at;
    std::uint32_t contact;
    std::uint32_t seq;
    const std::string* type;
  };
  std::vector<Tagged> all_events;
  all_events.reserve(pop.seed_events.size() + 1024);
  for (std::size_t i = 0; i < pop.profiles.size(); ++i) {
    const auto& types = generated_types[spec_of[i]];
    std::uint32_t seq = 0;
    for (const GeneratedEvent& e : contact_events[i])
      all_events.push_back({e.occurred_at, std::uint32_t(i), seq++, &types[e.type_index]});
  }
  std::sort(all_events.begin(), all_events.end(), [](const Tagged& a, const Tagged& b) {
    if (a.at != b.at) return a.at < b.at;
    if (a.contact != b.contact) return a.contact < b.contact;
    return a.seq < b.seq;
  });

  // Seed history first (it predates the start), then the generated stream.
  std::vector<BehaviorEvent> seeds = pop.seed_events;
  std::sort(seeds.begin(), seeds.end(), [](const BehaviorEvent& a, const BehaviorEvent& b) {
    if (a.occurred_at != b.occurred_at) return a.occurred_at < b.occurred_at;
    if (a.contact_id != b.contact_id) return a.contact_id < b.contact_id;
    return a.event_type < b.event_type;
  });
  for (BehaviorEvent& e : seeds) result.events.events.push_back(std::move(e));
  for (const Tagged& t : all_events)
    result.events.events.push_back({pop.profiles[t.contact].contact_id, *t.type, t.at});
  result.events.reindex();

  // Analytic ground truth from the configured rates.
  result.truth.monitoring_hours = config.run.monitoring_hours;
  const double window_days = double(config.run.monitoring_hours) / 24.0;
  for (const StratumSpec& spec : config.strata) {
    for (const std::string& type : config.run.event_types) {
      GroundTruthCell cell;
      cell.subcategory = spec.subcategory;
      cell.event_type = type;
      const double base = baseline_of(spec, type);
      const double effect = resolved_effect(spec, type);
      cell.baseline_events = base * window_days;
      cell.uplifted_events = (base * (1.0 - spec.suppression) + effect) * window_days;
      cell.attributable_share =
          cell.uplifted_events <= cell.baseline_events || cell.uplifted_events <= 0
              ? 0.0
              : (cell.uplifted_events - cell.baseline_events) / cell.uplifted_events;
      result.truth.cells.push_back(std::move(cell));
    }
  }
  return result;
}

double true_attributable_share(const GroundTruth& truth, Subcategory stratum,
                               const std::string& event_type) {
  for (const GroundTruthCell& cell : truth.cells)
    if (cell.subcategory == stratum && cell.event_type == event_type)
      return cell.attributable_share;
  throw UnknownStratum(std::string(subcategory_label(stratum)) + "/" + event_type);
}

// ---------------------------------------------------------------------------
// Config & ground truth files
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string> kSimKeys = {
    "n_contacts", "horizon_days", "start_time", "messages_per_week",
    "max_messages_per_week", "treatments", "strata", "score"};
const std::set<std::string> kStratumKeys = {
    "subcategory", "proportion", "baseline_per_day", "lift", "effect_per_day",
    "suppression", "conversion_age_days", "visit_age_days", "first_seen_age_days"};

std::pair<double, double> parse_range(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(what + " must be a [lo, hi] pair of days");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

SimConfig sim_config_from_json_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  SimConfig config;
  config.run = run_config_from_json_text(text, origin);
  if (!root.contains("sim")) throw ConfigError(origin + ": missing 'sim' section");
  const json& sim = root.at("sim");
  if (!sim.is_object()) throw ConfigError(origin + ": 'sim' must be an object");
  for (const auto& [key, value] : sim.items()) {
    (void)value;
    if (!kSimKeys.count(key)) throw ConfigError(origin + ": unknown sim key '" + key + "'");
  }
  try {
    if (sim.contains("n_contacts")) config.n_contacts = sim.at("n_contacts").get<int>();
    if (sim.contains("horizon_days")) config.horizon_days = sim.at("horizon_days").get<int>();
    if (sim.contains("start_time")) config.start_time = sim.at("start_time").get<Timestamp>();
    if (sim.contains("messages_per_week"))
      config.messages_per_week = sim.at("messages_per_week").get<double>();
    if (sim.contains("max_messages_per_week"))
      config.max_messages_per_week = sim.at("max_messages_per_week").get<int>();
    if (sim.contains("treatments")) {
      config.treatments.clear();
      for (const auto& [attr, labels] : sim.at("treatments").items())
        config.treatments[attr] = labels.get<std::vector<std::string>>();
    }
    if (sim.contains("score")) {
      const json& score = sim.at("score");
      config.score.alpha = score.value("alpha", 0.0);
      config.score.noise_sd = score.value("noise_sd", 0.02);
      config.score.strength_spread = score.value("strength_spread", 0.0);
    }
    if (sim.contains("strata")) {
      for (const json& sj : sim.at("strata")) {
        for (const auto& [key, value] : sj.items()) {
          (void)value;
          if (!kStratumKeys.count(key))
            throw ConfigError(origin + ": unknown stratum key '" + key + "'");
        }
        StratumSpec spec;
        const std::string label = sj.at("subcategory").get<std::string>();
        const auto sub = subcategory_from_label(label);
        if (!sub) throw ConfigError(origin + ": unknown subcategory '" + label + "'");
        spec.subcategory = *sub;
        spec.proportion = sj.at("proportion").get<double>();
        if (sj.contains("baseline_per_day"))
          for (const auto& [type, rate] : sj.at("baseline_per_day").items())
            spec.baseline_per_day[type] = rate.get<double>();
        if (sj.contains("lift"))
          for (const auto& [type, value] : sj.at("lift").items())
            spec.lift[type] = value.get<double>();
        if (sj.contains("effect_per_day"))
          for (const auto& [type, value] : sj.at("effect_per_day").items())
            spec.effect_per_day[type] = value.get<double>();
        spec.suppression = sj.value("suppression", 0.0);
        if (sj.contains("conversion_age_days"))
          spec.conversion_age_days = parse_range(sj.at("conversion_age_days"), "conversion_age_days");
        if (sj.contains("visit_age_days"))
          spec.visit_age_days = parse_range(sj.at("visit_age_days"), "visit_age_days");
        if (sj.contains("first_seen_age_days"))
          spec.first_seen_age_days = parse_range(sj.at("first_seen_age_days"), "first_seen_age_days");
        config.strata.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  config.validate();
  return config;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sim_config_from_json_text(buf.str(), path.string());
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  json j;
  j["monitoring_hours"] = truth.monitoring_hours;
  json cells = json::array();
  for (const GroundTruthCell& cell : truth.cells) {
    json c;
    c["subcategory"] = subcategory_label(cell.subcategory);
    c["event_type"] = cell.event_type;
    c["baseline_events"] = cell.baseline_events;
    c["uplifted_events"] = cell.uplifted_events;
    c["attributable_share"] = cell.attributable_share;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  out << j.dump(2) << '\n';
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  GroundTruth truth;
  truth.monitoring_hours = j.at("monitoring_hours").get<int>();
  for (const json& c : j.at("cells")) {
    GroundTruthCell cell;
    const auto sub = subcategory_from_label(c.at("subcategory").get<std::string>());
    if (!sub) throw InputError(path.string() + ": unknown subcategory label");
    cell.subcategory = *sub;
    cell.event_type = c.at("event_type").get<std::string>();
    cell.baseline_events = c.at("baseline_events").get<double>();
    cell.uplifted_events = c.at("uplifted_events").get<double>();
    cell.attributable_share = c.at("attributable_share").get<double>();
    truth.cells.push_back(std::move(cell));
  }
  return truth;
}

}  // namespace dcm
