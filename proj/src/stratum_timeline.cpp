#include "dcm/stratum_timeline.hpp"

#include <algorithm>

namespace dcm {

Subcategory StratumTimeline::at(Timestamp t) const {
  return labels_[segment_index(t)];
}

std::size_t StratumTimeline::segment_index(Timestamp t) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  if (it == starts_.begin()) return 0;
  return std::size_t(std::distance(starts_.begin(), it)) - 1;
}

namespace {

// Most recent element <= t, if any.
std::optional<Timestamp> last_at_or_before(std::span<const Timestamp> sorted, Timestamp t) {
  auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
  if (it == sorted.begin()) return std::nullopt;
  return *(it - 1);
}

Subcategory evaluate(Timestamp first_seen, std::span<const Timestamp> conversions,
                     std::span<const Timestamp> visits, Timestamp t, const RunConfig& config) {
  const bool is_new = (t - first_seen) <= days_to_seconds(config.new_days);
  const RecencyBucket conv = recency_bucket(last_at_or_before(conversions, t), t, config);
  const RecencyBucket visit = recency_bucket(last_at_or_before(visits, t), t, config);
  return subcategory_for(is_new, conv, visit);
}

void push_event_breakpoints(std::vector<Timestamp>& out, std::span<const Timestamp> events,
                            const RunConfig& config, Timestamp horizon_end) {
  for (Timestamp e : events) {
    if (e > horizon_end) break;
    out.push_back(e);
    // First second after each bucket's inclusive upper edge.
    out.push_back(e + days_to_seconds(config.active_days) + 1);
    out.push_back(e + days_to_seconds(config.recent_days) + 1);
    out.push_back(e + days_to_seconds(config.former_days) + 1);
  }
}

}  // namespace

StratumTimeline build_stratum_timeline(Timestamp first_seen_at,
                                       std::span<const Timestamp> conversion_times,
                                       std::span<const Timestamp> visit_times,
                                       const RunConfig& config, Timestamp horizon_end) {
  Timestamp begin = first_seen_at;
  if (!conversion_times.empty()) begin = std::min(begin, conversion_times.front());
  if (!visit_times.empty()) begin = std::min(begin, visit_times.front());

  std::vector<Timestamp> breakpoints;
  breakpoints.reserve(4 * (conversion_times.size() + visit_times.size()) + 2);
  breakpoints.push_back(first_seen_at + days_to_seconds(config.new_days) + 1);
  push_event_breakpoints(breakpoints, conversion_times, config, horizon_end);
  push_event_breakpoints(breakpoints, visit_times, config, horizon_end);

  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

  std::vector<Timestamp> starts;
  std::vector<Subcategory> labels;
  starts.push_back(begin);
  labels.push_back(evaluate(first_seen_at, conversion_times, visit_times, begin, config));
  for (Timestamp bp : breakpoints) {
    if (bp <= begin || bp > horizon_end) continue;
    const Subcategory label = evaluate(first_seen_at, conversion_times, visit_times, bp, config);
    if (label == labels.back()) continue;
    starts.push_back(bp);
    labels.push_back(label);
  }
  return StratumTimeline(std::move(starts), std::move(labels));
}

StratumTimeline build_stratum_timeline(const ContactProfile& profile,
                                       std::span<const BehaviorEvent> history,
                                       const RunConfig& config, Timestamp horizon_end) {
  std::vector<Timestamp> conversions;
  std::vector<Timestamp> visits;
  for (const BehaviorEvent& e : history) {
    if (e.event_type == config.conversion_event_type) conversions.push_back(e.occurred_at);
    if (e.event_type == config.visit_event_type) visits.push_back(e.occurred_at);
  }
  std::sort(conversions.begin(), conversions.end());
  std::sort(visits.begin(), visits.end());
  return build_stratum_timeline(profile.first_seen_at, conversions, visits, config, horizon_end);
}

}  // namespace dcm
