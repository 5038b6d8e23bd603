#pragma once

#include <span>
#include <vector>

#include "dcm/config.hpp"
#include "dcm/core.hpp"
#include "dcm/strata.hpp"

namespace dcm {

// Piecewise-constant view of classify_contact over time for one contact.
// Segment i covers [starts[i], starts[i+1]); the last segment is open-ended
// up to the build horizon. Queries outside the built range clamp to the
// nearest segment.
class StratumTimeline {
 public:
  StratumTimeline() = default;
  StratumTimeline(std::vector<Timestamp> starts, std::vector<Subcategory> labels)
      : starts_(std::move(starts)), labels_(std::move(labels)) {}

  Subcategory at(Timestamp t) const;

  // Index of the segment containing t (clamped).
  std::size_t segment_index(Timestamp t) const;

  std::span<const Timestamp> starts() const { return starts_; }
  std::span<const Subcategory> labels() const { return labels_; }
  bool empty() const { return starts_.empty(); }

 private:
  std::vector<Timestamp> starts_;
  std::vector<Subcategory> labels_;
};

// Builds the timeline from the contact's sorted conversion/visit times.
// Breakpoints land exactly where a recency bucket or the new flag can flip,
// so the result agrees with classify_contact at every integer second up to
// horizon_end.
StratumTimeline build_stratum_timeline(Timestamp first_seen_at,
                                       std::span<const Timestamp> conversion_times,
                                       std::span<const Timestamp> visit_times,
                                       const RunConfig& config, Timestamp horizon_end);

// Convenience overload over a sorted event history.
StratumTimeline build_stratum_timeline(const ContactProfile& profile,
                                       std::span<const BehaviorEvent> history,
                                       const RunConfig& config, Timestamp horizon_end);

}  // namespace dcm
