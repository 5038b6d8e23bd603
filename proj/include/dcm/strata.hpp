#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "dcm/config.hpp"
#include "dcm/core.hpp"

namespace dcm {

// How recently a contact did something, coarsened against the config
// thresholds. Upper edges are inclusive: exactly 7 days => active.
enum class RecencyBucket { kActive, kRecent, kFormer, kNone };

enum class Category { kNew, kActive, kRecent, kLurking, kInactive, kUnclassifiable };

// The nine quality-table rows plus the excluded bucket. Enum order is the
// canonical report row order.
enum class Subcategory {
  kNew,
  kActivelyConverting,
  kRecentlyConverted,
  kFormerlyConvertedActivelyLooking,
  kFormerlyConvertedRecentlyLooked,
  kActivelyLooking,
  kRecentlyLooked,
  kFormerlyConvertedFormerlyLooked,
  kFormerlyLooked,
  kUnclassifiable,
};

inline constexpr int kSubcategoryCount = 10;

struct ActivityStratum {
  Category category = Category::kUnclassifiable;
  Subcategory subcategory = Subcategory::kUnclassifiable;
  RecencyBucket conversion_bucket = RecencyBucket::kNone;
  RecencyBucket visit_bucket = RecencyBucket::kNone;
  bool is_new = false;

  bool unclassifiable() const { return subcategory == Subcategory::kUnclassifiable; }
};

// Two contacts belong to the same stratum iff their subcategories agree.
inline bool same_stratum(const ActivityStratum& a, const ActivityStratum& b) {
  return a.subcategory == b.subcategory;
}

// Bucket for an event `last_event_at` when evaluated at `at_time`.
// Absent event => kNone. Throws FutureEvent when the event is after at_time.
RecencyBucket recency_bucket(std::optional<Timestamp> last_event_at, Timestamp at_time,
                             const RunConfig& config);

// Total mapping (is_new, conversion, visit) -> subcategory. New overrides
// everything; conversion recency dominates visit recency.
Subcategory subcategory_for(bool is_new, RecencyBucket conversion, RecencyBucket visit);

Category category_of(Subcategory subcategory);
std::string_view category_label(Category category);
std::string_view subcategory_label(Subcategory subcategory);
std::optional<Subcategory> subcategory_from_label(std::string_view label);

// `history` must be the contact's events sorted ascending by occurred_at.
// Only events at or before at_time are considered.
ActivityStratum classify_contact(const ContactProfile& profile,
                                 std::span<const BehaviorEvent> history, Timestamp at_time,
                                 const RunConfig& config);

}  // namespace dcm
