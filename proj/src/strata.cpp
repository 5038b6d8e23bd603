#include "dcm/strata.hpp"

#include <algorithm>

#include "dcm/errors.hpp"

namespace dcm {

RecencyBucket recency_bucket(std::optional<Timestamp> last_event_at, Timestamp at_time,
                             const RunConfig& config) {
  if (!last_event_at.has_value()) return RecencyBucket::kNone;
  const Timestamp delta = at_time - *last_event_at;
  if (delta < 0) throw FutureEvent();
  if (delta <= days_to_seconds(config.active_days)) return RecencyBucket::kActive;
  if (delta <= days_to_seconds(config.recent_days)) return RecencyBucket::kRecent;
  if (delta <= days_to_seconds(config.former_days)) return RecencyBucket::kFormer;
  return RecencyBucket::kNone;
}

Subcategory subcategory_for(bool is_new, RecencyBucket conversion, RecencyBucket visit) {
  if (is_new) return Subcategory::kNew;
  switch (conversion) {
    case RecencyBucket::kActive:
      return Subcategory::kActivelyConverting;
    case RecencyBucket::kRecent:
      return Subcategory::kRecentlyConverted;
    case RecencyBucket::kFormer:
      switch (visit) {
        case RecencyBucket::kActive: return Subcategory::kFormerlyConvertedActivelyLooking;
        case RecencyBucket::kRecent: return Subcategory::kFormerlyConvertedRecentlyLooked;
        // A conversion implies presence, so a converted-but-never-looking
        // contact still counts as having formerly looked.
        case RecencyBucket::kFormer:
        case RecencyBucket::kNone: return Subcategory::kFormerlyConvertedFormerlyLooked;
      }
      break;
    case RecencyBucket::kNone:
      switch (visit) {
        case RecencyBucket::kActive: return Subcategory::kActivelyLooking;
        case RecencyBucket::kRecent: return Subcategory::kRecentlyLooked;
        case RecencyBucket::kFormer: return Subcategory::kFormerlyLooked;
        case RecencyBucket::kNone: return Subcategory::kUnclassifiable;
      }
      break;
  }
  return Subcategory::kUnclassifiable;
}

Category category_of(Subcategory subcategory) {
  switch (subcategory) {
    case Subcategory::kNew: return Category::kNew;
    case Subcategory::kActivelyConverting: return Category::kActive;
    case Subcategory::kRecentlyConverted: return Category::kRecent;
    case Subcategory::kFormerlyConvertedActivelyLooking:
    case Subcategory::kFormerlyConvertedRecentlyLooked:
    case Subcategory::kActivelyLooking:
    case Subcategory::kRecentlyLooked: return Category::kLurking;
    case Subcategory::kFormerlyConvertedFormerlyLooked:
    case Subcategory::kFormerlyLooked: return Category::kInactive;
    case Subcategory::kUnclassifiable: return Category::kUnclassifiable;
  }
  return Category::kUnclassifiable;
}

std::string_view category_label(Category category) {
  switch (category) {
    case Category::kNew: return "New";
    case Category::kActive: return "Active";
    case Category::kRecent: return "Recent";
    case Category::kLurking: return "Lurking";
    case Category::kInactive: return "Inactive";
    case Category::kUnclassifiable: return "Unclassifiable";
  }
  return "Unclassifiable";
}

std::string_view subcategory_label(Subcategory subcategory) {
  switch (subcategory) {
    case Subcategory::kNew: return "New";
    case Subcategory::kActivelyConverting: return "Actively converting";
    case Subcategory::kRecentlyConverted: return "Recently converted";
    case Subcategory::kFormerlyConvertedActivelyLooking:
      return "Formerly converted, actively looking";
    case Subcategory::kFormerlyConvertedRecentlyLooked:
      return "Formerly converted, recently looked";
    case Subcategory::kActivelyLooking: return "Actively looking";
    case Subcategory::kRecentlyLooked: return "Recently looked";
    case Subcategory::kFormerlyConvertedFormerlyLooked:
      return "Formerly converted, formerly looked";
    case Subcategory::kFormerlyLooked: return "Formerly looked";
    case Subcategory::kUnclassifiable: return "unclassifiable";
  }
  return "unclassifiable";
}

std::optional<Subcategory> subcategory_from_label(std::string_view label) {
  for (int i = 0; i < kSubcategoryCount; ++i) {
    const auto sub = static_cast<Subcategory>(i);
    if (subcategory_label(sub) == label) return sub;
  }
  return std::nullopt;
}

ActivityStratum classify_contact(const ContactProfile& profile,
                                 std::span<const BehaviorEvent> history, Timestamp at_time,
                                 const RunConfig& config) {
  ActivityStratum stratum;
  stratum.is_new = (at_time - profile.first_seen_at) <= days_to_seconds(config.new_days);

  std::optional<Timestamp> last_conversion;
  std::optional<Timestamp> last_visit;
  // History is time-sorted; walk backwards from at_time until both kinds
  // are resolved or the window floor is passed.
  auto end = std::upper_bound(history.begin(), history.end(), at_time,
                              [](Timestamp t, const BehaviorEvent& e) { return t < e.occurred_at; });
  const Timestamp floor = at_time - days_to_seconds(config.former_days);
  for (auto it = end; it != history.begin();) {
    --it;
    if (it->occurred_at < floor) break;
    if (!last_conversion && it->event_type == config.conversion_event_type)
      last_conversion = it->occurred_at;
    if (!last_visit && it->event_type == config.visit_event_type) last_visit = it->occurred_at;
    if (last_conversion && last_visit) break;
  }

  stratum.conversion_bucket = recency_bucket(last_conversion, at_time, config);
  stratum.visit_bucket = recency_bucket(last_visit, at_time, config);
  stratum.subcategory = subcategory_for(stratum.is_new, stratum.conversion_bucket, stratum.visit_bucket);
  stratum.category = category_of(stratum.subcategory);
  return stratum;
}

}  // namespace dcm
