#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace dcm {

// Opaque stable contact identifier. Same contact => same id across all logs.
using ContactId = std::string;

// Seconds since epoch, UTC. All window arithmetic is integer seconds;
// a "day" is exactly 86,400 s.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86'400;
inline constexpr Timestamp kSecondsPerHour = 3'600;

constexpr Timestamp days_to_seconds(int d) { return Timestamp(d) * kSecondsPerDay; }
constexpr Timestamp hours_to_seconds(int h) { return Timestamp(h) * kSecondsPerHour; }

// Attribute name -> categorical label. The attribute set is open-ended;
// map ordering gives a canonical iteration order for key derivation.
using TreatmentVector = std::map<std::string, std::string>;

// Canonical string derived from a TreatmentVector. Two keys are equal iff
// the attribute->label mappings are identical.
using ClusterKey = std::string;

// Sorted `name=label` pairs joined with `|`. Separator characters inside
// names or labels are percent-encoded so distinct vectors never collide.
// Throws EmptyTreatment when the vector has no attributes.
ClusterKey derive_cluster_key(const TreatmentVector& treatment);

struct MessageRecord {
  std::string message_id;
  ContactId contact_id;
  Timestamp sent_at = 0;
  TreatmentVector treatment;
  double confidence_score = 0.5;  // 0.5 = no preference either way
  ClusterKey cluster_key;

  friend bool operator==(const MessageRecord&, const MessageRecord&) = default;
};

struct BehaviorEvent {
  ContactId contact_id;
  std::string event_type;  // open enum: visit / add_to_cart / purchase / custom
  Timestamp occurred_at = 0;

  friend bool operator==(const BehaviorEvent&, const BehaviorEvent&) = default;
};

struct ContactProfile {
  ContactId contact_id;
  Timestamp first_seen_at = 0;

  friend bool operator==(const ContactProfile&, const ContactProfile&) = default;
};

inline constexpr const char* kVisitEvent = "visit";
inline constexpr const char* kAddToCartEvent = "add_to_cart";
inline constexpr const char* kPurchaseEvent = "purchase";

}  // namespace dcm
