#pragma once

// Randomized small-instance generator shared by the matcher oracle tests
// and the acceptance suite. Timestamps snap to half-day grid points half the
// time so window and bucket edges get exercised.

#include <string>
#include <vector>

#include "dcm/config.hpp"
#include "dcm/core.hpp"
#include "dcm/logs.hpp"
#include "dcm/rng.hpp"

namespace dcm::testing {

struct RandomInstance {
  MessageLog messages;
  EventLog events;
  std::vector<ContactProfile> contacts;  // some contacts intentionally missing
};

inline Timestamp jittered_time(Rng& rng, Timestamp lo, Timestamp hi) {
  if (rng.uniform01() < 0.5) {
    // Snap to a half-day grid; edge collisions are the point.
    const Timestamp step = kSecondsPerDay / 2;
    const Timestamp n = (hi - lo) / step;
    return lo + step * Timestamp(rng.bounded(std::uint64_t(n) + 1));
  }
  return lo + Timestamp(rng.bounded(std::uint64_t(hi - lo)));
}

inline RandomInstance make_random_instance(std::uint64_t seed, std::size_t max_contacts = 200,
                                           std::size_t max_messages = 2000) {
  Rng rng(seed);
  RandomInstance instance;

  const std::size_t n_contacts = 2 + rng.bounded(max_contacts - 1);
  const std::size_t n_messages = 1 + rng.bounded(max_messages);
  const Timestamp base = 1'000'000'000;
  const Timestamp horizon = days_to_seconds(30);

  const std::vector<std::string> tones = {"casual", "business"};
  const std::vector<std::string> topics = {"featured", "seasonal", "clearance"};

  std::vector<std::string> contact_ids(n_contacts);
  for (std::size_t c = 0; c < n_contacts; ++c) {
    contact_ids[c] = "u" + std::to_string(c);
    // ~70% of contacts carry an explicit profile; the rest rely on inference.
    if (rng.uniform01() < 0.7) {
      const Timestamp first_seen = base - jittered_time(rng, 0, days_to_seconds(120));
      instance.contacts.push_back({contact_ids[c], first_seen});
    }
    // Behavior history across the classification horizon.
    const int n_events = int(rng.bounded(12));
    for (int e = 0; e < n_events; ++e) {
      BehaviorEvent event;
      event.contact_id = contact_ids[c];
      const double kind = rng.uniform01();
      event.event_type = kind < 0.5 ? kVisitEvent : (kind < 0.8 ? kPurchaseEvent : kAddToCartEvent);
      event.occurred_at = base - days_to_seconds(100) + jittered_time(rng, 0, days_to_seconds(100) + horizon);
      instance.events.events.push_back(std::move(event));
    }
  }

  for (std::size_t m = 0; m < n_messages; ++m) {
    MessageRecord record;
    record.message_id = "msg" + std::to_string(m);
    record.contact_id = contact_ids[rng.bounded(n_contacts)];
    record.sent_at = base + jittered_time(rng, 0, horizon);
    record.treatment = {{"tone", tones[rng.bounded(tones.size())]},
                        {"topic", topics[rng.bounded(topics.size())]}};
    record.confidence_score = rng.uniform01();
    record.cluster_key = derive_cluster_key(record.treatment);
    instance.messages.records.push_back(std::move(record));
  }

  instance.messages.reindex();
  instance.events.reindex();
  return instance;
}

inline ContactDirectory resolve_directory(const RandomInstance& instance) {
  return validate_dataset(instance.messages, instance.events, instance.contacts).resolved;
}

}  // namespace dcm::testing
