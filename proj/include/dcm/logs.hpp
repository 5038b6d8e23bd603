#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcm/core.hpp"

namespace dcm {

// Immutable after loading; indexes are complete over the records and every
// per-contact entry list is sorted ascending in time.
struct MessageLog {
  std::vector<MessageRecord> records;
  std::unordered_map<ContactId, std::vector<std::uint32_t>> by_contact;
  std::unordered_map<std::string, std::uint32_t> by_message_id;

  const MessageRecord* find(const std::string& message_id) const {
    auto it = by_message_id.find(message_id);
    return it == by_message_id.end() ? nullptr : &records[it->second];
  }
  std::size_t size() const { return records.size(); }

  // Rebuilds both indexes from `records`; used by loaders and the simulator.
  void reindex();

  bool operator==(const MessageLog& other) const { return records == other.records; }
};

struct EventLog {
  std::vector<BehaviorEvent> events;
  std::unordered_map<ContactId, std::vector<std::uint32_t>> by_contact;

  std::size_t size() const { return events.size(); }
  // Contact history as a time-sorted copy-free view is not possible with an
  // index of positions, so callers that need a span use contact_history().
  std::vector<BehaviorEvent> contact_history(const ContactId& contact) const;

  void reindex();

  bool operator==(const EventLog& other) const { return events == other.events; }
};

// Effective first-seen time per contact, after fallback inference.
struct ContactDirectory {
  std::unordered_map<ContactId, Timestamp> first_seen;

  Timestamp first_seen_of(const ContactId& contact) const {
    auto it = first_seen.find(contact);
    return it == first_seen.end() ? 0 : it->second;
  }
  bool contains(const ContactId& contact) const { return first_seen.count(contact) != 0; }
};

struct ValidationReport {
  struct InferredProfile {
    ContactId contact_id;
    Timestamp first_seen_at;  // earliest observed activity
  };
  struct EarlyActivity {
    ContactId contact_id;
    Timestamp occurred_at;
    Timestamp first_seen_at;
    std::string source;  // "event" or "message"
  };

  std::vector<InferredProfile> inferred_profiles;
  std::vector<EarlyActivity> early_activity;
  std::size_t n_messages = 0;
  std::size_t n_events = 0;
  std::size_t n_profiled_contacts = 0;

  // Given profiles plus inferred fallbacks; what downstream stages consume.
  ContactDirectory resolved;

  std::size_t warning_count() const { return inferred_profiles.size() + early_activity.size(); }
};

// Line-delimited JSON records. Missing confidence_score defaults to 0.5;
// missing cluster_key is derived from the treatment vector.
MessageLog load_messages(const std::filesystem::path& path);

// JSONL, or a column-delimited variant with a header row (detected from the
// first line). Unknown event types are kept as custom types.
EventLog load_events(const std::filesystem::path& path);

std::vector<ContactProfile> load_contacts(const std::filesystem::path& path);

// Report-only: never throws for inconsistencies, it lists them. Contacts
// referenced anywhere but missing a profile get first_seen inferred from
// their earliest observed activity.
ValidationReport validate_dataset(const MessageLog& messages, const EventLog& events,
                                  std::span<const ContactProfile> contacts);

void save_messages(const MessageLog& log, const std::filesystem::path& path);
void save_events(const EventLog& log, const std::filesystem::path& path);
void save_contacts(std::span<const ContactProfile> contacts, const std::filesystem::path& path);

}  // namespace dcm
