#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dcm/config.hpp"
#include "dcm/core.hpp"
#include "dcm/logs.hpp"
#include "dcm/strata.hpp"

namespace dcm {

// All control candidates for one test message. A contact qualifies iff it
//   (W1) holds a message in [t - start, t - end) days before the test send,
//   (W2) holds no message inside the closed exclusion band [t - x, t + x],
//   (C)  some W1-window message shares the test message's cluster key,
//   (S)  classifies into the test contact's stratum at the send time,
// and is not the test contact itself.
struct CandidateSet {
  std::string test_message_id;
  ContactId test_contact_id;
  Timestamp test_sent_at = 0;
  ClusterKey cluster_key;
  ActivityStratum test_stratum;

  struct Candidate {
    ContactId contact_id;
    // Latest same-cluster message inside the pre-window; ties broken by the
    // lexicographically smallest message id.
    std::string qualifying_message_id;

    friend bool operator==(const Candidate&, const Candidate&) = default;
  };
  std::vector<Candidate> candidates;  // ascending contact_id (canonical order)

  // Funnel over contacts that hold a qualifying (W1 ^ C) message, checked in
  // the order W2 then S. The test contact itself is never counted.
  struct ConstraintTrace {
    std::size_t qualifying_contacts = 0;
    std::size_t eliminated_exclusion = 0;
    std::size_t eliminated_stratum = 0;

    friend bool operator==(const ConstraintTrace&, const ConstraintTrace&) = default;
  } trace;
};

enum class NoMatchReason { kNoCandidates, kUnclassifiableStratum };

std::string_view no_match_reason_label(NoMatchReason reason);
std::optional<NoMatchReason> no_match_reason_from_label(std::string_view label);

// A logged synthetic control message: never sent, pinned to the test send
// time for outcome comparison.
struct ControlAssignment {
  std::string test_message_id;
  ContactId control_contact_id;
  Timestamp virtual_sent_at = 0;
  ActivityStratum stratum;  // shared by both members of the pair
  ClusterKey cluster_key;
};

struct UnmatchedMessage {
  std::string test_message_id;
  NoMatchReason reason = NoMatchReason::kNoCandidates;
  ActivityStratum stratum;  // test contact's stratum at send
};

// Assignments and unmatched entries partition the test message set.
struct MatchLedger {
  std::vector<ControlAssignment> assignments;
  std::vector<UnmatchedMessage> unmatched;
  RunConfig config;
  std::uint64_t seed = 0;
};

// Indexed matcher. Construction interns contacts (dense ids ranked by
// contact id string), builds per-contact message time arrays, a per-cluster
// time-sorted message index and per-contact stratum timelines.
class MatchEngine {
 public:
  MatchEngine(const MessageLog& messages, const EventLog& events,
              const ContactDirectory& contacts, const RunConfig& config);
  ~MatchEngine();

  MatchEngine(const MatchEngine&) = delete;
  MatchEngine& operator=(const MatchEngine&) = delete;

  // Exact candidate set for one test message (must be in the log).
  CandidateSet candidates(const MessageRecord& test) const;

  // Matches every message; deterministic for a fixed seed no matter how
  // many workers run. threads <= 0 means hardware concurrency.
  MatchLedger run(std::uint64_t seed, int threads = 0) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrappers. find_candidates builds the index on every
// call; batch callers should hold a MatchEngine.
CandidateSet find_candidates(const MessageRecord& test, const MessageLog& messages,
                             const EventLog& events, const ContactDirectory& contacts,
                             const RunConfig& config);

// Reference oracle: same contract as find_candidates, pure scans, no
// indexes. Intended for small inputs.
CandidateSet brute_force_candidates(const MessageRecord& test, const MessageLog& messages,
                                    const EventLog& events, const ContactDirectory& contacts,
                                    const RunConfig& config);

// Uniform choice over the canonically ordered candidates, driven by a
// generator derived from (global seed, test message id). Empty set => nullopt.
std::optional<ControlAssignment> select_control(const CandidateSet& candidates,
                                                std::uint64_t global_seed);

MatchLedger match_all(const MessageLog& messages, const EventLog& events,
                      const ContactDirectory& contacts, const RunConfig& config,
                      std::uint64_t seed, int threads = 0);

// Post-hoc re-check of every emitted assignment against W1/W2/C/S using
// plain scans; independent of the engine's index structures.
struct AuditResult {
  std::size_t assignments_checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};
AuditResult audit_ledger(const MatchLedger& ledger, const MessageLog& messages,
                         const EventLog& events, const ContactDirectory& contacts,
                         const RunConfig& config);

// JSONL persistence: one meta line (config snapshot + seed), then one line
// per assignment / unmatched entry in ledger order.
void save_ledger(const MatchLedger& ledger, const std::filesystem::path& path);
MatchLedger load_ledger(const std::filesystem::path& path);

}  // namespace dcm
