#include "dcm/match.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dcm/errors.hpp"
#include "dcm/parallel.hpp"
#include "dcm/rng.hpp"
#include "dcm/stratum_timeline.hpp"

namespace dcm {

using nlohmann::json;

std::string_view no_match_reason_label(NoMatchReason reason) {
  switch (reason) {
    case NoMatchReason::kNoCandidates: return "no_candidates";
    case NoMatchReason::kUnclassifiableStratum: return "unclassifiable_stratum";
  }
  return "no_candidates";
}

std::optional<NoMatchReason> no_match_reason_from_label(std::string_view label) {
  if (label == "no_candidates") return NoMatchReason::kNoCandidates;
  if (label == "unclassifiable_stratum") return NoMatchReason::kUnclassifiableStratum;
  return std::nullopt;
}

namespace {

struct Windows {
  Timestamp w1_lo, w1_hi;  // qualifying window [lo, hi)
  Timestamp x_lo, x_hi;    // exclusion band [lo, hi] closed
};

Windows windows_for(Timestamp t, const RunConfig& config) {
  return Windows{
      t - config.candidate_window_start(),
      t - config.candidate_window_end(),
      t - config.exclusion_window(),
      t + config.exclusion_window(),
  };
}

// Latest-time / smallest-id preference for the representative qualifying
// message of a candidate.
bool better_representative(Timestamp time, const std::string& id, Timestamp best_time,
                           const std::string& best_id) {
  if (time != best_time) return time > best_time;
  return id < best_id;
}

}  // namespace

// ---------------------------------------------------------------------------
// MatchEngine
// ---------------------------------------------------------------------------

struct MatchEngine::Impl {
  const MessageLog& messages;
  const EventLog& events;
  RunConfig config;

  // Dense contact ids, ranked by contact string so integer order equals the
  // canonical (string) order.
  std::vector<const std::string*> contact_names;
  std::unordered_map<std::string_view, std::uint32_t> contact_rank;

  std::vector<std::uint32_t> msg_contact;
  std::vector<std::uint32_t> msg_cluster;

  std::vector<const std::string*> cluster_names;
  std::unordered_map<std::string_view, std::uint32_t> cluster_ids;

  // Flattened per-contact message times, ascending (ties by message id).
  std::vector<std::uint32_t> cmsg_offsets;
  std::vector<Timestamp> cmsg_times;

  // Per-cluster message index, ascending in time.
  struct ClusterIndex {
    std::vector<Timestamp> times;
    std::vector<std::uint32_t> contacts;
    std::vector<std::uint32_t> msg;
  };
  std::vector<ClusterIndex> clusters;

  std::vector<StratumTimeline> timelines;
  std::vector<ActivityStratum> msg_stratum;

  // Per-contact conversion/visit event times, ascending.
  std::vector<std::vector<Timestamp>> conv_times;
  std::vector<std::vector<Timestamp>> visit_times;
  std::vector<Timestamp> first_seen;

  Impl(const MessageLog& messages_in, const EventLog& events_in,
       const ContactDirectory& contacts_in, const RunConfig& config_in)
      : messages(messages_in), events(events_in), config(config_in) {
    config.validate();
    build_contacts(contacts_in);
    build_message_indexes();
    build_event_arrays(contacts_in);
    build_timelines();
    classify_messages();
  }

  std::uint32_t rank_of(const std::string& contact) const {
    auto it = contact_rank.find(contact);
    return it == contact_rank.end() ? UINT32_MAX : it->second;
  }

  void build_contacts(const ContactDirectory&) {
    // Only message senders can be test contacts or control candidates.
    std::vector<const std::string*> names;
    names.reserve(messages.by_contact.size());
    for (const auto& [contact, idx] : messages.by_contact) {
      (void)idx;
      names.push_back(&contact);
    }
    std::sort(names.begin(), names.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    contact_names = std::move(names);
    contact_rank.reserve(contact_names.size());
    for (std::uint32_t i = 0; i < contact_names.size(); ++i)
      contact_rank.emplace(*contact_names[i], i);
  }

  void build_message_indexes() {
    const std::size_t n_msgs = messages.size();
    msg_contact.resize(n_msgs);
    msg_cluster.resize(n_msgs);
    for (std::uint32_t i = 0; i < n_msgs; ++i) {
      const MessageRecord& r = messages.records[i];
      msg_contact[i] = contact_rank.at(r.contact_id);
      auto [it, inserted] = cluster_ids.emplace(r.cluster_key, std::uint32_t(cluster_names.size()));
      if (inserted) cluster_names.push_back(&r.cluster_key);
      msg_cluster[i] = it->second;
    }

    const std::size_t n_contacts = contact_names.size();
    cmsg_offsets.assign(n_contacts + 1, 0);
    for (std::uint32_t c : msg_contact) ++cmsg_offsets[c + 1];
    for (std::size_t c = 0; c < n_contacts; ++c) cmsg_offsets[c + 1] += cmsg_offsets[c];
    cmsg_times.resize(n_msgs);
    {
      std::vector<std::uint32_t> fill(cmsg_offsets.begin(), cmsg_offsets.end() - 1);
      for (const auto& [contact, idx] : messages.by_contact) {
        const std::uint32_t c = contact_rank.at(contact);
        for (std::uint32_t mi : idx) cmsg_times[fill[c]++] = messages.records[mi].sent_at;
      }
    }

    clusters.resize(cluster_names.size());
    {
      std::vector<std::uint32_t> counts(cluster_names.size(), 0);
      for (std::uint32_t k : msg_cluster) ++counts[k];
      for (std::size_t k = 0; k < clusters.size(); ++k) {
        clusters[k].times.reserve(counts[k]);
        clusters[k].contacts.reserve(counts[k]);
        clusters[k].msg.reserve(counts[k]);
      }
    }
    std::vector<std::uint32_t> order(n_msgs);
    for (std::uint32_t i = 0; i < n_msgs; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (messages.records[a].sent_at != messages.records[b].sent_at)
        return messages.records[a].sent_at < messages.records[b].sent_at;
      return messages.records[a].message_id < messages.records[b].message_id;
    });
    for (std::uint32_t mi : order) {
      ClusterIndex& ci = clusters[msg_cluster[mi]];
      ci.times.push_back(messages.records[mi].sent_at);
      ci.contacts.push_back(msg_contact[mi]);
      ci.msg.push_back(mi);
    }
  }

  void build_event_arrays(const ContactDirectory& contacts) {
    const std::size_t n_contacts = contact_names.size();
    conv_times.resize(n_contacts);
    visit_times.resize(n_contacts);
    first_seen.resize(n_contacts);
    for (std::uint32_t c = 0; c < n_contacts; ++c) {
      const std::string& name = *contact_names[c];
      Timestamp earliest_event = std::numeric_limits<Timestamp>::max();
      if (auto it = events.by_contact.find(name); it != events.by_contact.end()) {
        for (std::uint32_t ei : it->second) {  // index is time-sorted
          const BehaviorEvent& e = events.events[ei];
          earliest_event = std::min(earliest_event, e.occurred_at);
          if (e.event_type == config.conversion_event_type) conv_times[c].push_back(e.occurred_at);
          if (e.event_type == config.visit_event_type) visit_times[c].push_back(e.occurred_at);
        }
      }
      if (contacts.contains(name)) {
        first_seen[c] = contacts.first_seen_of(name);
      } else {
        // No profile supplied: fall back to earliest observed activity,
        // matching the ingestion-side inference.
        first_seen[c] = std::min(cmsg_times[cmsg_offsets[c]], earliest_event);
      }
    }
  }

  void build_timelines() {
    Timestamp horizon_end = 0;
    for (const MessageRecord& r : messages.records)
      horizon_end = std::max(horizon_end, r.sent_at);
    horizon_end += 1;
    timelines.resize(contact_names.size());
    for (std::uint32_t c = 0; c < contact_names.size(); ++c)
      timelines[c] =
          build_stratum_timeline(first_seen[c], conv_times[c], visit_times[c], config, horizon_end);
  }

  void classify_messages() {
    msg_stratum.resize(messages.size());
    auto last_at_or_before = [](const std::vector<Timestamp>& v,
                                Timestamp t) -> std::optional<Timestamp> {
      auto it = std::upper_bound(v.begin(), v.end(), t);
      if (it == v.begin()) return std::nullopt;
      return *(it - 1);
    };
    for (std::uint32_t mi = 0; mi < messages.size(); ++mi) {
      const MessageRecord& r = messages.records[mi];
      const std::uint32_t c = msg_contact[mi];
      ActivityStratum s;
      s.is_new = (r.sent_at - first_seen[c]) <= days_to_seconds(config.new_days);
      s.conversion_bucket =
          recency_bucket(last_at_or_before(conv_times[c], r.sent_at), r.sent_at, config);
      s.visit_bucket =
          recency_bucket(last_at_or_before(visit_times[c], r.sent_at), r.sent_at, config);
      s.subcategory = subcategory_for(s.is_new, s.conversion_bucket, s.visit_bucket);
      s.category = category_of(s.subcategory);
      msg_stratum[mi] = s;
    }
  }

  std::uint32_t message_index(const MessageRecord& test) const {
    auto it = messages.by_message_id.find(test.message_id);
    if (it == messages.by_message_id.end()) throw UnknownMessage(test.message_id);
    const MessageRecord& r = messages.records[it->second];
    if (r.contact_id != test.contact_id || r.sent_at != test.sent_at ||
        r.cluster_key != test.cluster_key)
      throw UnknownMessage(test.message_id);
    return it->second;
  }

  std::span<const Timestamp> contact_times(std::uint32_t c) const {
    return {cmsg_times.data() + cmsg_offsets[c], cmsg_times.data() + cmsg_offsets[c + 1]};
  }

  bool has_message_in_closed(std::uint32_t c, Timestamp lo, Timestamp hi) const {
    const auto times = contact_times(c);
    auto it = std::lower_bound(times.begin(), times.end(), lo);
    return it != times.end() && *it <= hi;
  }

  CandidateSet candidates(const MessageRecord& test) const;
  MatchLedger run(std::uint64_t seed, int threads) const;
};

CandidateSet MatchEngine::Impl::candidates(const MessageRecord& test) const {
  const std::uint32_t mi = message_index(test);
  const MessageRecord& record = messages.records[mi];
  const Timestamp t = record.sent_at;
  const Windows w = windows_for(t, config);

  CandidateSet out;
  out.test_message_id = record.message_id;
  out.test_contact_id = record.contact_id;
  out.test_sent_at = t;
  out.cluster_key = record.cluster_key;
  out.test_stratum = msg_stratum[mi];

  const std::uint32_t self = msg_contact[mi];
  const std::uint32_t k = msg_cluster[mi];
  const ClusterIndex& ci = clusters[k];

  struct Rep {
    Timestamp time;
    std::uint32_t msg;
  };
  std::unordered_map<std::uint32_t, Rep> qualifying;
  const auto lo = std::lower_bound(ci.times.begin(), ci.times.end(), w.w1_lo) - ci.times.begin();
  const auto hi = std::lower_bound(ci.times.begin(), ci.times.end(), w.w1_hi) - ci.times.begin();
  for (auto i = lo; i < hi; ++i) {
    const std::uint32_t c = ci.contacts[i];
    if (c == self) continue;
    auto [it, inserted] = qualifying.emplace(c, Rep{ci.times[i], ci.msg[i]});
    if (!inserted &&
        better_representative(ci.times[i], messages.records[ci.msg[i]].message_id, it->second.time,
                              messages.records[it->second.msg].message_id))
      it->second = Rep{ci.times[i], ci.msg[i]};
  }

  std::vector<std::pair<std::uint32_t, Rep>> ordered(qualifying.begin(), qualifying.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  out.trace.qualifying_contacts = ordered.size();
  const Subcategory target = out.test_stratum.subcategory;
  for (const auto& [c, rep] : ordered) {
    if (has_message_in_closed(c, w.x_lo, w.x_hi)) {
      ++out.trace.eliminated_exclusion;
      continue;
    }
    const Subcategory sc = timelines[c].at(t);
    if (sc != target || sc == Subcategory::kUnclassifiable ||
        target == Subcategory::kUnclassifiable) {
      ++out.trace.eliminated_stratum;
      continue;
    }
    out.candidates.push_back({*contact_names[c], messages.records[rep.msg].message_id});
  }
  return out;
}

namespace {

// Reused per worker; sized lazily against the engine at hand.
struct Workspace {
  std::vector<std::uint32_t> stamp;
  std::vector<std::uint32_t> slot;
  std::uint32_t epoch = 0;

  struct Entry {
    std::uint32_t contact;
    std::uint32_t qual_beg, qual_end;
    std::uint32_t excl_beg, excl_end;
    std::uint32_t seg_lo, seg_hi;
  };
  std::vector<Entry> entries;
  std::vector<Timestamp> qual_times;
  std::vector<std::uint32_t> fill;
  std::vector<std::uint32_t> survivors;

  void begin_group(std::size_t n_contacts) {
    if (stamp.size() < n_contacts) {
      stamp.assign(n_contacts, 0);
      slot.assign(n_contacts, 0);
      epoch = 0;
    }
    if (++epoch == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      epoch = 1;
    }
    entries.clear();
    qual_times.clear();
  }
};

thread_local Workspace tl_workspace;

}  // namespace

MatchLedger MatchEngine::Impl::run(std::uint64_t seed, int threads) const {
  const std::size_t n_msgs = messages.size();

  // Group test messages by (cluster, send day); every group shares one
  // candidate prefetch.
  std::unordered_map<std::uint64_t, std::uint32_t> group_of;
  std::vector<std::vector<std::uint32_t>> group_messages;
  for (std::uint32_t mi = 0; mi < n_msgs; ++mi) {
    const std::uint64_t key =
        (std::uint64_t(msg_cluster[mi]) << 32) | std::uint64_t(messages.records[mi].sent_at / kSecondsPerDay);
    auto [it, inserted] = group_of.emplace(key, std::uint32_t(group_messages.size()));
    if (inserted) group_messages.emplace_back();
    group_messages[it->second].push_back(mi);
  }

  struct Slot {
    std::uint32_t control = UINT32_MAX;      // dense contact, or UINT32_MAX
    NoMatchReason reason = NoMatchReason::kNoCandidates;
  };
  std::vector<Slot> slots(n_msgs);

  const Timestamp start_w = config.candidate_window_start();
  const Timestamp end_w = config.candidate_window_end();
  const Timestamp excl_w = config.exclusion_window();

  parallel_for(group_messages.size(), threads, [&](std::size_t g) {
    const std::vector<std::uint32_t>& group = group_messages[g];
    const std::uint32_t k = msg_cluster[group.front()];
    const Timestamp day = messages.records[group.front()].sent_at / kSecondsPerDay;
    const Timestamp day_start = day * kSecondsPerDay;
    const Timestamp day_end = day_start + kSecondsPerDay;  // exclusive

    Workspace& ws = tl_workspace;
    ws.begin_group(contact_names.size());

    // Widest ranges any message in this day can query.
    const Timestamp qual_fetch_lo = day_start - start_w;
    const Timestamp qual_fetch_hi = day_end - end_w;
    const Timestamp excl_fetch_lo = day_start - excl_w;
    const Timestamp excl_fetch_hi = day_end + excl_w;  // inclusive band end + day slack

    const ClusterIndex& ci = clusters[k];
    const std::size_t scan_lo =
        std::lower_bound(ci.times.begin(), ci.times.end(), qual_fetch_lo) - ci.times.begin();
    const std::size_t scan_hi =
        std::lower_bound(ci.times.begin(), ci.times.end(), qual_fetch_hi) - ci.times.begin();

    // Pass 1: register candidate contacts and count their window messages.
    for (std::size_t i = scan_lo; i < scan_hi; ++i) {
      const std::uint32_t c = ci.contacts[i];
      if (ws.stamp[c] != ws.epoch) {
        ws.stamp[c] = ws.epoch;
        ws.slot[c] = std::uint32_t(ws.entries.size());
        ws.entries.push_back({c, 0, 0, 0, 0, 0, 0});
      }
      ++ws.entries[ws.slot[c]].qual_end;  // reuse as count
    }
    // Prefix sums into [qual_beg, qual_end) ranges.
    std::uint32_t offset = 0;
    for (auto& e : ws.entries) {
      const std::uint32_t count = e.qual_end;
      e.qual_beg = offset;
      offset += count;
      e.qual_end = offset;
    }
    ws.qual_times.resize(offset);
    ws.fill.assign(ws.entries.size(), 0);
    // Pass 2: fill times; the scan is time-ascending, so each slice is too.
    for (std::size_t i = scan_lo; i < scan_hi; ++i) {
      const std::uint32_t s = ws.slot[ci.contacts[i]];
      ws.qual_times[ws.entries[s].qual_beg + ws.fill[s]++] = ci.times[i];
    }

    // Exclusion slices and the day's stratum segments, once per candidate.
    for (auto& e : ws.entries) {
      const auto times = contact_times(e.contact);
      e.excl_beg = std::uint32_t(
          std::lower_bound(times.begin(), times.end(), excl_fetch_lo) - times.begin());
      e.excl_end = std::uint32_t(
          std::upper_bound(times.begin(), times.end(), excl_fetch_hi) - times.begin());
      e.excl_beg += cmsg_offsets[e.contact];
      e.excl_end += cmsg_offsets[e.contact];
      const StratumTimeline& tl = timelines[e.contact];
      e.seg_lo = std::uint32_t(tl.segment_index(day_start));
      e.seg_hi = std::uint32_t(tl.segment_index(day_end - 1));
    }

    // Canonical candidate order: dense rank == contact string order.
    std::sort(ws.entries.begin(), ws.entries.end(),
              [](const Workspace::Entry& a, const Workspace::Entry& b) {
                return a.contact < b.contact;
              });

    for (const std::uint32_t mi : group) {
      const MessageRecord& record = messages.records[mi];
      const ActivityStratum& stratum = msg_stratum[mi];
      Slot& slot = slots[mi];
      if (stratum.unclassifiable()) {
        slot.reason = NoMatchReason::kUnclassifiableStratum;
        continue;
      }
      const Timestamp t = record.sent_at;
      const Windows w = windows_for(t, config);
      const std::uint32_t self = msg_contact[mi];
      const Subcategory target = stratum.subcategory;

      ws.survivors.clear();
      for (const auto& e : ws.entries) {
        if (e.contact == self) continue;
        // W1 ^ C: any prefetched cluster message inside the exact window.
        bool qualifies = false;
        for (std::uint32_t qi = e.qual_beg; qi < e.qual_end; ++qi) {
          const Timestamp mt = ws.qual_times[qi];
          if (mt >= w.w1_hi) break;
          if (mt >= w.w1_lo) {
            qualifies = true;
            break;
          }
        }
        if (!qualifies) continue;
        // W2: closed exclusion band.
        bool excluded = false;
        for (std::uint32_t xi = e.excl_beg; xi < e.excl_end; ++xi) {
          const Timestamp mt = cmsg_times[xi];
          if (mt > w.x_hi) break;
          if (mt >= w.x_lo) {
            excluded = true;
            break;
          }
        }
        if (excluded) continue;
        // S: stratum at the send time.
        const StratumTimeline& tl = timelines[e.contact];
        std::uint32_t seg = e.seg_lo;
        while (seg < e.seg_hi && tl.starts()[seg + 1] <= t) ++seg;
        if (tl.labels()[seg] != target) continue;
        ws.survivors.push_back(e.contact);
      }

      if (ws.survivors.empty()) {
        slot.reason = NoMatchReason::kNoCandidates;
        continue;
      }
      Rng rng = derive_rng(seed, record.message_id);
      slot.control = ws.survivors[rng.bounded(ws.survivors.size())];
    }
  });

  MatchLedger ledger;
  ledger.config = config;
  ledger.seed = seed;
  ledger.assignments.reserve(n_msgs);
  for (std::uint32_t mi = 0; mi < n_msgs; ++mi) {
    const MessageRecord& record = messages.records[mi];
    const Slot& slot = slots[mi];
    if (slot.control != UINT32_MAX) {
      ledger.assignments.push_back({record.message_id, *contact_names[slot.control],
                                    record.sent_at, msg_stratum[mi], record.cluster_key});
    } else {
      ledger.unmatched.push_back({record.message_id, slot.reason, msg_stratum[mi]});
    }
  }
  return ledger;
}

MatchEngine::MatchEngine(const MessageLog& messages, const EventLog& events,
                         const ContactDirectory& contacts, const RunConfig& config)
    : impl_(std::make_unique<Impl>(messages, events, contacts, config)) {}

MatchEngine::~MatchEngine() = default;

CandidateSet MatchEngine::candidates(const MessageRecord& test) const {
  return impl_->candidates(test);
}

MatchLedger MatchEngine::run(std::uint64_t seed, int threads) const {
  return impl_->run(seed, threads);
}

CandidateSet find_candidates(const MessageRecord& test, const MessageLog& messages,
                             const EventLog& events, const ContactDirectory& contacts,
                             const RunConfig& config) {
  MatchEngine engine(messages, events, contacts, config);
  return engine.candidates(test);
}

MatchLedger match_all(const MessageLog& messages, const EventLog& events,
                      const ContactDirectory& contacts, const RunConfig& config,
                      std::uint64_t seed, int threads) {
  MatchEngine engine(messages, events, contacts, config);
  return engine.run(seed, threads);
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

namespace {

ContactProfile profile_for(const ContactId& contact, const ContactDirectory& contacts,
                           const MessageLog& messages, const EventLog& events) {
  ContactProfile p;
  p.contact_id = contact;
  if (contacts.contains(contact)) {
    p.first_seen_at = contacts.first_seen_of(contact);
    return p;
  }
  Timestamp earliest = std::numeric_limits<Timestamp>::max();
  if (auto it = messages.by_contact.find(contact); it != messages.by_contact.end())
    for (std::uint32_t mi : it->second)
      earliest = std::min(earliest, messages.records[mi].sent_at);
  if (auto it = events.by_contact.find(contact); it != events.by_contact.end())
    for (std::uint32_t ei : it->second)
      earliest = std::min(earliest, events.events[ei].occurred_at);
  p.first_seen_at = earliest == std::numeric_limits<Timestamp>::max() ? 0 : earliest;
  return p;
}

ActivityStratum classify_at(const ContactId& contact, Timestamp t, const MessageLog& messages,
                            const EventLog& events, const ContactDirectory& contacts,
                            const RunConfig& config) {
  const ContactProfile profile = profile_for(contact, contacts, messages, events);
  const std::vector<BehaviorEvent> history = events.contact_history(contact);
  return classify_contact(profile, history, t, config);
}

}  // namespace

CandidateSet brute_force_candidates(const MessageRecord& test, const MessageLog& messages,
                                    const EventLog& events, const ContactDirectory& contacts,
                                    const RunConfig& config) {
  config.validate();
  auto it = messages.by_message_id.find(test.message_id);
  if (it == messages.by_message_id.end()) throw UnknownMessage(test.message_id);
  const MessageRecord& record = messages.records[it->second];
  if (record.contact_id != test.contact_id || record.sent_at != test.sent_at ||
      record.cluster_key != test.cluster_key)
    throw UnknownMessage(test.message_id);

  const Timestamp t = record.sent_at;
  const Windows w = windows_for(t, config);

  CandidateSet out;
  out.test_message_id = record.message_id;
  out.test_contact_id = record.contact_id;
  out.test_sent_at = t;
  out.cluster_key = record.cluster_key;
  out.test_stratum = classify_at(record.contact_id, t, messages, events, contacts, config);
  const Subcategory target = out.test_stratum.subcategory;

  for (const auto& [contact, indices] : messages.by_contact) {
    if (contact == record.contact_id) continue;

    // Any message with the test's cluster inside the qualifying window.
    const MessageRecord* representative = nullptr;
    bool excluded = false;
    for (std::uint32_t mi : indices) {
      const MessageRecord& m = messages.records[mi];
      if (m.sent_at >= w.w1_lo && m.sent_at < w.w1_hi && m.cluster_key == record.cluster_key) {
        if (representative == nullptr ||
            better_representative(m.sent_at, m.message_id, representative->sent_at,
                                  representative->message_id))
          representative = &m;
      }
      if (m.sent_at >= w.x_lo && m.sent_at <= w.x_hi) excluded = true;
    }
    if (representative == nullptr) continue;
    ++out.trace.qualifying_contacts;
    if (excluded) {
      ++out.trace.eliminated_exclusion;
      continue;
    }
    const ActivityStratum stratum = classify_at(contact, t, messages, events, contacts, config);
    if (stratum.subcategory != target || stratum.unclassifiable() ||
        out.test_stratum.unclassifiable()) {
      ++out.trace.eliminated_stratum;
      continue;
    }
    out.candidates.push_back({contact, representative->message_id});
  }

  std::sort(out.candidates.begin(), out.candidates.end(),
            [](const CandidateSet::Candidate& a, const CandidateSet::Candidate& b) {
              return a.contact_id < b.contact_id;
            });
  return out;
}

std::optional<ControlAssignment> select_control(const CandidateSet& candidates,
                                                std::uint64_t global_seed) {
  if (candidates.candidates.empty()) return std::nullopt;
  Rng rng = derive_rng(global_seed, candidates.test_message_id);
  const std::size_t pick = rng.bounded(candidates.candidates.size());
  ControlAssignment assignment;
  assignment.test_message_id = candidates.test_message_id;
  assignment.control_contact_id = candidates.candidates[pick].contact_id;
  assignment.virtual_sent_at = candidates.test_sent_at;
  assignment.stratum = candidates.test_stratum;
  assignment.cluster_key = candidates.cluster_key;
  return assignment;
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

AuditResult audit_ledger(const MatchLedger& ledger, const MessageLog& messages,
                         const EventLog& events, const ContactDirectory& contacts,
                         const RunConfig& config) {
  AuditResult result;
  auto violation = [&](const std::string& message_id, const std::string& what) {
    result.violations.push_back(message_id + ": " + what);
  };

  std::unordered_map<std::string, int> seen;
  for (const ControlAssignment& a : ledger.assignments) ++seen[a.test_message_id];
  for (const UnmatchedMessage& u : ledger.unmatched) ++seen[u.test_message_id];
  if (seen.size() != messages.size() ||
      ledger.assignments.size() + ledger.unmatched.size() != messages.size())
    result.violations.push_back("ledger does not partition the test message set");
  for (const auto& [id, count] : seen)
    if (count != 1) violation(id, "appears " + std::to_string(count) + " times");

  for (const ControlAssignment& a : ledger.assignments) {
    ++result.assignments_checked;
    const MessageRecord* test = messages.find(a.test_message_id);
    if (test == nullptr) {
      violation(a.test_message_id, "unknown test message");
      continue;
    }
    if (a.control_contact_id == test->contact_id)
      violation(a.test_message_id, "control contact equals test contact");
    if (a.virtual_sent_at != test->sent_at)
      violation(a.test_message_id, "virtual send time differs from the test send time");
    const Windows w = windows_for(test->sent_at, config);

    bool qualifying = false;
    bool excluded = false;
    if (auto it = messages.by_contact.find(a.control_contact_id); it != messages.by_contact.end()) {
      for (std::uint32_t mi : it->second) {
        const MessageRecord& m = messages.records[mi];
        if (m.sent_at >= w.w1_lo && m.sent_at < w.w1_hi && m.cluster_key == test->cluster_key)
          qualifying = true;
        if (m.sent_at >= w.x_lo && m.sent_at <= w.x_hi) excluded = true;
      }
    }
    if (!qualifying) violation(a.test_message_id, "control lacks a qualifying message (W1/C)");
    if (excluded) violation(a.test_message_id, "control was messaged inside the exclusion band (W2)");

    const ActivityStratum test_stratum =
        classify_at(test->contact_id, test->sent_at, messages, events, contacts, config);
    const ActivityStratum control_stratum =
        classify_at(a.control_contact_id, test->sent_at, messages, events, contacts, config);
    if (test_stratum.unclassifiable() || control_stratum.unclassifiable() ||
        !same_stratum(test_stratum, control_stratum))
      violation(a.test_message_id, "stratum mismatch (S)");
    if (a.stratum.subcategory != test_stratum.subcategory)
      violation(a.test_message_id, "recorded stratum differs from recomputed stratum");
  }

  for (const UnmatchedMessage& u : ledger.unmatched)
    if (messages.find(u.test_message_id) == nullptr)
      violation(u.test_message_id, "unknown unmatched message");

  return result;
}

// ---------------------------------------------------------------------------
// Ledger persistence
// ---------------------------------------------------------------------------

void save_ledger(const MatchLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  json meta;
  meta["kind"] = "meta";
  meta["seed"] = ledger.seed;
  meta["config"] = json::parse(run_config_to_json_text(ledger.config));
  out << meta.dump() << '\n';
  for (const ControlAssignment& a : ledger.assignments) {
    json j;
    j["kind"] = "assignment";
    j["test_message_id"] = a.test_message_id;
    j["control_contact_id"] = a.control_contact_id;
    j["virtual_sent_at"] = a.virtual_sent_at;
    j["category"] = category_label(a.stratum.category);
    j["subcategory"] = subcategory_label(a.stratum.subcategory);
    j["cluster_key"] = a.cluster_key;
    out << j.dump() << '\n';
  }
  for (const UnmatchedMessage& u : ledger.unmatched) {
    json j;
    j["kind"] = "unmatched";
    j["test_message_id"] = u.test_message_id;
    j["reason"] = no_match_reason_label(u.reason);
    j["category"] = category_label(u.stratum.category);
    j["subcategory"] = subcategory_label(u.stratum.subcategory);
    out << j.dump() << '\n';
  }
}

MatchLedger load_ledger(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path.string());
  MatchLedger ledger;
  std::string line;
  std::size_t lineno = 0;
  bool meta_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
    const std::string kind = j.value("kind", "");
    if (kind == "meta") {
      ledger.seed = j.at("seed").get<std::uint64_t>();
      ledger.config = run_config_from_snapshot(j.at("config").dump());
      meta_seen = true;
    } else if (kind == "assignment") {
      ControlAssignment a;
      a.test_message_id = j.at("test_message_id").get<std::string>();
      a.control_contact_id = j.at("control_contact_id").get<std::string>();
      a.virtual_sent_at = j.at("virtual_sent_at").get<Timestamp>();
      const auto sub = subcategory_from_label(j.at("subcategory").get<std::string>());
      if (!sub) throw ParseError(path.string(), lineno, "unknown subcategory label");
      a.stratum.subcategory = *sub;
      a.stratum.category = category_of(*sub);
      a.cluster_key = j.at("cluster_key").get<std::string>();
      ledger.assignments.push_back(std::move(a));
    } else if (kind == "unmatched") {
      UnmatchedMessage u;
      u.test_message_id = j.at("test_message_id").get<std::string>();
      const auto reason = no_match_reason_from_label(j.at("reason").get<std::string>());
      if (!reason) throw ParseError(path.string(), lineno, "unknown no-match reason");
      u.reason = *reason;
      const auto sub = subcategory_from_label(j.at("subcategory").get<std::string>());
      if (!sub) throw ParseError(path.string(), lineno, "unknown subcategory label");
      u.stratum.subcategory = *sub;
      u.stratum.category = category_of(*sub);
      ledger.unmatched.push_back(std::move(u));
    } else {
      throw ParseError(path.string(), lineno, "unknown ledger record kind");
    }
  }
  if (!meta_seen) throw ParseError(path.string(), 1, "ledger is missing its meta line");
  return ledger;
}

}  // namespace dcm
