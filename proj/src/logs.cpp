#include "dcm/logs.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dcm/errors.hpp"

namespace dcm {

using nlohmann::json;

namespace {

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

Timestamp parse_timestamp_field(const json& j, const char* field, const std::string& path,
                                std::size_t lineno) {
  if (!j.contains(field) || !j.at(field).is_number_integer())
    throw ParseError(path, lineno, std::string(field) + " must be an integer timestamp");
  const Timestamp t = j.at(field).get<Timestamp>();
  if (t < 0) throw ParseError(path, lineno, std::string(field) + " must be non-negative");
  return t;
}

std::string parse_string_field(const json& j, const char* field, const std::string& path,
                               std::size_t lineno) {
  if (!j.contains(field) || !j.at(field).is_string())
    throw ParseError(path, lineno, std::string(field) + " must be a string");
  std::string value = j.at(field).get<std::string>();
  if (value.empty()) throw ParseError(path, lineno, std::string(field) + " must be non-empty");
  return value;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    fn(line, lineno);
  }
}

json parse_json_line(const std::string& line, const std::string& path, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(path, lineno, e.what());
  }
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  return out;
}

}  // namespace

void MessageLog::reindex() {
  by_contact.clear();
  by_message_id.clear();
  by_message_id.reserve(records.size());
  for (std::uint32_t i = 0; i < records.size(); ++i) {
    const MessageRecord& r = records[i];
    if (!by_message_id.emplace(r.message_id, i).second) throw DuplicateMessage(r.message_id);
    by_contact[r.contact_id].push_back(i);
  }
  for (auto& [contact, idx] : by_contact) {
    (void)contact;
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (records[a].sent_at != records[b].sent_at) return records[a].sent_at < records[b].sent_at;
      return records[a].message_id < records[b].message_id;
    });
  }
}

void EventLog::reindex() {
  by_contact.clear();
  for (std::uint32_t i = 0; i < events.size(); ++i) by_contact[events[i].contact_id].push_back(i);
  for (auto& [contact, idx] : by_contact) {
    (void)contact;
    std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      return events[a].occurred_at < events[b].occurred_at;
    });
  }
}

std::vector<BehaviorEvent> EventLog::contact_history(const ContactId& contact) const {
  std::vector<BehaviorEvent> out;
  auto it = by_contact.find(contact);
  if (it == by_contact.end()) return out;
  out.reserve(it->second.size());
  for (std::uint32_t i : it->second) out.push_back(events[i]);
  return out;
}

MessageLog load_messages(const std::filesystem::path& path) {
  MessageLog log;
  for_each_line(path, [&](const std::string& line, std::size_t lineno) {
    const json j = parse_json_line(line, path.string(), lineno);
    MessageRecord r;
    r.message_id = parse_string_field(j, "message_id", path.string(), lineno);
    r.contact_id = parse_string_field(j, "contact_id", path.string(), lineno);
    r.sent_at = parse_timestamp_field(j, "sent_at", path.string(), lineno);
    if (j.contains("treatment")) {
      if (!j.at("treatment").is_object())
        throw ParseError(path.string(), lineno, "treatment must be a flat object");
      for (const auto& [name, label] : j.at("treatment").items()) {
        if (!label.is_string() || label.get<std::string>().empty())
          throw ParseError(path.string(), lineno, "treatment labels must be non-empty strings");
        r.treatment[name] = label.get<std::string>();
      }
    }
    if (j.contains("confidence_score")) {
      if (!j.at("confidence_score").is_number())
        throw ParseError(path.string(), lineno, "confidence_score must be a number");
      r.confidence_score = j.at("confidence_score").get<double>();
      if (r.confidence_score < 0.0 || r.confidence_score > 1.0)
        throw ParseError(path.string(), lineno, "confidence_score must lie in [0, 1]");
    }
    if (j.contains("cluster_key")) {
      r.cluster_key = parse_string_field(j, "cluster_key", path.string(), lineno);
    } else if (!r.treatment.empty()) {
      r.cluster_key = derive_cluster_key(r.treatment);
    } else {
      throw ParseError(path.string(), lineno,
                       "record needs a non-empty treatment or an explicit cluster_key");
    }
    log.records.push_back(std::move(r));
  });
  log.reindex();
  return log;
}

namespace {

EventLog load_events_delimited(const std::filesystem::path& path) {
  EventLog log;
  char delim = ',';
  int col_contact = -1, col_type = -1, col_time = -1;
  bool header_seen = false;
  for_each_line(path, [&](const std::string& line, std::size_t lineno) {
    if (!header_seen) {
      header_seen = true;
      delim = line.find('\t') != std::string::npos ? '\t' : ',';
      const auto cols = split(line, delim);
      for (int i = 0; i < int(cols.size()); ++i) {
        if (cols[i] == "contact_id") col_contact = i;
        if (cols[i] == "event_type") col_type = i;
        if (cols[i] == "occurred_at") col_time = i;
      }
      if (col_contact < 0 || col_type < 0 || col_time < 0)
        throw ParseError(path.string(), lineno,
                         "header must name contact_id, event_type and occurred_at");
      return;
    }
    const auto cols = split(line, delim);
    const int needed = std::max({col_contact, col_type, col_time});
    if (int(cols.size()) <= needed)
      throw ParseError(path.string(), lineno, "row has too few columns");
    BehaviorEvent e;
    e.contact_id = cols[col_contact];
    e.event_type = cols[col_type];
    if (e.contact_id.empty()) throw ParseError(path.string(), lineno, "contact_id must be non-empty");
    if (e.event_type.empty()) throw ParseError(path.string(), lineno, "event_type must be non-empty");
    try {
      std::size_t pos = 0;
      e.occurred_at = std::stoll(cols[col_time], &pos);
      if (pos != cols[col_time].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "occurred_at must be an integer timestamp");
    }
    if (e.occurred_at < 0)
      throw ParseError(path.string(), lineno, "occurred_at must be non-negative");
    log.events.push_back(std::move(e));
  });
  log.reindex();
  return log;
}

}  // namespace

EventLog load_events(const std::filesystem::path& path) {
  // Sniff the first non-blank byte: '{' means JSONL, otherwise delimited.
  {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path.string());
    char c;
    while (in.get(c)) {
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
      if (c != '{') return load_events_delimited(path);
      break;
    }
  }
  EventLog log;
  for_each_line(path, [&](const std::string& line, std::size_t lineno) {
    const json j = parse_json_line(line, path.string(), lineno);
    BehaviorEvent e;
    e.contact_id = parse_string_field(j, "contact_id", path.string(), lineno);
    e.event_type = parse_string_field(j, "event_type", path.string(), lineno);
    e.occurred_at = parse_timestamp_field(j, "occurred_at", path.string(), lineno);
    log.events.push_back(std::move(e));
  });
  log.reindex();
  return log;
}

std::vector<ContactProfile> load_contacts(const std::filesystem::path& path) {
  std::vector<ContactProfile> contacts;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_line(path, [&](const std::string& line, std::size_t lineno) {
    const json j = parse_json_line(line, path.string(), lineno);
    ContactProfile p;
    p.contact_id = parse_string_field(j, "contact_id", path.string(), lineno);
    p.first_seen_at = parse_timestamp_field(j, "first_seen_at", path.string(), lineno);
    if (!seen.emplace(p.contact_id, lineno).second)
      throw ParseError(path.string(), lineno, "duplicate contact profile: " + p.contact_id);
    contacts.push_back(std::move(p));
  });
  return contacts;
}

ValidationReport validate_dataset(const MessageLog& messages, const EventLog& events,
                                  std::span<const ContactProfile> contacts) {
  ValidationReport report;
  report.n_messages = messages.size();
  report.n_events = events.size();
  report.n_profiled_contacts = contacts.size();

  for (const ContactProfile& p : contacts) report.resolved.first_seen[p.contact_id] = p.first_seen_at;

  // Earliest observed activity per referenced contact.
  std::unordered_map<ContactId, Timestamp> earliest;
  auto observe = [&](const ContactId& contact, Timestamp t) {
    auto [it, inserted] = earliest.emplace(contact, t);
    if (!inserted && t < it->second) it->second = t;
  };
  for (const MessageRecord& r : messages.records) observe(r.contact_id, r.sent_at);
  for (const BehaviorEvent& e : events.events) observe(e.contact_id, e.occurred_at);

  for (const auto& [contact, first_activity] : earliest) {
    auto it = report.resolved.first_seen.find(contact);
    if (it == report.resolved.first_seen.end()) {
      report.inferred_profiles.push_back({contact, first_activity});
      report.resolved.first_seen.emplace(contact, first_activity);
    }
  }

  // Profiles stay authoritative even when activity predates them; the
  // inconsistency is only reported.
  auto check_early = [&](const ContactId& contact, Timestamp t, const char* source) {
    auto it = report.resolved.first_seen.find(contact);
    if (it != report.resolved.first_seen.end() && t < it->second)
      report.early_activity.push_back({contact, t, it->second, source});
  };
  for (const BehaviorEvent& e : events.events) check_early(e.contact_id, e.occurred_at, "event");
  for (const MessageRecord& r : messages.records) check_early(r.contact_id, r.sent_at, "message");

  auto order = [](const auto& a, const auto& b) {
    if (a.contact_id != b.contact_id) return a.contact_id < b.contact_id;
    return a.occurred_at < b.occurred_at;
  };
  auto by_contact_id = [](const auto& a, const auto& b) { return a.contact_id < b.contact_id; };
  std::sort(report.inferred_profiles.begin(), report.inferred_profiles.end(), by_contact_id);
  std::sort(report.early_activity.begin(), report.early_activity.end(), order);
  return report;
}

void save_messages(const MessageLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  for (const MessageRecord& r : log.records) {
    json j;
    j["message_id"] = r.message_id;
    j["contact_id"] = r.contact_id;
    j["sent_at"] = r.sent_at;
    j["treatment"] = r.treatment;
    j["confidence_score"] = r.confidence_score;
    j["cluster_key"] = r.cluster_key;
    out << j.dump() << '\n';
  }
}

void save_events(const EventLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  for (const BehaviorEvent& e : log.events) {
    json j;
    j["contact_id"] = e.contact_id;
    j["event_type"] = e.event_type;
    j["occurred_at"] = e.occurred_at;
    out << j.dump() << '\n';
  }
}

void save_contacts(std::span<const ContactProfile> contacts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  for (const ContactProfile& p : contacts) {
    json j;
    j["contact_id"] = p.contact_id;
    j["first_seen_at"] = p.first_seen_at;
    out << j.dump() << '\n';
  }
}

}  // namespace dcm
