#include "dcm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "dcm/errors.hpp"
#include "dcm/parallel.hpp"

namespace dcm {

void SuccessSpec::validate() const {
  if (event_type.empty()) throw ConfigError("success spec needs an event type");
  if (monitoring_hours <= 0) throw ConfigError("monitoring_hours must be positive");
  double prev = 0.0;
  for (const auto& [hours, weight] : weight_table) {
    if (hours <= prev) throw ConfigError("weight_table hours must be strictly increasing");
    if (weight < 0.0 || weight > 1.0) throw ConfigError("weights must lie in [0, 1]");
    prev = hours;
  }
}

SuccessSpec success_spec_for(const std::string& event_type, const RunConfig& config) {
  SuccessSpec spec;
  spec.event_type = event_type;
  spec.monitoring_hours = config.monitoring_hours;
  spec.weight_table = config.reward_weights;
  spec.validate();
  return spec;
}

namespace {

double weight_for_delay(const SuccessSpec& spec, double hours_since) {
  if (spec.weight_table.empty()) return 1.0;
  for (const auto& [max_hours, weight] : spec.weight_table)
    if (hours_since <= max_hours) return weight;
  return 0.0;  // past the last step
}

double count_in_window(std::span<const Timestamp> times, Timestamp anchor, const SuccessSpec& spec) {
  const Timestamp window_end = anchor + Timestamp(spec.monitoring_hours) * kSecondsPerHour;
  auto lo = std::lower_bound(times.begin(), times.end(), anchor);
  double total = 0.0;
  for (auto it = lo; it != times.end() && *it < window_end; ++it) {
    if (spec.weight_table.empty()) {
      total += 1.0;
    } else {
      total += weight_for_delay(spec, double(*it - anchor) / double(kSecondsPerHour));
    }
  }
  return total;
}

// Per-contact sorted times of one event type; built once per bulk pass.
class TypeIndex {
 public:
  TypeIndex(const EventLog& events, const std::string& event_type) {
    for (const BehaviorEvent& e : events.events)
      if (e.event_type == event_type) times_[e.contact_id].push_back(e.occurred_at);
    for (auto& [contact, v] : times_) {
      (void)contact;
      std::sort(v.begin(), v.end());
    }
  }

  std::span<const Timestamp> of(const ContactId& contact) const {
    auto it = times_.find(contact);
    if (it == times_.end()) return {};
    return it->second;
  }

 private:
  std::unordered_map<ContactId, std::vector<Timestamp>> times_;
};

}  // namespace

double success_count(const ContactId& contact, Timestamp anchor, const SuccessSpec& spec,
                     const EventLog& events) {
  spec.validate();
  std::vector<Timestamp> times;
  if (auto it = events.by_contact.find(contact); it != events.by_contact.end()) {
    for (std::uint32_t ei : it->second)
      if (events.events[ei].event_type == spec.event_type)
        times.push_back(events.events[ei].occurred_at);
  }
  return count_in_window(times, anchor, spec);
}

std::vector<Bin> bin_assignments(std::span<const std::uint32_t> assignment_idx,
                                 const MatchLedger& ledger, const MessageLog& messages,
                                 int bin_size) {
  if (bin_size < 1) throw ContractViolation("bin_size must be >= 1");
  if (assignment_idx.empty()) throw EmptyLedger();

  struct Keyed {
    double score;
    const std::string* message_id;
    std::uint32_t idx;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(assignment_idx.size());
  for (std::uint32_t ai : assignment_idx) {
    const ControlAssignment& a = ledger.assignments[ai];
    const MessageRecord* r = messages.find(a.test_message_id);
    if (r == nullptr) throw UnknownMessage(a.test_message_id);
    keyed.push_back({r->confidence_score, &r->message_id, ai});
  }
  // Ties break on message id so the chunking is stable across runs.
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.score != b.score) return a.score < b.score;
    return *a.message_id < *b.message_id;
  });

  std::vector<Bin> bins;
  bins.reserve(keyed.size() / std::size_t(bin_size) + 1);
  for (std::size_t start = 0; start < keyed.size(); start += std::size_t(bin_size)) {
    const std::size_t end = std::min(keyed.size(), start + std::size_t(bin_size));
    Bin bin;
    bin.index = int(bins.size());
    bin.capacity = bin_size;
    bin.n_test = int(end - start);
    bin.score_min = keyed[start].score;
    bin.score_max = keyed[end - 1].score;
    double score_sum = 0.0;
    bin.assignment_idx.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) {
      bin.assignment_idx.push_back(keyed[i].idx);
      score_sum += keyed[i].score;
    }
    bin.mean_score = score_sum / double(bin.n_test);
    bins.push_back(std::move(bin));
  }
  return bins;
}

std::vector<Bin> bin_messages(const MatchLedger& ledger, const MessageLog& messages, int bin_size) {
  std::vector<std::uint32_t> all(ledger.assignments.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  return bin_assignments(all, ledger, messages, bin_size);
}

void accumulate_successes(std::vector<Bin>& bins, const MatchLedger& ledger,
                          const MessageLog& messages, const EventLog& events,
                          const SuccessSpec& spec, int threads) {
  spec.validate();
  const TypeIndex index(events, spec.event_type);

  for (Bin& bin : bins) {
    std::vector<double> test_counts(bin.assignment_idx.size());
    std::vector<double> control_counts(bin.assignment_idx.size());
    parallel_for(bin.assignment_idx.size(), threads, [&](std::size_t i) {
      const ControlAssignment& a = ledger.assignments[bin.assignment_idx[i]];
      const MessageRecord* test = messages.find(a.test_message_id);
      test_counts[i] = count_in_window(index.of(test->contact_id), test->sent_at, spec);
      control_counts[i] = count_in_window(index.of(a.control_contact_id), a.virtual_sent_at, spec);
    });
    double test_sum = 0.0, control_sum = 0.0;
    for (double v : test_counts) test_sum += v;
    for (double v : control_counts) control_sum += v;
    bin.test_success_sum[spec.event_type] = test_sum;
    bin.control_success_sum[spec.event_type] = control_sum;
  }
}

double shrink_partial(double raw_metric, int n, int bin_size) {
  if (bin_size < 1) throw ContractViolation("bin_size must be >= 1");
  if (n < 0 || n > bin_size) throw ContractViolation("bin count must lie in [0, bin_size]");
  return raw_metric * (double(n) / double(bin_size));
}

BinCurve bin_curve(const std::vector<Bin>& bins, const std::string& event_type,
                   int smoothing_window) {
  if (smoothing_window < 1) throw ContractViolation("smoothing_window must be >= 1");
  BinCurve curve;
  curve.event_type = event_type;
  curve.points.reserve(bins.size());
  for (const Bin& bin : bins) {
    BinCurvePoint p;
    p.bin_index = bin.index;
    p.mean_score = bin.mean_score;
    p.n_test = bin.n_test;
    auto test_it = bin.test_success_sum.find(event_type);
    auto control_it = bin.control_success_sum.find(event_type);
    if (test_it == bin.test_success_sum.end() || control_it == bin.control_success_sum.end())
      throw ContractViolation("bins lack success sums for event type: " + event_type);
    p.test_success_sum = test_it->second;
    p.control_success_sum = control_it->second;
    const double n = double(bin.n_test);
    p.test_metric = shrink_partial(p.test_success_sum / n, bin.n_test, bin.capacity);
    p.control_metric = shrink_partial(p.control_success_sum / n, bin.n_test, bin.capacity);
    curve.points.push_back(p);
  }
  // Centered moving average, edges truncated.
  const int half = (smoothing_window - 1) / 2;
  const int n_points = int(curve.points.size());
  for (int i = 0; i < n_points; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n_points - 1, i + half);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += curve.points[j].test_metric;
    curve.points[i].smoothed_test_metric = sum / double(hi - lo + 1);
  }
  return curve;
}

QualityTable match_quality(const MatchLedger& ledger, const MessageLog& messages, int period_days) {
  if (period_days < 1) throw ContractViolation("period_days must be >= 1");

  // Anchor the trailing window at the newest test message the ledger covers.
  Timestamp window_end = std::numeric_limits<Timestamp>::min();
  auto observe = [&](const std::string& message_id) {
    const MessageRecord* r = messages.find(message_id);
    if (r == nullptr) throw UnknownMessage(message_id);
    window_end = std::max(window_end, r->sent_at);
  };
  for (const ControlAssignment& a : ledger.assignments) observe(a.test_message_id);
  for (const UnmatchedMessage& u : ledger.unmatched) observe(u.test_message_id);
  QualityTable table;
  if (ledger.assignments.empty() && ledger.unmatched.empty()) return table;
  table.window_end = window_end;
  table.window_start = window_end - days_to_seconds(period_days);

  struct Tally {
    std::int64_t test_messages = 0;
    std::int64_t control_messages = 0;
    std::unordered_set<ContactId> test_contacts;
    std::unordered_set<ContactId> control_contacts;
  };
  std::array<Tally, kSubcategoryCount> tallies;

  auto in_window = [&](Timestamp t) { return t > table.window_start && t <= table.window_end; };
  for (const ControlAssignment& a : ledger.assignments) {
    const MessageRecord* r = messages.find(a.test_message_id);
    if (!in_window(r->sent_at)) continue;
    Tally& tally = tallies[int(a.stratum.subcategory)];
    ++tally.test_messages;
    ++tally.control_messages;
    tally.test_contacts.insert(r->contact_id);
    tally.control_contacts.insert(a.control_contact_id);
  }
  for (const UnmatchedMessage& u : ledger.unmatched) {
    const MessageRecord* r = messages.find(u.test_message_id);
    if (!in_window(r->sent_at)) continue;
    Tally& tally = tallies[int(u.stratum.subcategory)];
    ++tally.test_messages;
    tally.test_contacts.insert(r->contact_id);
  }

  for (int s = 0; s < kSubcategoryCount; ++s) {
    const Tally& tally = tallies[s];
    if (tally.test_messages == 0) continue;
    QualityRow row;
    row.subcategory = static_cast<Subcategory>(s);
    row.category = category_of(row.subcategory);
    row.test_messages = tally.test_messages;
    row.control_messages = tally.control_messages;
    row.test_contacts = std::int64_t(tally.test_contacts.size());
    row.control_contacts = std::int64_t(tally.control_contacts.size());
    table.rows.push_back(std::move(row));
  }
  return table;
}

SlopeFit least_squares_slope(std::span<const double> y) {
  SlopeFit fit;
  fit.n = int(y.size());
  if (fit.n < 2) return fit;
  const double n = double(fit.n);
  const double x_mean = (n - 1.0) / 2.0;
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < fit.n; ++i) {
    const double dx = double(i) - x_mean;
    sxx += dx * dx;
    sxy += dx * (y[i] - y_mean);
  }
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  if (fit.n > 2) {
    double ssr = 0.0;
    for (int i = 0; i < fit.n; ++i) {
      const double resid = y[i] - (fit.intercept + fit.slope * double(i));
      ssr += resid * resid;
    }
    fit.slope_se = std::sqrt(ssr / double(fit.n - 2) / sxx);
  }
  return fit;
}

std::string format_fraction_percent(double fraction, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f%%", decimals, fraction * 100.0);
  return buf;
}

std::string format_percent(double numerator, double denominator, int decimals) {
  const double fraction = denominator == 0.0 ? 0.0 : numerator / denominator;
  return format_fraction_percent(fraction, decimals);
}

}  // namespace dcm
