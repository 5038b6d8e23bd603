#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dcm/config.hpp"
#include "dcm/core.hpp"
#include "dcm/logs.hpp"
#include "dcm/match.hpp"

namespace dcm {

// What counts as success for one event type. The optional weight steps give
// each event the weight of the first step whose max-hours bound covers the
// event's delay; events past the last step weigh zero.
struct SuccessSpec {
  std::string event_type;
  int monitoring_hours = 24;
  std::vector<std::pair<double, double>> weight_table;  // (max_hours, weight)

  void validate() const;
};

SuccessSpec success_spec_for(const std::string& event_type, const RunConfig& config);

// Count (or weight-sum) of matching events in [anchor, anchor + window).
// Control contacts use the virtual send time as anchor.
double success_count(const ContactId& contact, Timestamp anchor, const SuccessSpec& spec,
                     const EventLog& events);

// One score-ordered chunk of matched test messages with its success tallies.
struct Bin {
  int index = 0;
  int capacity = 0;
  int n_test = 0;
  double score_min = 0;
  double score_max = 0;
  double mean_score = 0;
  std::vector<std::uint32_t> assignment_idx;  // into MatchLedger::assignments
  std::map<std::string, double> test_success_sum;
  std::map<std::string, double> control_success_sum;
};

// Sorts matched messages by (confidence_score, message_id) ascending and
// chunks them into groups of bin_size; only the last group may be partial.
// Throws EmptyLedger when no messages matched.
std::vector<Bin> bin_messages(const MatchLedger& ledger, const MessageLog& messages, int bin_size);

// Same chunking over an explicit subset of assignments (used per stratum).
std::vector<Bin> bin_assignments(std::span<const std::uint32_t> assignment_idx,
                                 const MatchLedger& ledger, const MessageLog& messages,
                                 int bin_size);

// Fills test/control success sums for spec.event_type in every bin.
// Per-pair counting parallelizes; the fold is sequential so sums are
// byte-stable for any worker count.
void accumulate_successes(std::vector<Bin>& bins, const MatchLedger& ledger,
                          const MessageLog& messages, const EventLog& events,
                          const SuccessSpec& spec, int threads = 0);

// Pulls a partial bin's metric toward 0 by weight n/bin_size.
double shrink_partial(double raw_metric, int n, int bin_size);

struct BinCurvePoint {
  int bin_index = 0;
  double mean_score = 0;
  int n_test = 0;
  double test_metric = 0;
  double control_metric = 0;
  double smoothed_test_metric = 0;
  double test_success_sum = 0;
  double control_success_sum = 0;
};

struct BinCurve {
  std::string event_type;
  std::vector<BinCurvePoint> points;
};

// Per-bin adjusted metrics plus a centered moving average of the test
// metric (edges truncated; window 1 = identity).
BinCurve bin_curve(const std::vector<Bin>& bins, const std::string& event_type,
                   int smoothing_window);

struct QualityRow {
  Category category = Category::kUnclassifiable;
  Subcategory subcategory = Subcategory::kUnclassifiable;
  std::int64_t test_messages = 0;
  std::int64_t control_messages = 0;
  std::int64_t test_contacts = 0;
  std::int64_t control_contacts = 0;

  double message_coverage() const {
    return test_messages == 0 ? 0.0 : double(control_messages) / double(test_messages);
  }
  double contact_coverage() const {
    return test_contacts == 0 ? 0.0 : double(control_contacts) / double(test_contacts);
  }
};

struct QualityTable {
  std::vector<QualityRow> rows;  // canonical subcategory order, populated rows only
  Timestamp window_start = 0;    // exclusive
  Timestamp window_end = 0;      // inclusive
};

// Coverage over the trailing period ending at the newest ledger-covered
// test message.
QualityTable match_quality(const MatchLedger& ledger, const MessageLog& messages, int period_days);

// Ordinary least squares of y against its index; slope_se is the standard
// error of the slope estimate.
struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;
  int n = 0;
};
SlopeFit least_squares_slope(std::span<const double> y);

// "90.6%" style formatting; percentages round at the given decimals.
std::string format_percent(double numerator, double denominator, int decimals);
std::string format_fraction_percent(double fraction, int decimals);

}  // namespace dcm
