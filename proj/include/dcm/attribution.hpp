#pragma once

#include <string>
#include <vector>

#include "dcm/config.hpp"
#include "dcm/logs.hpp"
#include "dcm/match.hpp"
#include "dcm/metrics.hpp"

namespace dcm {

// Share of test successes credited to messaging: (test - control) / test,
// clamped to 0 whenever the control meets or beats the test (no credit) or
// there is nothing to credit. Negative inputs are a contract violation.
double attributable_fraction(double test_metric, double control_metric);

// Fractions use the shrinkage-adjusted metrics; incremental counts multiply
// against the raw success sums.
struct IncrementalEvents {
  std::vector<double> per_bin;
  double total = 0;
};
IncrementalEvents incremental_events(const std::vector<Bin>& bins, const std::string& event_type);

struct AttributionCell {
  Category category = Category::kUnclassifiable;
  Subcategory subcategory = Subcategory::kUnclassifiable;
  std::string event_type;
  double attributable_fraction = 0;  // total incremental / total test successes
  double incremental_events = 0;
  double total_test_successes = 0;
  bool empty = false;  // flagged: stratum had no test successes for this type
};

struct BinDetail {
  Subcategory subcategory = Subcategory::kUnclassifiable;
  std::string event_type;
  int bin_index = 0;
  int n_test = 0;
  double mean_score = 0;
  double test_metric = 0;
  double control_metric = 0;
  double fraction = 0;
  double test_success_sum = 0;
  double control_success_sum = 0;
  double incremental = 0;
};

struct AttributionReport {
  std::vector<AttributionCell> cells;      // stratum-major, event-type-minor
  std::vector<BinDetail> bin_details;      // machine-readable per-bin rows
  std::vector<Subcategory> strata;         // populated strata, canonical order
  std::vector<std::string> event_types;
};

// Click-style metrics cannot be measured against contacts who receive no
// message; requesting one is rejected up front.
bool is_message_interaction_metric(const std::string& event_type);
void reject_message_interaction_metrics(const std::vector<std::string>& event_types);

// Bins are computed within each stratum separately so different baselines
// are never pooled.
AttributionReport attribution_table(const MatchLedger& ledger, const MessageLog& messages,
                                    const EventLog& events, const RunConfig& config,
                                    const std::vector<std::string>& event_types,
                                    int threads = 0);

}  // namespace dcm
