#include "dcm/attribution.hpp"

#include <algorithm>
#include <array>

#include "dcm/errors.hpp"

namespace dcm {

double attributable_fraction(double test_metric, double control_metric) {
  if (test_metric < 0.0 || control_metric < 0.0)
    throw ContractViolation("metrics must be non-negative");
  if (test_metric == 0.0 || control_metric >= test_metric) return 0.0;
  return (test_metric - control_metric) / test_metric;
}

IncrementalEvents incremental_events(const std::vector<Bin>& bins, const std::string& event_type) {
  IncrementalEvents out;
  out.per_bin.reserve(bins.size());
  for (const Bin& bin : bins) {
    auto test_it = bin.test_success_sum.find(event_type);
    auto control_it = bin.control_success_sum.find(event_type);
    if (test_it == bin.test_success_sum.end() || control_it == bin.control_success_sum.end())
      throw ContractViolation("bins lack success sums for event type: " + event_type);
    const double n = double(bin.n_test);
    const double test_metric = shrink_partial(test_it->second / n, bin.n_test, bin.capacity);
    const double control_metric = shrink_partial(control_it->second / n, bin.n_test, bin.capacity);
    const double fraction = attributable_fraction(test_metric, control_metric);
    const double incremental = fraction * test_it->second;
    out.per_bin.push_back(incremental);
    out.total += incremental;
  }
  return out;
}

bool is_message_interaction_metric(const std::string& event_type) {
  static const std::array<const char*, 6> blocked = {
      "click", "clicks", "click_through", "message_click", "message_open", "open"};
  return std::find(blocked.begin(), blocked.end(), event_type) != blocked.end();
}

void reject_message_interaction_metrics(const std::vector<std::string>& event_types) {
  for (const std::string& type : event_types) {
    if (is_message_interaction_metric(type))
      throw ConfigError("cannot score '" + type +
                        "': contacts who are sent no messages cannot interact with a message, so "
                        "control values for message-interaction metrics are undefined");
  }
}

AttributionReport attribution_table(const MatchLedger& ledger, const MessageLog& messages,
                                    const EventLog& events, const RunConfig& config,
                                    const std::vector<std::string>& event_types, int threads) {
  reject_message_interaction_metrics(event_types);
  if (ledger.assignments.empty()) throw EmptyLedger();

  AttributionReport report;
  report.event_types = event_types;

  // Assignments per stratum, in canonical stratum order.
  std::array<std::vector<std::uint32_t>, kSubcategoryCount> by_stratum;
  for (std::uint32_t i = 0; i < ledger.assignments.size(); ++i)
    by_stratum[int(ledger.assignments[i].stratum.subcategory)].push_back(i);

  for (int s = 0; s < kSubcategoryCount; ++s) {
    if (by_stratum[s].empty()) continue;
    const Subcategory subcategory = static_cast<Subcategory>(s);
    report.strata.push_back(subcategory);

    std::vector<Bin> bins = bin_assignments(by_stratum[s], ledger, messages, config.bin_size);
    for (const std::string& event_type : event_types) {
      const SuccessSpec spec = success_spec_for(event_type, config);
      accumulate_successes(bins, ledger, messages, events, spec, threads);

      AttributionCell cell;
      cell.subcategory = subcategory;
      cell.category = category_of(subcategory);
      cell.event_type = event_type;

      const IncrementalEvents inc = incremental_events(bins, event_type);
      double total_successes = 0.0;
      for (const Bin& bin : bins) total_successes += bin.test_success_sum.at(event_type);
      cell.total_test_successes = total_successes;
      cell.incremental_events = inc.total;
      if (total_successes == 0.0) {
        cell.empty = true;
        cell.attributable_fraction = 0.0;
      } else {
        cell.attributable_fraction = inc.total / total_successes;
      }
      report.cells.push_back(std::move(cell));

      for (std::size_t b = 0; b < bins.size(); ++b) {
        const Bin& bin = bins[b];
        BinDetail detail;
        detail.subcategory = subcategory;
        detail.event_type = event_type;
        detail.bin_index = bin.index;
        detail.n_test = bin.n_test;
        detail.mean_score = bin.mean_score;
        const double n = double(bin.n_test);
        detail.test_success_sum = bin.test_success_sum.at(event_type);
        detail.control_success_sum = bin.control_success_sum.at(event_type);
        detail.test_metric = shrink_partial(detail.test_success_sum / n, bin.n_test, bin.capacity);
        detail.control_metric =
            shrink_partial(detail.control_success_sum / n, bin.n_test, bin.capacity);
        detail.fraction = attributable_fraction(detail.test_metric, detail.control_metric);
        detail.incremental = inc.per_bin[b];
        report.bin_details.push_back(std::move(detail));
      }
    }
  }
  return report;
}

}  // namespace dcm
