#include "dcm/report.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "dcm/errors.hpp"

namespace dcm {

using nlohmann::json;

namespace {

std::ofstream open_table(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path.string());
  return out;
}

std::string fixed(double value, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace

std::string stratum_slug(Subcategory subcategory) {
  std::string slug;
  for (char c : std::string(subcategory_label(subcategory))) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      slug += char(std::tolower(static_cast<unsigned char>(c)));
    else if (c == ' ' && !slug.empty() && slug.back() != '_')
      slug += '_';
  }
  return slug;
}

void write_quality_table(const QualityTable& table, const std::filesystem::path& path) {
  auto out = open_table(path);
  out << "category\tsubcategory\ttest_messages\tcontrol_messages\tmessage_coverage\t"
         "test_contacts\tcontrol_contacts\tcontact_coverage\n";
  for (const QualityRow& row : table.rows) {
    out << category_label(row.category) << '\t' << subcategory_label(row.subcategory) << '\t'
        << row.test_messages << '\t' << row.control_messages << '\t'
        << format_percent(double(row.control_messages), double(row.test_messages), 1) << '\t'
        << row.test_contacts << '\t' << row.control_contacts << '\t'
        << format_percent(double(row.control_contacts), double(row.test_contacts), 1) << '\n';
  }
}

void write_bin_curve(const BinCurve& curve, const std::filesystem::path& path) {
  auto out = open_table(path);
  out << "bin_index\tmean_score\tn_test\ttest_metric\tcontrol_metric\tsmoothed_test_metric\n";
  for (const BinCurvePoint& p : curve.points) {
    out << p.bin_index << '\t' << fixed(p.mean_score) << '\t' << p.n_test << '\t'
        << fixed(p.test_metric) << '\t' << fixed(p.control_metric) << '\t'
        << fixed(p.smoothed_test_metric) << '\n';
  }
}

void write_attribution_table(const AttributionReport& report, const std::filesystem::path& path) {
  auto out = open_table(path);
  out << "category\tsubcategory";
  for (const std::string& type : report.event_types) out << '\t' << type;
  out << '\n';
  for (Subcategory stratum : report.strata) {
    out << category_label(category_of(stratum)) << '\t' << subcategory_label(stratum);
    for (const std::string& type : report.event_types) {
      const AttributionCell* found = nullptr;
      for (const AttributionCell& cell : report.cells)
        if (cell.subcategory == stratum && cell.event_type == type) found = &cell;
      out << '\t'
          << (found == nullptr ? "n/a" : format_fraction_percent(found->attributable_fraction, 1));
    }
    out << '\n';
  }
}

void write_attribution_cells(const AttributionReport& report, const std::filesystem::path& path) {
  auto out = open_table(path);
  out << "category\tsubcategory\tevent_type\tattributable_fraction\tincremental_events\t"
         "total_test_successes\tempty\n";
  for (const AttributionCell& cell : report.cells) {
    out << category_label(cell.category) << '\t' << subcategory_label(cell.subcategory) << '\t'
        << cell.event_type << '\t' << fixed(cell.attributable_fraction) << '\t'
        << fixed(cell.incremental_events, 3) << '\t' << fixed(cell.total_test_successes, 3) << '\t'
        << (cell.empty ? 1 : 0) << '\n';
  }
}

void write_attribution_detail(const AttributionReport& report, const std::filesystem::path& path) {
  auto out = open_table(path);
  for (const BinDetail& d : report.bin_details) {
    json j;
    j["subcategory"] = subcategory_label(d.subcategory);
    j["event_type"] = d.event_type;
    j["bin_index"] = d.bin_index;
    j["n_test"] = d.n_test;
    j["mean_score"] = d.mean_score;
    j["test_metric"] = d.test_metric;
    j["control_metric"] = d.control_metric;
    j["fraction"] = d.fraction;
    j["test_success_sum"] = d.test_success_sum;
    j["control_success_sum"] = d.control_success_sum;
    j["incremental"] = d.incremental;
    out << j.dump() << '\n';
  }
}

void write_report_bundle(const MatchLedger& ledger, const MessageLog& messages,
                         const EventLog& events, const RunConfig& config,
                         const std::vector<std::string>& event_types,
                         const std::filesystem::path& out_dir, int threads) {
  std::filesystem::create_directories(out_dir);
  write_quality_table(match_quality(ledger, messages, config.quality_period_days),
                      out_dir / "quality.tsv");

  // Pooled curves per event type.
  std::vector<Bin> pooled = bin_messages(ledger, messages, config.bin_size);
  for (const std::string& type : event_types) {
    const SuccessSpec spec = success_spec_for(type, config);
    accumulate_successes(pooled, ledger, messages, events, spec, threads);
    write_bin_curve(bin_curve(pooled, type, config.smoothing_window),
                    out_dir / ("bins_" + type + ".tsv"));
  }

  // Per-stratum curves, the per-category figure inputs.
  std::array<std::vector<std::uint32_t>, kSubcategoryCount> by_stratum;
  for (std::uint32_t i = 0; i < ledger.assignments.size(); ++i)
    by_stratum[int(ledger.assignments[i].stratum.subcategory)].push_back(i);
  for (int s = 0; s < kSubcategoryCount; ++s) {
    if (by_stratum[s].empty()) continue;
    const Subcategory stratum = static_cast<Subcategory>(s);
    std::vector<Bin> bins = bin_assignments(by_stratum[s], ledger, messages, config.bin_size);
    const auto dir = out_dir / "curves" / stratum_slug(stratum);
    std::filesystem::create_directories(dir);
    for (const std::string& type : event_types) {
      const SuccessSpec spec = success_spec_for(type, config);
      accumulate_successes(bins, ledger, messages, events, spec, threads);
      write_bin_curve(bin_curve(bins, type, config.smoothing_window), dir / (type + ".tsv"));
    }
  }

  const AttributionReport attribution =
      attribution_table(ledger, messages, events, config, event_types, threads);
  write_attribution_table(attribution, out_dir / "attribution.tsv");
  write_attribution_cells(attribution, out_dir / "attribution_cells.tsv");
  write_attribution_detail(attribution, out_dir / "attribution_detail.jsonl");
}

}  // namespace dcm
