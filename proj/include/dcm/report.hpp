#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dcm/attribution.hpp"
#include "dcm/config.hpp"
#include "dcm/logs.hpp"
#include "dcm/match.hpp"
#include "dcm/metrics.hpp"

namespace dcm {

// Tab-separated tables with a header row; percentages carry one decimal.
void write_quality_table(const QualityTable& table, const std::filesystem::path& path);
void write_bin_curve(const BinCurve& curve, const std::filesystem::path& path);

// Pivoted table: one row per stratum, one percentage column per event type,
// plus a flat per-cell file and a JSONL file with per-bin detail.
void write_attribution_table(const AttributionReport& report, const std::filesystem::path& path);
void write_attribution_cells(const AttributionReport& report, const std::filesystem::path& path);
void write_attribution_detail(const AttributionReport& report, const std::filesystem::path& path);

// quality.tsv, bins_<type>.tsv (pooled), curves/<stratum>/<type>.tsv
// (per stratum), attribution.tsv, attribution_cells.tsv and
// attribution_detail.jsonl under out_dir.
void write_report_bundle(const MatchLedger& ledger, const MessageLog& messages,
                         const EventLog& events, const RunConfig& config,
                         const std::vector<std::string>& event_types,
                         const std::filesystem::path& out_dir, int threads = 0);

// Filesystem-safe slug for a stratum label ("Formerly converted, actively
// looking" -> "formerly_converted_actively_looking").
std::string stratum_slug(Subcategory subcategory);

}  // namespace dcm
