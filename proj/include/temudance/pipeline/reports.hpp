#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "temudance/common/json_io.hpp"

namespace temu::pipeline {

// One guidance setting: music scale s with the text branch on or off.
struct TradeoffRow {
  double scale = 1.0;
  bool text = false;
  double diversity = 0.0;  // mean pairwise distance of clip summaries
  double bas = 0.0;        // mean beat alignment score
  double prompt_rate = 0.0;
  double null_rate = 0.0;
  double lift = 0.0;  // macro KPS lift
};

struct TradeoffReport {
  std::vector<TradeoffRow> rows;
  int R = 0;
  int G = 0;
  int samples = 0;
  std::uint64_t seed = 0;
};

Json to_json(const TradeoffReport& r);
TradeoffReport tradeoff_report_from_json(const Json& j);
// Music scale, Text, Div, BAS, Prompt%, Null%, Lift% per row; no FID column.
std::string tradeoff_table(const TradeoffReport& r);

enum class ReportKind { kKps, kRetrieval, kTradeoff };
std::string report_kind_name(ReportKind k);
ReportKind report_kind_from_name(const std::string& name);

struct ReportStamp {
  std::string config_digest;
  std::string version;
};

// Checks `data` against the kind's schema (kSchema on violation), adds the
// stamp and writes <stem>.json plus the aligned text table as <stem>.txt.
void emit_report(ReportKind kind, const Json& data, const ReportStamp& stamp, const std::filesystem::path& stem);

// Text table for a stamped or unstamped report document.
std::string render_report(ReportKind kind, const Json& report);

}  // namespace temu::pipeline
