#include "temudance/pipeline/reports.hpp"

#include <cstdio>

#include "temudance/bank/bank.hpp"
#include "temudance/common/error.hpp"
#include "temudance/kps/protocol.hpp"

namespace temu::pipeline {

Json to_json(const TradeoffReport& r) {
  Json rows = Json::array();
  for (const TradeoffRow& row : r.rows) {
    rows.push_back(Json{{"music_scale", row.scale},
                        {"text", row.text},
                        {"diversity", row.diversity},
                        {"bas", row.bas},
                        {"prompt_rate", row.prompt_rate},
                        {"null_rate", row.null_rate},
                        {"lift", row.lift}});
  }
  return Json{{"R", r.R}, {"G", r.G}, {"samples", r.samples}, {"seed", r.seed}, {"rows", rows}};
}

TradeoffReport tradeoff_report_from_json(const Json& j) {
  try {
    TradeoffReport r;
    r.R = j.at("R").get<int>();
    r.G = j.at("G").get<int>();
    r.samples = j.at("samples").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const Json& row : j.at("rows")) {
      r.rows.push_back(TradeoffRow{row.at("music_scale").get<double>(), row.at("text").get<bool>(),
                                   row.at("diversity").get<double>(), row.at("bas").get<double>(),
                                   row.at("prompt_rate").get<double>(), row.at("null_rate").get<double>(),
                                   row.at("lift").get<double>()});
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed trade-off report: ") + e.what());
  }
}

std::string tradeoff_table(const TradeoffReport& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-11s %-5s %9s %7s %8s %8s %8s\n", "Music scale", "Text", "Div", "BAS", "Prompt%",
                "Null%", "Lift%");
  out += line;
  for (const TradeoffRow& row : r.rows) {
    std::snprintf(line, sizeof line, "%-11g %-5s %9.4f %7.4f %8.1f %8.1f %+8.1f\n", row.scale, row.text ? "on" : "off",
                  row.diversity, row.bas, 100.0 * row.prompt_rate, 100.0 * row.null_rate, 100.0 * row.lift);
    out += line;
  }
  return out;
}

std::string report_kind_name(ReportKind k) {
  switch (k) {
    case ReportKind::kKps:
      return "kps";
    case ReportKind::kRetrieval:
      return "retrieval";
    case ReportKind::kTradeoff:
      return "tradeoff";
  }
  return "?";
}

ReportKind report_kind_from_name(const std::string& name) {
  for (ReportKind k : {ReportKind::kKps, ReportKind::kRetrieval, ReportKind::kTradeoff}) {
    if (report_kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown report kind '" + name + "' (kps, retrieval, tradeoff)");
}

namespace {

// Parsing doubles as the schema check.
std::string body_table(ReportKind kind, const Json& data) {
  switch (kind) {
    case ReportKind::kKps:
      return kps::kps_table(kps::kps_report_from_json(data));
    case ReportKind::kRetrieval:
      return bank::retrieval_table(bank::retrieval_stats_from_json(data));
    case ReportKind::kTradeoff:
      return tradeoff_table(tradeoff_report_from_json(data));
  }
  return {};
}

}  // namespace

std::string render_report(ReportKind kind, const Json& report) {
  std::string header;
  if (report.contains("config_digest") && report.contains("version")) {
    header = "# " + report_kind_name(kind) + " report, config " + report.at("config_digest").get<std::string>() +
             ", version " + report.at("version").get<std::string>() + "\n";
  }
  return header + body_table(kind, report);
}

void emit_report(ReportKind kind, const Json& data, const ReportStamp& stamp, const std::filesystem::path& stem) {
  if (!data.is_object()) throw Error(ErrorCode::kSchema, report_kind_name(kind) + " report must be a JSON object");
  body_table(kind, data);
  Json doc = data;
  doc["config_digest"] = stamp.config_digest;
  doc["version"] = stamp.version;
  std::filesystem::path json_path = stem;
  json_path += ".json";
  std::filesystem::path text_path = stem;
  text_path += ".txt";
  write_json_file(json_path, doc);
  write_text_file(text_path, render_report(kind, doc));
}

}  // namespace temu::pipeline
