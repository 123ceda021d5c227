#include "temudance/kps/protocol.hpp"

#include <cmath>
#include <cstdio>

#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/synth/synth.hpp"

namespace temu::kps {

namespace {

double clip_duration(const synth::MusicClip& music) {
  const double d = static_cast<double>(music.features.rows()) / music.fps;
  return d * 30.0 >= 20.0 ? d : 4.0;
}

// The predicate named by a prompt: its text up to the first comma.
std::string predicate_for_prompt(const std::string& prompt) {
  const auto comma = prompt.find(',');
  std::string head = prompt.substr(0, comma);
  while (!head.empty() && head.back() == ' ') head.pop_back();
  while (!head.empty() && head.front() == ' ') head.erase(head.begin());
  return head;
}

std::string percent(double rate, bool sign) {
  // The nudge keeps decimal midpoints such as 0.6125 (stored as 0.61249...) rounding up.
  const double v = std::round(rate * 1000.0 + std::copysign(1e-6, rate)) / 10.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, sign ? "%+.1f" : "%.1f", v == 0.0 ? 0.0 : v);
  return buf;
}

Json row_json(const RateRow& r, const char* key) {
  return Json{{key, r.name}, {"prompt_rate", r.prompt_rate}, {"null_rate", r.null_rate}, {"lift", r.lift}};
}

RateRow row_from_json(const Json& j, const char* key) {
  return RateRow{j.at(key).get<std::string>(), j.at("prompt_rate").get<double>(), j.at("null_rate").get<double>(),
                 j.at("lift").get<double>()};
}

}  // namespace

motion::JointSequence OracleGenerator::generate(const synth::MusicClip& music, const std::optional<std::string>& text,
                                                std::uint64_t seed) const {
  const synth::Primitive p = text ? synth::parse_primitive(predicate_for_prompt(*text)) : synth::Primitive::kIdle;
  return synth::synthesize(synth::calibrated_spec(p, seed, clip_duration(music)));
}

motion::JointSequence TextIgnoringGenerator::generate(const synth::MusicClip& music, const std::optional<std::string>&,
                                                      std::uint64_t seed) const {
  const auto p = synth::kAllPrimitives[mix64(seed) % synth::kAllPrimitives.size()];
  return synth::synthesize(synth::calibrated_spec(p, seed, clip_duration(music)));
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kPose: return "Pose";
    case Family::kTrajectory: return "Trajectory";
    case Family::kRotation: return "Rotation";
    case Family::kTemporal: return "Temporal";
  }
  return "Pose";
}

Family family_of(std::string_view primitive) {
  if (primitive == "crouch" || primitive == "hands_up" || primitive == "kick" || primitive == "clap") return Family::kPose;
  if (primitive == "walk_move" || primitive == "jump") return Family::kTrajectory;
  if (primitive == "turn") return Family::kRotation;
  if (primitive == "wave") return Family::kTemporal;
  throw Error(ErrorCode::kUnknownPredicate, "no predicate named '" + std::string(primitive) + "'");
}

KpsReport aggregate_kps(std::vector<RateRow> primitives) {
  if (primitives.empty()) throw Error(ErrorCode::kEmptyInput, "KPS report needs at least one primitive");
  KpsReport report;
  for (RateRow& r : primitives) r.lift = r.prompt_rate - r.null_rate;
  for (Family fam : kFamilies) {
    RateRow row{std::string(family_name(fam))};
    int n = 0;
    for (const RateRow& r : primitives) {
      if (family_of(r.name) != fam) continue;
      row.prompt_rate += r.prompt_rate;
      row.null_rate += r.null_rate;
      ++n;
    }
    if (n == 0) continue;
    row.prompt_rate /= n;
    row.null_rate /= n;
    row.lift = row.prompt_rate - row.null_rate;
    report.families.push_back(row);
  }
  report.macro.name = "Macro-average";
  for (const RateRow& r : primitives) {
    report.macro.prompt_rate += r.prompt_rate;
    report.macro.null_rate += r.null_rate;
  }
  report.macro.prompt_rate /= static_cast<double>(primitives.size());
  report.macro.null_rate /= static_cast<double>(primitives.size());
  report.macro.lift = report.macro.prompt_rate - report.macro.null_rate;
  report.primitives = std::move(primitives);
  return report;
}

namespace {

// A generated body with no recoverable up axis or facing cannot show any
// primitive, so it counts as a miss instead of aborting the whole run.
bool passes(const std::string& predicate, const motion::JointSequence& seq, const PredicateThresholds& th) {
  try {
    return eval_predicate(predicate, seq, th).passed;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAmbiguousAxes && e.code() != ErrorCode::kDegenerateYaw) throw;
    warn(std::string("counting an unreadable generated motion as a miss: ") + e.what());
    return false;
  }
}

}  // namespace

KpsReport run_kps(const ConditionedGenerator& gen, const std::vector<std::string>& prompts,
                  const std::vector<synth::MusicClip>& music_pool, const KpsOptions& options) {
  if (options.R < 1 || options.G < 1) throw Error(ErrorCode::kInvalidArgument, "KPS needs R >= 1 and G >= 1");
  if (prompts.empty()) throw Error(ErrorCode::kEmptyInput, "KPS needs at least one prompt");
  if (music_pool.empty()) throw Error(ErrorCode::kEmptyInput, "KPS needs a non-empty music pool");
  options.thresholds.validate();

  std::vector<RateRow> rows;
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    const std::string predicate = predicate_for_prompt(prompts[p]);
    family_of(predicate);
    int prompted = 0;
    int null = 0;
    for (int g = 0; g < options.G; ++g) {
      Rng pick(derive_seed(options.seed, {0x6d75ULL, static_cast<std::uint64_t>(g), p}));
      const synth::MusicClip& music = music_pool[pick.below(music_pool.size())];
      for (int r = 0; r < options.R; ++r) {
        const std::uint64_t seed = derive_seed(options.seed, {static_cast<std::uint64_t>(g), p, static_cast<std::uint64_t>(r)});
        try {
          if (passes(predicate, gen.generate(music, prompts[p], seed), options.thresholds)) ++prompted;
          if (passes(predicate, gen.generate(music, std::nullopt, seed), options.thresholds)) ++null;
        } catch (const Error& e) {
          throw Error(e.code(), "group " + std::to_string(g) + ", prompt '" + prompts[p] + "': " + e.what());
        }
      }
    }
    const double trials = static_cast<double>(options.R) * options.G;
    rows.push_back(RateRow{predicate, prompted / trials, null / trials, 0.0});
  }
  KpsReport report = aggregate_kps(std::move(rows));
  report.R = options.R;
  report.G = options.G;
  report.seed = options.seed;
  report.generator = gen.describe();
  return report;
}

Json to_json(const KpsReport& report) {
  Json j;
  j["generator"] = report.generator;
  j["R"] = report.R;
  j["G"] = report.G;
  j["seed"] = report.seed;
  Json prims = Json::array();
  for (const RateRow& r : report.primitives) {
    Json row = row_json(r, "primitive");
    row["family"] = family_name(family_of(r.name));
    prims.push_back(row);
  }
  j["primitives"] = prims;
  Json fams = Json::array();
  for (const RateRow& r : report.families) fams.push_back(row_json(r, "family"));
  j["families"] = fams;
  j["macro_average"] = Json{{"prompt_rate", report.macro.prompt_rate}, {"null_rate", report.macro.null_rate},
                            {"lift", report.macro.lift}};
  return j;
}

KpsReport kps_report_from_json(const Json& j) {
  try {
    KpsReport r;
    r.generator = j.at("generator").get<std::string>();
    r.R = j.at("R").get<int>();
    r.G = j.at("G").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& row : j.at("primitives")) r.primitives.push_back(row_from_json(row, "primitive"));
    for (const auto& row : j.at("families")) r.families.push_back(row_from_json(row, "family"));
    const Json& m = j.at("macro_average");
    r.macro = RateRow{"Macro-average", m.at("prompt_rate").get<double>(), m.at("null_rate").get<double>(),
                      m.at("lift").get<double>()};
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed KPS report: ") + e.what());
  }
}

std::string kps_table(const KpsReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %-12s %8s %8s %8s\n", "Family", "Primitive", "Prompt%", "Null%", "Lift%");
  out += line;
  for (Family fam : kFamilies) {
    for (const RateRow& r : report.primitives) {
      if (family_of(r.name) != fam) continue;
      std::snprintf(line, sizeof line, "%-12s %-12s %8s %8s %8s\n", std::string(family_name(fam)).c_str(),
                    r.name.c_str(), percent(r.prompt_rate, false).c_str(), percent(r.null_rate, false).c_str(),
                    percent(r.lift, true).c_str());
      out += line;
    }
  }
  std::snprintf(line, sizeof line, "%-25s %8s %8s %8s\n", "Macro-average", percent(report.macro.prompt_rate, false).c_str(),
                percent(report.macro.null_rate, false).c_str(), percent(report.macro.lift, true).c_str());
  out += line;
  out += "\n";
  std::snprintf(line, sizeof line, "%-25s %8s %8s %8s\n", "Family", "Prompt%", "Null%", "Lift%");
  out += line;
  for (const RateRow& r : report.families) {
    std::snprintf(line, sizeof line, "%-25s %8s %8s %8s\n", r.name.c_str(), percent(r.prompt_rate, false).c_str(),
                  percent(r.null_rate, false).c_str(), percent(r.lift, true).c_str());
    out += line;
  }
  return out;
}

}  // namespace temu::kps
