#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "temudance/common/json_io.hpp"
#include "temudance/kps/predicates.hpp"
#include "temudance/motion/types.hpp"
#include "temudance/synth/music.hpp"

namespace temu::kps {

// Anything that turns (music, text or null, seed) into a joint sequence.
class ConditionedGenerator {
 public:
  virtual ~ConditionedGenerator() = default;
  virtual motion::JointSequence generate(const synth::MusicClip& music, const std::optional<std::string>& text,
                                         std::uint64_t seed) const = 0;
  virtual std::string describe() const = 0;
};

// Emits the calibrated primitive named by the prompt, and idle for null text.
class OracleGenerator final : public ConditionedGenerator {
 public:
  motion::JointSequence generate(const synth::MusicClip& music, const std::optional<std::string>& text,
                                 std::uint64_t seed) const override;
  std::string describe() const override { return "oracle"; }
};

// Picks a primitive from the seed alone; the text is never read.
class TextIgnoringGenerator final : public ConditionedGenerator {
 public:
  motion::JointSequence generate(const synth::MusicClip& music, const std::optional<std::string>& text,
                                 std::uint64_t seed) const override;
  std::string describe() const override { return "text-ignoring"; }
};

enum class Family { kPose, kTrajectory, kRotation, kTemporal };
inline constexpr Family kFamilies[] = {Family::kPose, Family::kTrajectory, Family::kRotation, Family::kTemporal};
std::string_view family_name(Family f);
// Throws kUnknownPredicate.
Family family_of(std::string_view primitive);

struct RateRow {
  std::string name;
  double prompt_rate = 0.0;
  double null_rate = 0.0;
  double lift = 0.0;
};

struct KpsReport {
  std::vector<RateRow> primitives;  // with name = primitive
  std::vector<RateRow> families;    // only families with at least one evaluated primitive
  RateRow macro;
  int R = 0;
  int G = 0;
  std::uint64_t seed = 0;
  std::string generator;
};

// Builds family rows and the macro-average from per-primitive prompt/null rates.
KpsReport aggregate_kps(std::vector<RateRow> primitives);

struct KpsOptions {
  int R = 10;
  int G = 5;
  std::uint64_t seed = 0;
  PredicateThresholds thresholds;
};

// For each group and prompt: one music clip drawn from the pool, then R
// prompted and R null-text generations sharing (music, seed) pairs.
KpsReport run_kps(const ConditionedGenerator& gen, const std::vector<std::string>& prompts,
                  const std::vector<synth::MusicClip>& music_pool, const KpsOptions& options);

Json to_json(const KpsReport& report);
KpsReport kps_report_from_json(const Json& j);
// Aligned text table with Prompt% / Null% / Lift% columns and a Macro-average row.
std::string kps_table(const KpsReport& report);

}  // namespace temu::kps
