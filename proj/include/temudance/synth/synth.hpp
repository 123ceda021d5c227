#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "temudance/motion/types.hpp"

namespace temu::synth {

enum class Primitive { kWalkMove, kJump, kTurn, kCrouch, kHandsUp, kKick, kClap, kWave, kIdle };

inline constexpr std::array<Primitive, 8> kActionPrimitives = {
    Primitive::kWalkMove, Primitive::kJump, Primitive::kTurn, Primitive::kCrouch,
    Primitive::kHandsUp,  Primitive::kKick, Primitive::kClap, Primitive::kWave};
inline constexpr std::array<Primitive, 9> kAllPrimitives = {
    Primitive::kWalkMove, Primitive::kJump, Primitive::kTurn, Primitive::kCrouch, Primitive::kHandsUp,
    Primitive::kKick,     Primitive::kClap, Primitive::kWave, Primitive::kIdle};

std::string_view primitive_name(Primitive p);
// Throws kUnsupportedPrimitive for names outside the closed set.
Primitive parse_primitive(std::string_view name);
int primitive_index(Primitive p);

// magnitude meaning per primitive:
//   walk_move: pelvis ground displacement    jump: pelvis lift
//   turn: yaw angle in degrees               crouch: pelvis depth
//   hands_up: wrist height above shoulder    kick: ankle lift
//   clap: lateral wrist opening              wave: lateral wrist amplitude
//   idle: ignored
struct PrimitiveSpec {
  Primitive primitive = Primitive::kIdle;
  double magnitude = 0.0;
  double frequency_hz = 0.0;  // clap and wave only
  double duration_s = 4.0;
  std::uint64_t seed = 0;
};

// Magnitudes that clear each predicate threshold with margin.
PrimitiveSpec calibrated_spec(Primitive p, std::uint64_t seed, double duration_s = 4.0);

// Upright skeleton (axis 1 up, facing +axis 2) performing the primitive, with
// independent uniform jitter of +-0.002 units on every coordinate.
motion::JointSequence synthesize(const PrimitiveSpec& spec, int fps = motion::kDefaultFps);

// Same sequence without jitter; used by tests that need the clean trajectory.
motion::JointSequence synthesize_clean(const PrimitiveSpec& spec, int fps = motion::kDefaultFps);

// Adds a vertical whole-body bounce amplitude*|cos(pi*hz*(t - first_beat_s))|,
// peaking on every beat: the rhythmic overlay that distinguishes dance-domain
// clips from plain motion clips.
motion::JointSequence add_groove(const motion::JointSequence& seq, double amplitude, double hz,
                                 double first_beat_s = 0.0);

const std::vector<std::string>& genre_tags();
// Each genre has its own tempo, 84 to 168 bpm in steps of 12.
double genre_tempo_bpm(std::string_view genre);

struct CorpusItem {
  motion::JointSequence sequence;
  std::string label;
  std::string genre;
};

std::vector<CorpusItem> synthesize_corpus(std::span<const PrimitiveSpec> specs, int fps = motion::kDefaultFps);

// Writes one motion file per item plus manifest.json ([{file, label, genre}]).
void write_corpus(const std::filesystem::path& dir, std::span<const CorpusItem> corpus);
std::vector<CorpusItem> read_corpus(const std::filesystem::path& dir);

// Declared oracle matrix: whether the calibrated generator for `generated`
// is expected to satisfy the predicate of `predicate`.
bool oracle_expected_pass(Primitive generated, Primitive predicate);

}  // namespace temu::synth
