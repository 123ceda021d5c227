#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "temudance/motion/types.hpp"
#include "temudance/synth/music.hpp"
#include "temudance/synth/synth.hpp"

namespace temu::synth {

// Music-dance domain: primitives performed with a groove locked to the beats
// of a paired music clip. The music carries the genre (tempo) and the label of
// the movement it accompanies.
struct DanceItem {
  motion::JointSequence dance;
  MusicClip music;
  std::string label;
  std::string genre;
};

// Text-motion domain: plain primitives with a text description and no music.
struct TextMotionItem {
  motion::JointSequence motion;
  std::string text;
  std::string label;
};

struct DatasetOptions {
  int items = 72;
  int fps = motion::kDefaultFps;
  double duration_s = 4.0;
  double magnitude_jitter = 0.15;  // relative, uniform
  double groove_amplitude = 0.03;
  bool include_idle = true;
};

// Item i uses primitive i mod (number of primitives) and genre (i / primitives) mod 8,
// so any multiple of 72 items covers every (primitive, genre) pair.
std::vector<DanceItem> make_dance_dataset(const DatasetOptions& options, std::uint64_t seed);
std::vector<TextMotionItem> make_text_motion_dataset(const DatasetOptions& options, std::uint64_t seed);

}  // namespace temu::synth
