#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "temudance/common/json_io.hpp"

namespace temu::synth {

inline constexpr int kMusicDim = 32;

// Frame-aligned condition features standing in for a pretrained music encoder.
struct MusicClip {
  Eigen::MatrixXd features;  // frames x dim
  int fps = 30;
  std::vector<double> beats;  // seconds
  std::string genre;
};

struct MusicStyle {
  std::string genre;
  double tempo_bpm = 120.0;
  double energy = 1.0;
  // Label of the paired movement; shifts the feature mean so a music clip
  // carries information about the dance it accompanies.
  std::string paired_label;
};

// Channels: [0,8) genre signature, [8,16) paired-movement signature,
// [16,24) beat-phase harmonics, 24 energy, [25,32) seeded noise.
MusicClip synthesize_music(const MusicStyle& style, int frames, int fps, std::uint64_t seed);

Json to_json(const MusicClip& clip);
MusicClip music_from_json(const Json& j);

// A pool directory holds music_NNNN.json files, read back in name order.
void write_music_pool(const std::filesystem::path& dir, const std::vector<MusicClip>& pool);
std::vector<MusicClip> read_music_pool(const std::filesystem::path& dir);

}  // namespace temu::synth
