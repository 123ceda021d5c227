#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

#include "temudance/motion/types.hpp"
#include "temudance/synth/music.hpp"

namespace temu::align {

inline constexpr int kTokenDim = 32;
inline constexpr int kDefaultStride = 4;

// One token every `stride` frames: 9 pelvis-relative joints (head, elbows,
// wrists, knees, ankles; 27 values), pelvis height, pelvis ground speed, hip
// yaw rate, wrist-to-wrist distance, mean wrist speed. Positions and the
// wrist distance are offsets from frame 0, scaled by 4.
Eigen::MatrixXd motion_tokens(const motion::JointSequence& seq, int stride = kDefaultStride);

// Music frames subsampled with the same stride.
Eigen::MatrixXd music_tokens(const synth::MusicClip& music, int stride = kDefaultStride);

// Lower-cased words split on whitespace and commas.
std::vector<std::string> tokenize(std::string_view text);

// One deterministic hash embedding per word (unit norm, kTokenDim wide).
// Empty text yields a single zero token.
Eigen::MatrixXd text_tokens(std::string_view text);

}  // namespace temu::align
