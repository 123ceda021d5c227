#include "temudance/align/tokens.hpp"

#include <cctype>
#include <cmath>

#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/motion/kinematics.hpp"

namespace temu::align {

using motion::Joint;

Eigen::MatrixXd motion_tokens(const motion::JointSequence& seq, int stride) {
  if (stride < 1) throw Error(ErrorCode::kInvalidArgument, "token stride must be positive");
  static constexpr Joint kLimbs[] = {motion::kHead,      motion::kLeftElbow, motion::kRightElbow,
                                     motion::kLeftWrist, motion::kRightWrist, motion::kLeftKnee,
                                     motion::kRightKnee, motion::kLeftAnkle, motion::kRightAnkle};
  const motion::BodyAxes axes = motion::detect_axes(seq);
  const std::vector<double> yaw = motion::hip_yaw(seq, axes);
  const int n = (seq.frames() + stride - 1) / stride;
  const double dt = static_cast<double>(stride) / seq.fps();
  const int h = axes.height_axis;
  // Offsets from the first frame, scaled so a 25 cm excursion reads as 1.
  constexpr double kPoseScale = 4.0;
  const Eigen::Vector3d pelvis0 = seq.at(0, motion::kPelvis);
  const double wrists0 = (seq.at(0, motion::kLeftWrist) - seq.at(0, motion::kRightWrist)).norm();
  Eigen::MatrixXd tokens(n, kTokenDim);
  for (int i = 0; i < n; ++i) {
    const int f = i * stride;
    const int prev = std::max(0, f - stride);
    const Eigen::Vector3d pelvis = seq.at(f, motion::kPelvis);
    int c = 0;
    for (Joint j : kLimbs) {
      const Eigen::Vector3d rel = (seq.at(f, j) - pelvis) - (seq.at(0, j) - pelvis0);
      for (int a = 0; a < 3; ++a) tokens(i, c++) = kPoseScale * rel[a];
    }
    tokens(i, c++) = kPoseScale * (pelvis[h] - pelvis0[h]);
    const Eigen::Vector2d g = motion::ground_of(seq, axes, f, motion::kPelvis) -
                              motion::ground_of(seq, axes, prev, motion::kPelvis);
    tokens(i, c++) = f == prev ? 0.0 : g.norm() / dt;
    tokens(i, c++) = f == prev ? 0.0 : motion::wrap_angle(yaw[f] - yaw[prev]) / dt;
    tokens(i, c++) = kPoseScale * ((seq.at(f, motion::kLeftWrist) - seq.at(f, motion::kRightWrist)).norm() - wrists0);
    const double wl = (seq.at(f, motion::kLeftWrist) - seq.at(prev, motion::kLeftWrist)).norm();
    const double wr = (seq.at(f, motion::kRightWrist) - seq.at(prev, motion::kRightWrist)).norm();
    tokens(i, c++) = f == prev ? 0.0 : 0.5 * (wl + wr) / dt;
  }
  return tokens;
}

Eigen::MatrixXd music_tokens(const synth::MusicClip& music, int stride) {
  if (stride < 1) throw Error(ErrorCode::kInvalidArgument, "token stride must be positive");
  if (music.features.cols() != kTokenDim) {
    throw Error(ErrorCode::kDimension, "music features must be " + std::to_string(kTokenDim) + " wide");
  }
  const Eigen::Index n = (music.features.rows() + stride - 1) / stride;
  Eigen::MatrixXd tokens(n, kTokenDim);
  for (Eigen::Index i = 0; i < n; ++i) tokens.row(i) = music.features.row(i * stride);
  return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

Eigen::MatrixXd text_tokens(std::string_view text) {
  const auto words = tokenize(text);
  if (words.empty()) return Eigen::MatrixXd::Zero(1, kTokenDim);
  Eigen::MatrixXd tokens(static_cast<Eigen::Index>(words.size()), kTokenDim);
  for (std::size_t w = 0; w < words.size(); ++w) {
    Rng rng(fnv1a64(words[w]));
    Eigen::VectorXd v(kTokenDim);
    for (int c = 0; c < kTokenDim; ++c) v[c] = rng.normal();
    tokens.row(static_cast<Eigen::Index>(w)) = v.normalized().transpose();
  }
  return tokens;
}

}  // namespace temu::align
