#pragma once

#include <cmath>
#include <functional>

#include "temudance/motion/types.hpp"

namespace temu::testing {

using Frame = Eigen::Matrix<double, motion::kNumJoints, 3, Eigen::RowMajor>;

// Upright stick figure: head 0.6 above pelvis on axis 1, shoulders 0.4 apart.
inline Frame stick_frame() {
  Frame f = Frame::Zero();
  for (int j = 0; j < motion::kNumJoints; ++j) f.row(j) << 0.0, 1.0, 0.0;
  f.row(motion::kPelvis) << 0.0, 1.0, 0.0;
  f.row(motion::kHead) << 0.0, 1.6, 0.0;
  f.row(motion::kLeftShoulder) << 0.2, 1.45, 0.0;
  f.row(motion::kRightShoulder) << -0.2, 1.45, 0.0;
  f.row(motion::kLeftHip) << 0.1, 0.95, 0.0;
  f.row(motion::kRightHip) << -0.1, 0.95, 0.0;
  f.row(motion::kLeftWrist) << 0.25, 0.9, 0.0;
  f.row(motion::kRightWrist) << -0.25, 0.9, 0.0;
  f.row(motion::kLeftAnkle) << 0.1, 0.1, 0.0;
  f.row(motion::kRightAnkle) << -0.1, 0.1, 0.0;
  return f;
}

// Builds a sequence by letting `edit` modify a copy of the stick frame per frame index.
inline motion::JointSequence make_sequence(int frames, const std::function<void(int, Frame&)>& edit, int fps = 30) {
  motion::JointSequence::Positions pos(static_cast<Eigen::Index>(frames) * motion::kNumJoints, 3);
  for (int f = 0; f < frames; ++f) {
    Frame fr = stick_frame();
    if (edit) edit(f, fr);
    pos.block(static_cast<Eigen::Index>(f) * motion::kNumJoints, 0, motion::kNumJoints, 3) = fr;
  }
  return motion::JointSequence(std::move(pos), fps);
}

// Rotates the hips about the pelvis so the left->right hip vector has ground yaw `yaw` (radians,
// measured atan2(z, x)).
inline void set_hip_yaw(Frame& f, double yaw) {
  const double r = 0.1;
  f.row(motion::kRightHip) << r * std::cos(yaw), 0.95, r * std::sin(yaw);
  f.row(motion::kLeftHip) << -r * std::cos(yaw), 0.95, -r * std::sin(yaw);
}

}  // namespace temu::testing
