#include "temudance/motion/compact.hpp"

#include <algorithm>

#include "temudance/common/error.hpp"

namespace temu::motion {

const std::array<Joint, kCompactJoints>& compact_joint_order() {
  static const std::array<Joint, kCompactJoints> order = {
      kPelvis,    kHead,                              // torso
      kLeftElbow, kLeftWrist,                         // left arm
      kRightElbow, kRightWrist,                       // right arm
      kLeftKnee,  kLeftAnkle,                         // left leg
      kRightKnee, kRightAnkle,                        // right leg
      kLeftShoulder, kRightShoulder,                  // shoulder girdle
      kLeftHip,   kRightHip};                         // hip girdle
  return order;
}

int compact_slot(Joint joint) {
  const auto& order = compact_joint_order();
  const auto it = std::find(order.begin(), order.end(), joint);
  return it == order.end() ? -1 : static_cast<int>(it - order.begin());
}

void complete_derived_joints(Eigen::Matrix<double, kNumJoints, 3, Eigen::RowMajor>& frame) {
  const Eigen::RowVector3d pelvis = frame.row(kPelvis);
  const Eigen::RowVector3d head = frame.row(kHead);
  const Eigen::RowVector3d mid_shoulder = 0.5 * (frame.row(kLeftShoulder) + frame.row(kRightShoulder));
  const Eigen::RowVector3d trunk = mid_shoulder - pelvis;
  frame.row(kSpine1) = pelvis + 0.22 * trunk;
  frame.row(kSpine2) = pelvis + 0.50 * trunk;
  frame.row(kSpine3) = pelvis + 0.66 * trunk;
  frame.row(kNeck) = mid_shoulder + 0.25 * (head - mid_shoulder);
  frame.row(kLeftCollar) = 0.5 * (mid_shoulder + frame.row(kLeftShoulder));
  frame.row(kRightCollar) = 0.5 * (mid_shoulder + frame.row(kRightShoulder));
  const Eigen::RowVector3d foot_offset(0.0, -0.06, 0.12);
  frame.row(kLeftFoot) = frame.row(kLeftAnkle) + foot_offset;
  frame.row(kRightFoot) = frame.row(kRightAnkle) + foot_offset;
}

MotionClip to_compact_clip(const JointSequence& seq) {
  const int n = seq.frames();
  const auto& order = compact_joint_order();
  Eigen::MatrixXd features = Eigen::MatrixXd::Zero(n, kCompactDim);
  for (int f = 0; f < n; ++f) {
    for (int s = 0; s < kCompactJoints; ++s) features.block(f, 3 * s, 1, 3) = seq.at(f, order[s]).transpose();
  }
  // Contact: ankle within 3 cm of its lowest point and moving slower than 0.3 units/s.
  // Axis 1 is up for every sequence this layout is used with.
  const int contact0 = 3 * kCompactJoints;
  for (int side = 0; side < 2; ++side) {
    const Joint ankle = side == 0 ? kLeftAnkle : kRightAnkle;
    double floor = seq.at(0, ankle).y();
    for (int f = 1; f < n; ++f) floor = std::min(floor, seq.at(f, ankle).y());
    for (int f = 0; f < n; ++f) {
      const int prev = f == 0 ? std::min(1, n - 1) : f - 1;
      const double speed = (seq.at(f, ankle) - seq.at(prev, ankle)).norm() * seq.fps();
      const double flag = (seq.at(f, ankle).y() - floor < 0.03 && speed < 0.3) ? 1.0 : 0.0;
      features(f, contact0 + 2 * side) = flag;
      features(f, contact0 + 2 * side + 1) = flag;
    }
  }
  return MotionClip(std::move(features), seq.fps(), compact_layout());
}

JointSequence readout_positions(const MotionClip& clip) {
  if (clip.layout().name != compact_layout().name) {
    throw Error(ErrorCode::kInvalidArgument, "position readout requires the compact layout");
  }
  const int n = clip.frames();
  const auto& order = compact_joint_order();
  JointSequence::Positions pos(static_cast<Eigen::Index>(n) * kNumJoints, 3);
  Eigen::Matrix<double, kNumJoints, 3, Eigen::RowMajor> frame;
  for (int f = 0; f < n; ++f) {
    frame.setZero();
    for (int s = 0; s < kCompactJoints; ++s) frame.row(order[s]) = clip.features().block(f, 3 * s, 1, 3);
    complete_derived_joints(frame);
    pos.block(static_cast<Eigen::Index>(f) * kNumJoints, 0, kNumJoints, 3) = frame;
  }
  return JointSequence(std::move(pos), clip.fps());
}

}  // namespace temu::motion
