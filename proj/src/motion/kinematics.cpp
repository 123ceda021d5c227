#include "temudance/motion/kinematics.hpp"

#include <cmath>
#include <numbers>

#include "temudance/common/error.hpp"

namespace temu::motion {

BodyAxes detect_axes(const JointSequence& seq) {
  Eigen::Vector3d mean_offset = Eigen::Vector3d::Zero();
  for (int f = 0; f < seq.frames(); ++f) mean_offset += seq.at(f, kHead) - seq.at(f, kPelvis);
  mean_offset /= seq.frames();
  int best = 0;
  for (int a = 1; a < 3; ++a) {
    if (mean_offset[a] > mean_offset[best]) best = a;
  }
  if (!(mean_offset[best] > 0.0)) {
    throw Error(ErrorCode::kAmbiguousAxes, "no coordinate has a positive mean head-minus-pelvis offset");
  }
  BodyAxes axes;
  axes.height_axis = best;
  int k = 0;
  for (int a = 0; a < 3; ++a) {
    if (a != best) axes.ground_axes[k++] = a;
  }
  return axes;
}

double height_of(const JointSequence& seq, const BodyAxes& axes, int frame, Joint joint) {
  return seq.at(frame, joint)[axes.height_axis];
}

Eigen::Vector2d ground_of(const JointSequence& seq, const BodyAxes& axes, int frame, Joint joint) {
  const Eigen::Vector3d p = seq.at(frame, joint);
  return {p[axes.ground_axes[0]], p[axes.ground_axes[1]]};
}

double shoulder_width(const JointSequence& seq, const BodyAxes& axes) {
  double sum = 0.0;
  for (int f = 0; f < seq.frames(); ++f) {
    sum += (ground_of(seq, axes, f, kLeftShoulder) - ground_of(seq, axes, f, kRightShoulder)).norm();
  }
  return sum / seq.frames();
}

double wrap_angle(double radians) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::fmod(radians + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w - std::numbers::pi;
}

std::vector<double> hip_yaw(const JointSequence& seq, const BodyAxes& axes) {
  std::vector<double> yaw(seq.frames());
  for (int f = 0; f < seq.frames(); ++f) {
    const Eigen::Vector2d v = ground_of(seq, axes, f, kRightHip) - ground_of(seq, axes, f, kLeftHip);
    if (v.norm() < 1e-12) {
      if (f == 0) throw Error(ErrorCode::kDegenerateYaw, "hip vector has zero ground-plane length at frame 0");
      yaw[f] = yaw[f - 1];
      continue;
    }
    yaw[f] = std::atan2(v[1], v[0]);
  }
  return yaw;
}

double cumulative_yaw(const JointSequence& seq, const BodyAxes& axes) {
  if (seq.frames() < 2) throw Error(ErrorCode::kSequenceTooShort, "cumulative yaw needs at least 2 frames");
  const auto yaw = hip_yaw(seq, axes);
  double total = 0.0;
  for (std::size_t f = 1; f < yaw.size(); ++f) total += std::abs(wrap_angle(yaw[f] - yaw[f - 1]));
  return total * 180.0 / std::numbers::pi;
}

}  // namespace temu::motion
