#pragma once

#include <array>

#include "temudance/motion/types.hpp"

namespace temu::motion {

// The compact layout stores 14 key joints as absolute positions; the other 8
// analysis joints are a fixed affine function of them. This keeps the
// features-to-positions readout linear, and every key joint the kinematic
// predicates touch is stored directly.
inline constexpr int kCompactJoints = 14;
inline constexpr int kCompactDim = kCompactJoints * 3 + kContactChannels;  // 46

const std::array<Joint, kCompactJoints>& compact_joint_order();
// Slot of a key joint in compact_joint_order(), or -1.
int compact_slot(Joint joint);

// Fills the 8 derived joints of one frame (rows indexed by Joint) from the key joints.
void complete_derived_joints(Eigen::Matrix<double, kNumJoints, 3, Eigen::RowMajor>& frame);

// Encodes a joint sequence into the compact layout; contacts are estimated
// from ankle height and speed.
MotionClip to_compact_clip(const JointSequence& seq);

// Linear readout from compact features back to the 22-joint skeleton.
JointSequence readout_positions(const MotionClip& clip);

}  // namespace temu::motion
