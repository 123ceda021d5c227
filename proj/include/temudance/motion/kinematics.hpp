#pragma once

#include <Eigen/Core>

#include <vector>

#include "temudance/motion/types.hpp"

namespace temu::motion {

// Height axis = coordinate with the largest mean positive head-minus-pelvis
// offset; ground axes are the remaining two in ascending order.
BodyAxes detect_axes(const JointSequence& seq);

double height_of(const JointSequence& seq, const BodyAxes& axes, int frame, Joint joint);
Eigen::Vector2d ground_of(const JointSequence& seq, const BodyAxes& axes, int frame, Joint joint);

// Mean ground-plane distance between the shoulders (sigma_s).
double shoulder_width(const JointSequence& seq, const BodyAxes& axes);

// Per-frame yaw of the left-hip -> right-hip ground vector, radians, via
// atan2(second ground component, first ground component). A degenerate frame
// reuses the previous yaw; a degenerate first frame throws kDegenerateYaw.
std::vector<double> hip_yaw(const JointSequence& seq, const BodyAxes& axes);

// Sum of |wrapped frame-to-frame yaw change|, in degrees.
double cumulative_yaw(const JointSequence& seq, const BodyAxes& axes);

// Wraps an angle to [-pi, pi].
double wrap_angle(double radians);

}  // namespace temu::motion
