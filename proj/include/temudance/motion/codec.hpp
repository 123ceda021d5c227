#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "temudance/motion/types.hpp"

namespace temu::motion {

struct UnpackedFrame {
  std::vector<Rotation6D> rotations;  // 52
  Eigen::Vector3d root_translation;
  std::array<double, kContactChannels> contacts{};
};

// Layout: [52*6 rotation channels | 3 translation | 4 contact].
Eigen::VectorXd pack_motion(std::span<const Rotation6D> rotations, std::span<const double> root_translation,
                            std::span<const double> contacts);
UnpackedFrame unpack_motion(const Eigen::Ref<const Eigen::VectorXd>& features);

// Gram-Schmidt on the two stored columns, third column by cross product.
Eigen::Matrix3d rot6d_to_matrix(const Rotation6D& r);
Rotation6D matrix_to_rot6d(const Eigen::Matrix3d& m);

}  // namespace temu::motion
