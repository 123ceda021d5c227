#include "temudance/motion/codec.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <string>

#include "temudance/common/error.hpp"

namespace temu::motion {

Eigen::VectorXd pack_motion(std::span<const Rotation6D> rotations, std::span<const double> root_translation,
                            std::span<const double> contacts) {
  if (rotations.size() != static_cast<std::size_t>(kRotationJoints)) {
    throw Error(ErrorCode::kDimension, "expected 52 rotations, got " + std::to_string(rotations.size()));
  }
  if (root_translation.size() != static_cast<std::size_t>(kTranslationChannels)) {
    throw Error(ErrorCode::kDimension, "expected 3 translation values, got " + std::to_string(root_translation.size()));
  }
  if (contacts.size() != static_cast<std::size_t>(kContactChannels)) {
    throw Error(ErrorCode::kDimension, "expected 4 contact flags, got " + std::to_string(contacts.size()));
  }
  for (double c : contacts) {
    if (c != 0.0 && c != 1.0) throw Error(ErrorCode::kInvalidArgument, "contact flags must be 0 or 1");
  }
  Eigen::VectorXd out(kFeatureDim);
  int k = 0;
  for (const auto& r : rotations) {
    for (double v : r.values) out[k++] = v;
  }
  for (double v : root_translation) out[k++] = v;
  for (double v : contacts) out[k++] = v;
  return out;
}

UnpackedFrame unpack_motion(const Eigen::Ref<const Eigen::VectorXd>& features) {
  if (features.size() != kFeatureDim) {
    throw Error(ErrorCode::kDimension, "expected 319 features, got " + std::to_string(features.size()));
  }
  UnpackedFrame out;
  out.rotations.resize(kRotationJoints);
  int k = 0;
  for (auto& r : out.rotations) {
    for (double& v : r.values) v = features[k++];
  }
  for (int i = 0; i < kTranslationChannels; ++i) out.root_translation[i] = features[k++];
  for (double& c : out.contacts) c = features[k++];
  return out;
}

Eigen::Matrix3d rot6d_to_matrix(const Rotation6D& r) {
  const Eigen::Vector3d a1(r.values[0], r.values[1], r.values[2]);
  const Eigen::Vector3d a2(r.values[3], r.values[4], r.values[5]);
  constexpr double kEps = 1e-12;
  const double n1 = a1.norm();
  if (!(n1 > kEps)) throw Error(ErrorCode::kSingularInput, "6D rotation has a zero first column");
  const Eigen::Vector3d b1 = a1 / n1;
  const Eigen::Vector3d u2 = a2 - b1.dot(a2) * b1;
  const double n2 = u2.norm();
  if (!(n2 > kEps * std::max(1.0, a2.norm()))) {
    throw Error(ErrorCode::kSingularInput, "6D rotation columns are parallel or zero");
  }
  const Eigen::Vector3d b2 = u2 / n2;
  Eigen::Matrix3d m;
  m.col(0) = b1;
  m.col(1) = b2;
  m.col(2) = b1.cross(b2);
  return m;
}

Rotation6D matrix_to_rot6d(const Eigen::Matrix3d& m) {
  Rotation6D r;
  for (int i = 0; i < 3; ++i) {
    r.values[i] = m(i, 0);
    r.values[3 + i] = m(i, 1);
  }
  return r;
}

}  // namespace temu::motion
