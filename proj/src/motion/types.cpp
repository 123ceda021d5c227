#include "temudance/motion/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "temudance/common/error.hpp"
#include "temudance/motion/compact.hpp"

namespace temu::motion {

const std::vector<std::string>& default_joint_names() {
  static const std::vector<std::string> names = {
      "pelvis",         "left_hip",      "right_hip",      "spine1",      "left_knee",   "right_knee",
      "spine2",         "left_ankle",    "right_ankle",    "spine3",      "left_foot",   "right_foot",
      "neck",           "left_collar",   "right_collar",   "head",        "left_shoulder",
      "right_shoulder", "left_elbow",    "right_elbow",    "left_wrist",  "right_wrist"};
  return names;
}

std::vector<int> FeatureLayout::non_contact_channels() const {
  std::vector<int> out;
  out.reserve(dim);
  for (int c = 0; c < dim; ++c) {
    if (std::find(contact_channels.begin(), contact_channels.end(), c) == contact_channels.end()) out.push_back(c);
  }
  return out;
}

namespace {

std::vector<int> joint_channels(std::initializer_list<int> joints) {
  std::vector<int> out;
  for (int j : joints) {
    for (int c = 0; c < 6; ++c) out.push_back(6 * j + c);
  }
  return out;
}

FeatureLayout make_canonical() {
  FeatureLayout l;
  l.name = "canonical319";
  l.dim = kFeatureDim;
  auto torso = joint_channels({0, 3, 6, 9, 12, 15});
  for (int c = 0; c < kTranslationChannels; ++c) torso.push_back(kRotationChannels + c);
  auto left_leg = joint_channels({1, 4, 7, 10});
  auto right_leg = joint_channels({2, 5, 8, 11});
  const int contact0 = kRotationChannels + kTranslationChannels;
  left_leg.push_back(contact0 + 0);
  left_leg.push_back(contact0 + 1);
  right_leg.push_back(contact0 + 2);
  right_leg.push_back(contact0 + 3);
  std::vector<int> left_hand;
  std::vector<int> right_hand;
  for (int j = 22; j < 37; ++j)
    for (int c = 0; c < 6; ++c) left_hand.push_back(6 * j + c);
  for (int j = 37; j < 52; ++j)
    for (int c = 0; c < 6; ++c) right_hand.push_back(6 * j + c);
  l.groups = {torso,
              joint_channels({13, 16, 18, 20}),
              joint_channels({14, 17, 19, 21}),
              left_leg,
              right_leg,
              left_hand,
              right_hand};
  l.contact_channels = {contact0, contact0 + 1, contact0 + 2, contact0 + 3};
  // No forward kinematics at this layer: root translation stands in for the feet.
  const std::array<int, 3> root{kRotationChannels, kRotationChannels + 1, kRotationChannels + 2};
  l.foot_channels = {root, root, root, root};
  return l;
}

FeatureLayout make_compact() {
  FeatureLayout l;
  l.name = "compact46";
  l.dim = kCompactDim;
  const auto& order = compact_joint_order();
  for (int g = 0; g < 7; ++g) {
    std::vector<int> group;
    for (int c = 0; c < 6; ++c) group.push_back(6 * g + c);
    l.groups.push_back(group);
  }
  const int contact0 = 3 * static_cast<int>(order.size());
  l.groups[3].push_back(contact0 + 0);
  l.groups[3].push_back(contact0 + 1);
  l.groups[4].push_back(contact0 + 2);
  l.groups[4].push_back(contact0 + 3);
  l.contact_channels = {contact0, contact0 + 1, contact0 + 2, contact0 + 3};
  const int left_ankle = 3 * compact_slot(kLeftAnkle);
  const int right_ankle = 3 * compact_slot(kRightAnkle);
  l.foot_channels = {{left_ankle, left_ankle + 1, left_ankle + 2},
                     {left_ankle, left_ankle + 1, left_ankle + 2},
                     {right_ankle, right_ankle + 1, right_ankle + 2},
                     {right_ankle, right_ankle + 1, right_ankle + 2}};
  return l;
}

}  // namespace

const FeatureLayout& canonical_layout() {
  static const FeatureLayout layout = make_canonical();
  return layout;
}

const FeatureLayout& compact_layout() {
  static const FeatureLayout layout = make_compact();
  return layout;
}

const FeatureLayout& layout_by_name(std::string_view name) {
  if (name == canonical_layout().name) return canonical_layout();
  if (name == compact_layout().name) return compact_layout();
  throw Error(ErrorCode::kInvalidArgument, "unknown feature layout '" + std::string(name) + "'");
}

MotionClip::MotionClip(Eigen::MatrixXd features, int fps, const FeatureLayout& layout)
    : features_(std::move(features)), fps_(fps), layout_(&layout) {
  if (features_.cols() != layout.dim) {
    throw Error(ErrorCode::kDimension, "motion clip has " + std::to_string(features_.cols()) +
                                           " channels, layout '" + layout.name + "' expects " +
                                           std::to_string(layout.dim));
  }
  if (features_.rows() < 1) throw Error(ErrorCode::kDimension, "motion clip needs at least one frame");
  if (fps_ <= 0) throw Error(ErrorCode::kInvalidArgument, "fps must be positive");
  if (!features_.allFinite()) throw Error(ErrorCode::kInvalidArgument, "motion clip contains non-finite values");
  for (int c : layout.contact_channels) {
    const double lo = features_.col(c).minCoeff();
    const double hi = features_.col(c).maxCoeff();
    if (lo < 0.0 || hi > 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "contact channel " + std::to_string(c) + " leaves [0,1]");
    }
  }
}

JointSequence::JointSequence(Positions positions, int fps, std::vector<std::string> joint_names)
    : positions_(std::move(positions)), fps_(fps), names_(std::move(joint_names)) {
  if (positions_.rows() < kNumJoints || positions_.rows() % kNumJoints != 0) {
    throw Error(ErrorCode::kDimension, "joint sequence needs frames*22 rows, got " + std::to_string(positions_.rows()));
  }
  if (fps_ <= 0) throw Error(ErrorCode::kInvalidArgument, "fps must be positive");
  if (!positions_.allFinite()) throw Error(ErrorCode::kInvalidArgument, "joint positions contain non-finite values");
  if (names_.size() != static_cast<std::size_t>(kNumJoints)) {
    throw Error(ErrorCode::kDimension, "joint name table must have 22 entries");
  }
  if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "joint names must be unique");
  }
  const auto& canon = default_joint_names();
  for (int j = 0; j < kNumJoints; ++j) {
    const auto it = std::find(names_.begin(), names_.end(), canon[j]);
    canonical_to_index_[j] = it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
  }
  for (Joint required : {kPelvis, kHead, kLeftHip, kRightHip, kLeftShoulder, kRightShoulder, kLeftWrist,
                         kRightWrist, kLeftAnkle, kRightAnkle}) {
    if (canonical_to_index_[required] < 0) {
      throw Error(ErrorCode::kInvalidArgument, "joint table lacks required joint '" + canon[required] + "'");
    }
  }
}

int JointSequence::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error(ErrorCode::kInvalidArgument, "no joint named '" + std::string(name) + "'");
  return static_cast<int>(it - names_.begin());
}

Eigen::Vector3d JointSequence::at(int frame, Joint joint) const {
  const int idx = canonical_to_index_[joint];
  if (idx < 0) throw Error(ErrorCode::kInvalidArgument, "joint '" + default_joint_names()[joint] + "' not present");
  return at_index(frame, idx);
}

Eigen::Vector3d JointSequence::at_index(int frame, int joint_index) const {
  return positions_.row(static_cast<Eigen::Index>(frame) * kNumJoints + joint_index).transpose();
}

JointSequence JointSequence::scaled(double factor) const {
  return JointSequence(positions_ * factor, fps_, names_);
}

}  // namespace temu::motion
