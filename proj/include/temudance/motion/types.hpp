#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace temu::motion {

inline constexpr int kRotationJoints = 52;
inline constexpr int kRotationChannels = kRotationJoints * 6;  // 312
inline constexpr int kTranslationChannels = 3;
inline constexpr int kContactChannels = 4;
inline constexpr int kFeatureDim = kRotationChannels + kTranslationChannels + kContactChannels;
static_assert(kFeatureDim == 319);

inline constexpr int kNumJoints = 22;
inline constexpr int kDefaultFps = 30;

// Analysis skeleton ordering (SMPL body joints).
enum Joint : int {
  kPelvis = 0,
  kLeftHip = 1,
  kRightHip = 2,
  kSpine1 = 3,
  kLeftKnee = 4,
  kRightKnee = 5,
  kSpine2 = 6,
  kLeftAnkle = 7,
  kRightAnkle = 8,
  kSpine3 = 9,
  kLeftFoot = 10,
  kRightFoot = 11,
  kNeck = 12,
  kLeftCollar = 13,
  kRightCollar = 14,
  kHead = 15,
  kLeftShoulder = 16,
  kRightShoulder = 17,
  kLeftElbow = 18,
  kRightElbow = 19,
  kLeftWrist = 20,
  kRightWrist = 21,
};

const std::vector<std::string>& default_joint_names();

// Channel partition of a feature vector: M body-part groups covering every
// non-contact and contact channel exactly once, plus the contact channels and,
// per contact, the three channels whose velocity counts as foot sliding.
struct FeatureLayout {
  std::string name;
  int dim = 0;
  std::vector<std::vector<int>> groups;
  std::vector<int> contact_channels;
  std::vector<std::array<int, 3>> foot_channels;

  std::vector<int> non_contact_channels() const;
};

// The full 319-channel layout: 52 joints in 6D, root translation, 4 contacts.
const FeatureLayout& canonical_layout();
// Reduced layout used at desk scale: 7 groups of two joints (absolute xyz)
// followed by 4 contact channels, 46 channels total.
const FeatureLayout& compact_layout();
const FeatureLayout& layout_by_name(std::string_view name);

struct Rotation6D {
  std::array<double, 6> values{};  // first two rotation-matrix columns, column-major
  friend bool operator==(const Rotation6D&, const Rotation6D&) = default;
};

class MotionClip {
 public:
  // Rows are frames. Validates finiteness and the [0,1] range of contact channels.
  explicit MotionClip(Eigen::MatrixXd features, int fps = kDefaultFps,
                      const FeatureLayout& layout = canonical_layout());

  int frames() const { return static_cast<int>(features_.rows()); }
  int dim() const { return static_cast<int>(features_.cols()); }
  int fps() const { return fps_; }
  const Eigen::MatrixXd& features() const { return features_; }
  const FeatureLayout& layout() const { return *layout_; }

 private:
  Eigen::MatrixXd features_;
  int fps_;
  const FeatureLayout* layout_;
};

struct BodyAxes {
  int height_axis = 1;
  std::array<int, 2> ground_axes{0, 2};
  friend bool operator==(const BodyAxes&, const BodyAxes&) = default;
};

class JointSequence {
 public:
  using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

  // positions has frames*22 rows; row f*22 + j holds joint j at frame f.
  JointSequence(Positions positions, int fps = kDefaultFps,
                std::vector<std::string> joint_names = default_joint_names());

  int frames() const { return static_cast<int>(positions_.rows() / kNumJoints); }
  int fps() const { return fps_; }
  const std::vector<std::string>& joint_names() const { return names_; }
  const Positions& positions() const { return positions_; }

  // Index of a named joint; throws kInvalidArgument if absent.
  int index_of(std::string_view name) const;
  // Position of a canonical joint, resolved through the joint-name table.
  Eigen::Vector3d at(int frame, Joint joint) const;
  Eigen::Vector3d at_index(int frame, int joint_index) const;

  JointSequence scaled(double factor) const;

 private:
  Positions positions_;
  int fps_;
  std::vector<std::string> names_;
  std::array<int, kNumJoints> canonical_to_index_{};
};

}  // namespace temu::motion
