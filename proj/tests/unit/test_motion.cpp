#include "doctest.h"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/motion/codec.hpp"
#include "temudance/motion/compact.hpp"
#include "temudance/motion/io.hpp"
#include "temudance/motion/kinematics.hpp"

using namespace temu;
using namespace temu::motion;
using temu::testing::Frame;
using temu::testing::make_sequence;
using temu::testing::set_hip_yaw;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Rotation6D random_rot6d(Rng& rng) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  const Eigen::Matrix3d m = Eigen::AngleAxisd(rng.uniform(-3.0, 3.0), axis).toRotationMatrix();
  return matrix_to_rot6d(m);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("feature layout sizes") {
  CHECK(kFeatureDim == 319);
  for (const FeatureLayout* layout : {&canonical_layout(), &compact_layout()}) {
    CHECK(layout->groups.size() == 7);
    std::vector<int> seen(layout->dim, 0);
    for (const auto& g : layout->groups)
      for (int c : g) seen[c]++;
    for (int s : seen) CHECK(s == 1);
    CHECK(layout->contact_channels.size() == 4);
    CHECK(layout->non_contact_channels().size() == static_cast<std::size_t>(layout->dim - 4));
  }
  CHECK(compact_layout().dim == 46);
}

TEST_CASE("pack_motion of identity rotations") {
  std::vector<Rotation6D> rots(52, Rotation6D{{1, 0, 0, 0, 1, 0}});
  const double t[3] = {0, 0, 0};
  const double c[4] = {0, 0, 0, 0};
  const Eigen::VectorXd v = pack_motion(rots, t, c);
  REQUIRE(v.size() == 319);
  for (int j = 0; j < 52; ++j) {
    const double expect[6] = {1, 0, 0, 0, 1, 0};
    for (int k = 0; k < 6; ++k) CHECK(v[j * 6 + k] == expect[k]);
  }
  CHECK(v.tail(7).isZero(0.0));
}

TEST_CASE("pack/unpack round trip is exact") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Rotation6D> rots;
    for (int j = 0; j < 52; ++j) {
      Rotation6D r;
      for (double& x : r.values) x = rng.uniform(-2.0, 2.0);
      rots.push_back(r);
    }
    const double t[3] = {rng.normal(), rng.normal(), rng.normal()};
    const double c[4] = {double(rng.below(2)), double(rng.below(2)), double(rng.below(2)), double(rng.below(2))};
    const auto u = unpack_motion(pack_motion(rots, t, c));
    for (int j = 0; j < 52; ++j) CHECK(u.rotations[j] == rots[j]);
    for (int k = 0; k < 3; ++k) CHECK(u.root_translation[k] == t[k]);
    for (int k = 0; k < 4; ++k) CHECK(u.contacts[k] == c[k]);
  }
}

TEST_CASE("pack_motion rejects wrong cardinalities") {
  std::vector<Rotation6D> rots(51);
  const double t[3] = {0, 0, 0};
  const double c[4] = {0, 0, 0, 0};
  CHECK(code_of([&] { pack_motion(rots, t, c); }) == ErrorCode::kDimension);
  rots.resize(52);
  const double t2[2] = {0, 0};
  CHECK(code_of([&] { pack_motion(rots, t2, c); }) == ErrorCode::kDimension);
  const double c3[3] = {0, 0, 0};
  CHECK(code_of([&] { pack_motion(rots, t, c3); }) == ErrorCode::kDimension);
}

TEST_CASE("rot6d_to_matrix examples") {
  CHECK(rot6d_to_matrix(Rotation6D{{1, 0, 0, 0, 1, 0}}).isApprox(Eigen::Matrix3d::Identity(), 1e-12));

  // 90 degrees about the third axis: first column (cos, sin, 0), second (-sin, cos, 0).
  const Eigen::Matrix3d r = rot6d_to_matrix(Rotation6D{{0, 1, 0, -1, 0, 0}});
  Eigen::Matrix3d expect;
  expect << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((r - expect).cwiseAbs().maxCoeff() < 1e-6);

  CHECK(code_of([] { rot6d_to_matrix(Rotation6D{{0, 0, 0, 0, 1, 0}}); }) == ErrorCode::kSingularInput);
  CHECK(code_of([] { rot6d_to_matrix(Rotation6D{{1, 0, 0, 2, 0, 0}}); }) == ErrorCode::kSingularInput);
}

TEST_CASE("rot6d_to_matrix always yields a proper rotation") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Rotation6D r;
    for (double& x : r.values) x = rng.uniform(-1.0, 1.0);
    const Eigen::Matrix3d m = rot6d_to_matrix(r);
    CHECK((m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(m.determinant() - 1.0) < 1e-6);
  }
}

TEST_CASE("rot6d re-encoding of orthonormal columns") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Rotation6D r = random_rot6d(rng);
    const Rotation6D back = matrix_to_rot6d(rot6d_to_matrix(r));
    for (int k = 0; k < 6; ++k) CHECK(std::abs(back.values[k] - r.values[k]) < 1e-6);
  }
}

TEST_CASE("detect_axes") {
  const auto seq = make_sequence(5, nullptr);
  CHECK(detect_axes(seq).height_axis == 1);
  CHECK(detect_axes(seq).ground_axes == std::array<int, 2>{0, 2});

  // Same skeleton with axes 1 and 2 swapped.
  JointSequence::Positions p = seq.positions();
  p.col(1).swap(p.col(2));
  const JointSequence permuted(p);
  CHECK(detect_axes(permuted).height_axis == 2);
  CHECK(detect_axes(permuted).ground_axes == std::array<int, 2>{0, 1});

  // Noisy: offset 0.6 +- 0.01 on axis 1, +-0.01 elsewhere.
  Rng rng(3);
  const auto noisy = make_sequence(60, [&](int, Frame& f) {
    f.row(kHead) = f.row(kPelvis) + Eigen::RowVector3d(rng.uniform(-0.01, 0.01), 0.6 + rng.uniform(-0.01, 0.01),
                                                       rng.uniform(-0.01, 0.01));
  });
  CHECK(detect_axes(noisy).height_axis == 1);

  // Uniform scaling leaves the result unchanged.
  CHECK(detect_axes(noisy.scaled(3.7)) == detect_axes(noisy));

  const auto flat = make_sequence(3, [](int, Frame& f) { f.row(kHead) = f.row(kPelvis) - Eigen::RowVector3d(0.1, 0.1, 0.1); });
  CHECK(code_of([&] { detect_axes(flat); }) == ErrorCode::kAmbiguousAxes);
}

TEST_CASE("shoulder_width") {
  const BodyAxes axes;
  const auto constant = make_sequence(4, nullptr);
  CHECK(shoulder_width(constant, axes) == doctest::Approx(0.4).epsilon(1e-12));

  const auto alternating = make_sequence(6, [](int i, Frame& f) {
    const double half = (i % 2 == 0) ? 0.15 : 0.25;
    f(kLeftShoulder, 0) = half;
    f(kRightShoulder, 0) = -half;
  });
  CHECK(shoulder_width(alternating, axes) == doctest::Approx(0.4).epsilon(1e-12));

  const auto vertical = make_sequence(3, [](int, Frame& f) {
    f.row(kLeftShoulder) << 0.0, 1.6, 0.0;
    f.row(kRightShoulder) << 0.0, 1.3, 0.0;
  });
  CHECK(shoulder_width(vertical, axes) == 0.0);

  CHECK(shoulder_width(alternating.scaled(2.5), axes) == doctest::Approx(2.5 * 0.4).epsilon(1e-12));
}

TEST_CASE("cumulative_yaw") {
  const BodyAxes axes;
  CHECK(cumulative_yaw(make_sequence(30, nullptr), axes) == 0.0);

  // 90 deg/s for 2 s at 30 fps: 61 samples spanning 2 s.
  const auto spin = make_sequence(61, [](int i, Frame& f) { set_hip_yaw(f, 90.0 * kDeg * i / 30.0); });
  CHECK(std::abs(cumulative_yaw(spin, axes) - 180.0) < 0.5);

  const double steps[4] = {0.0, 30.0, 0.0, 30.0};
  const auto osc = make_sequence(4, [&](int i, Frame& f) { set_hip_yaw(f, steps[i] * kDeg); });
  CHECK(cumulative_yaw(osc, axes) == doctest::Approx(90.0).epsilon(1e-9));

  CHECK(code_of([&] { cumulative_yaw(make_sequence(1, nullptr), axes); }) == ErrorCode::kSequenceTooShort);

  // Degenerate first frame raises; later degenerate frames reuse the previous yaw.
  const auto collapsed0 = make_sequence(3, [](int i, Frame& f) {
    if (i == 0) f.row(kRightHip) = f.row(kLeftHip);
  });
  CHECK(code_of([&] { cumulative_yaw(collapsed0, axes); }) == ErrorCode::kDegenerateYaw);
  const auto collapsed1 = make_sequence(3, [](int i, Frame& f) {
    set_hip_yaw(f, i * 10.0 * kDeg);
    if (i == 1) f.row(kRightHip) = f.row(kLeftHip);
  });
  CHECK(cumulative_yaw(collapsed1, axes) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("cumulative_yaw is invariant under a rigid in-plane rotation") {
  Rng rng(19);
  std::vector<double> yaw(40);
  for (double& y : yaw) y = rng.uniform(-3.0, 3.0);
  const auto base = make_sequence(40, [&](int i, Frame& f) { set_hip_yaw(f, yaw[i]); });
  const auto shifted = make_sequence(40, [&](int i, Frame& f) { set_hip_yaw(f, yaw[i] + 1.234); });
  CHECK(std::abs(cumulative_yaw(base, BodyAxes{}) - cumulative_yaw(shifted, BodyAxes{})) < 1e-6);
}

TEST_CASE("JointSequence validation") {
  JointSequence::Positions p(22, 3);
  p.setZero();
  p(0, 0) = std::nan("");
  CHECK(code_of([&] { JointSequence s(p); }) == ErrorCode::kInvalidArgument);
  auto names = default_joint_names();
  names[3] = names[4];
  CHECK_THROWS_AS(JointSequence(JointSequence::Positions::Zero(22, 3), 30, names), Error);
  CHECK_THROWS_AS(JointSequence(JointSequence::Positions::Zero(0, 3)), Error);
}

TEST_CASE("MotionClip validation") {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(3, 319);
  CHECK_NOTHROW(MotionClip{f});
  f(1, 318) = 1.5;
  CHECK_THROWS_AS(MotionClip{f}, Error);
  CHECK_THROWS_AS(MotionClip(Eigen::MatrixXd::Zero(3, 318)), Error);
}

TEST_CASE("motion JSON round trip") {
  Rng rng(2);
  const auto seq = make_sequence(4, [&](int, Frame& f) { f(kHead, 0) += rng.normal() * 1e-3; });
  const auto back = joint_sequence_from_json(to_json(seq));
  CHECK(back.positions() == seq.positions());
  CHECK(back.fps() == seq.fps());
  const Json j = to_json(seq);
  CHECK(j.at("positions").size() == 4u * 22u * 3u);

  Eigen::MatrixXd feats = Eigen::MatrixXd::Random(2, 319);
  feats.rightCols(4).setConstant(0.5);
  const MotionClip clip(feats);
  const Json cj = to_json(clip);
  CHECK_FALSE(cj.contains("layout"));
  CHECK(motion_clip_from_json(cj).features() == feats);
  // Text round trip through the serialised form.
  CHECK(motion_clip_from_json(Json::parse(cj.dump())).features() == feats);
}

TEST_CASE("compact encoding reads back the key joints exactly") {
  Rng rng(8);
  const auto seq = make_sequence(10, [&](int, Frame& f) {
    for (int j = 0; j < kNumJoints; ++j) f.row(j) += Eigen::RowVector3d(rng.normal(), rng.normal(), rng.normal()) * 0.01;
    complete_derived_joints(f);
  });
  const MotionClip clip = to_compact_clip(seq);
  CHECK(clip.dim() == kCompactDim);
  const JointSequence back = readout_positions(clip);
  CHECK((back.positions() - seq.positions()).cwiseAbs().maxCoeff() < 1e-12);
}
