#include "temudance/synth/synth.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "temudance/common/error.hpp"
#include "temudance/common/json_io.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/motion/compact.hpp"
#include "temudance/motion/io.hpp"

namespace temu::synth {

using motion::Joint;
using motion::JointSequence;
using Frame = Eigen::Matrix<double, motion::kNumJoints, 3, Eigen::RowMajor>;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kJitter = 0.002;
constexpr double kGravity = 9.81;
// Action happens inside [kLead, duration - kLead]; the first 10 frames stay at rest.
constexpr double kLead = 0.5;

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

// 0 outside [a, b], smooth ramps of length `ramp` at both ends, 1 in between.
double plateau(double t, double a, double b, double ramp) {
  if (t <= a || t >= b) return 0.0;
  return std::min(smoothstep((t - a) / ramp), smoothstep((b - t) / ramp));
}

Frame rest_pose() {
  Frame f = Frame::Zero();
  f.row(motion::kPelvis) << 0.0, 0.95, 0.0;
  f.row(motion::kHead) << 0.0, 1.60, 0.02;
  f.row(motion::kLeftShoulder) << 0.18, 1.40, 0.0;
  f.row(motion::kRightShoulder) << -0.18, 1.40, 0.0;
  f.row(motion::kLeftElbow) << 0.20, 1.12, 0.0;
  f.row(motion::kRightElbow) << -0.20, 1.12, 0.0;
  f.row(motion::kLeftWrist) << 0.22, 0.86, 0.02;
  f.row(motion::kRightWrist) << -0.22, 0.86, 0.02;
  f.row(motion::kLeftHip) << 0.13, 0.88, 0.0;
  f.row(motion::kRightHip) << -0.13, 0.88, 0.0;
  f.row(motion::kLeftKnee) << 0.10, 0.50, 0.01;
  f.row(motion::kRightKnee) << -0.10, 0.50, 0.01;
  f.row(motion::kLeftAnkle) << 0.10, 0.08, 0.0;
  f.row(motion::kRightAnkle) << -0.10, 0.08, 0.0;
  return f;
}

void lerp_row(Frame& f, Joint j, const Eigen::RowVector3d& target, double w) {
  f.row(j) = (1.0 - w) * f.row(j) + w * target;
}

// Key joints of one frame in the body's local frame, plus the global yaw and
// translation to apply afterwards.
struct Pose {
  Frame key = rest_pose();
  double yaw = 0.0;
  Eigen::RowVector3d offset = Eigen::RowVector3d::Zero();
};

Pose pose_at(const PrimitiveSpec& spec, double t) {
  Pose pose;
  Frame& f = pose.key;
  const double t0 = kLead;
  const double t1 = spec.duration_s - kLead;
  const double span = t1 - t0;
  const double m = spec.magnitude;

  switch (spec.primitive) {
    case Primitive::kIdle:
      break;

    case Primitive::kWalkMove: {
      pose.offset.z() = m * smoothstep((t - t0) / span);
      const double e = plateau(t, t0, t1, 0.25);
      const double phase = 2.0 * kPi * 1.0 * (t - t0);
      const double stride = 0.15 * e * std::sin(phase);
      const double lift_l = 0.06 * e * std::max(0.0, std::cos(phase));
      const double lift_r = 0.06 * e * std::max(0.0, -std::cos(phase));
      f(motion::kLeftAnkle, 2) += stride;
      f(motion::kRightAnkle, 2) -= stride;
      f(motion::kLeftAnkle, 1) += lift_l;
      f(motion::kRightAnkle, 1) += lift_r;
      f(motion::kLeftKnee, 2) += 0.5 * stride + 0.5 * lift_l;
      f(motion::kRightKnee, 2) += -0.5 * stride + 0.5 * lift_r;
      f(motion::kLeftKnee, 1) += 0.5 * lift_l;
      f(motion::kRightKnee, 1) += 0.5 * lift_r;
      const double swing = 0.04 * e * std::sin(phase);
      f(motion::kLeftWrist, 2) -= swing;
      f(motion::kRightWrist, 2) += swing;
      f(motion::kLeftElbow, 2) -= 0.5 * swing;
      f(motion::kRightElbow, 2) += 0.5 * swing;
      const double bob = 0.01 * e * std::cos(2.0 * phase);
      for (Joint j : {motion::kPelvis, motion::kHead, motion::kLeftShoulder, motion::kRightShoulder, motion::kLeftHip,
                      motion::kRightHip, motion::kLeftElbow, motion::kRightElbow, motion::kLeftWrist,
                      motion::kRightWrist}) {
        f(j, 1) += bob;
      }
      break;
    }

    case Primitive::kJump: {
      const double tc = 0.5 * (t0 + t1);
      const double tau = std::sqrt(2.0 * m / kGravity);
      double y = 0.0;
      if (std::abs(t - tc) < tau) {
        const double u = (t - tc) / tau;
        y = m * (1.0 - u * u);
      }
      // Preparatory and landing dips.
      const double prep = tc - tau - 0.2;
      const double land = tc + tau + 0.2;
      for (double center : {prep, land}) {
        if (std::abs(t - center) < 0.2) {
          const double s = std::cos(0.5 * kPi * (t - center) / 0.2);
          y -= 0.05 * s * s;
        }
      }
      pose.offset.y() = y;
      break;
    }

    case Primitive::kTurn:
      pose.yaw = m * kPi / 180.0 * smoothstep((t - t0) / span);
      break;

    case Primitive::kCrouch: {
      const double e = plateau(t, t0, t1, 0.6);
      for (Joint j : {motion::kPelvis, motion::kHead, motion::kLeftShoulder, motion::kRightShoulder, motion::kLeftHip,
                      motion::kRightHip, motion::kLeftElbow, motion::kRightElbow, motion::kLeftWrist,
                      motion::kRightWrist}) {
        f(j, 1) -= m * e;
      }
      for (Joint j : {motion::kLeftKnee, motion::kRightKnee}) {
        f(j, 1) -= 0.5 * m * e;
        f(j, 2) += 0.6 * m * e;
      }
      break;
    }

    case Primitive::kHandsUp: {
      const double e = plateau(t, t0, t1, 0.4);
      const double top = 1.40 + m;
      lerp_row(f, motion::kLeftWrist, Eigen::RowVector3d(0.20, top, 0.02), e);
      lerp_row(f, motion::kRightWrist, Eigen::RowVector3d(-0.20, top, 0.02), e);
      lerp_row(f, motion::kLeftElbow, Eigen::RowVector3d(0.22, 1.40 + 0.45 * (top - 1.40) + 0.1, 0.0), e);
      lerp_row(f, motion::kRightElbow, Eigen::RowVector3d(-0.22, 1.40 + 0.45 * (top - 1.40) + 0.1, 0.0), e);
      break;
    }

    case Primitive::kKick: {
      const double duration = 0.8;
      const double tk = 0.5 * (t0 + t1) - 0.5 * duration;
      double shape = 0.0;
      if (t > tk && t < tk + duration) {
        const double s = std::sin(kPi * (t - tk) / duration);
        shape = s * s;
      }
      f(motion::kRightAnkle, 1) += m * shape;
      f(motion::kRightAnkle, 2) += 0.35 * shape;
      f(motion::kRightKnee, 1) += 0.5 * m * shape;
      f(motion::kRightKnee, 2) += 0.25 * shape;
      break;
    }

    case Primitive::kClap: {
      const double e = plateau(t, t0, t1, 0.3);
      const double hz = spec.frequency_hz > 0.0 ? spec.frequency_hz : 2.0;
      const double open = 0.012 + m * 0.5 * (1.0 + std::cos(2.0 * kPi * hz * (t - t0)));
      lerp_row(f, motion::kLeftWrist, Eigen::RowVector3d(open, 1.05, 0.20), e);
      lerp_row(f, motion::kRightWrist, Eigen::RowVector3d(-open, 1.05, 0.20), e);
      lerp_row(f, motion::kLeftElbow, Eigen::RowVector3d(0.21, 1.08, 0.06), e);
      lerp_row(f, motion::kRightElbow, Eigen::RowVector3d(-0.21, 1.08, 0.06), e);
      break;
    }

    case Primitive::kWave: {
      const double e = plateau(t, t0, t1, 0.3);
      const double hz = spec.frequency_hz > 0.0 ? spec.frequency_hz : 1.5;
      const double x = 0.30 + m * std::sin(2.0 * kPi * hz * (t - t0));
      lerp_row(f, motion::kLeftWrist, Eigen::RowVector3d(x, 1.20, 0.10), e);
      lerp_row(f, motion::kLeftElbow, Eigen::RowVector3d(0.5 * (x + 0.18), 1.14, 0.05), e);
      break;
    }
  }
  return pose;
}

JointSequence build(const PrimitiveSpec& spec, int fps, bool jitter) {
  if (!(spec.duration_s > 2.0 * kLead)) {
    throw Error(ErrorCode::kInvalidArgument, "duration must exceed the rest lead-in and lead-out of 1 s");
  }
  if (!(spec.magnitude >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "magnitude must be non-negative");
  if (fps <= 0) throw Error(ErrorCode::kInvalidArgument, "fps must be positive");
  const int frames = static_cast<int>(std::lround(spec.duration_s * fps));
  if (frames < 20) throw Error(ErrorCode::kInvalidArgument, "primitive needs at least 20 frames");

  Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(primitive_index(spec.primitive)), 0x5eedULL}));
  JointSequence::Positions pos(static_cast<Eigen::Index>(frames) * motion::kNumJoints, 3);
  const auto& order = motion::compact_joint_order();
  for (int fr = 0; fr < frames; ++fr) {
    const double t = static_cast<double>(fr) / fps;
    Pose pose = pose_at(spec, t);
    const Eigen::RowVector3d pivot = pose.key.row(motion::kPelvis);
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(pose.yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
    Frame frame = Frame::Zero();
    for (Joint j : order) {
      const Eigen::RowVector3d local = pose.key.row(j) - pivot;
      frame.row(j) = (rot * local.transpose()).transpose() + pivot + pose.offset;
    }
    motion::complete_derived_joints(frame);
    if (jitter) {
      for (int j = 0; j < motion::kNumJoints; ++j)
        for (int a = 0; a < 3; ++a) frame(j, a) += rng.uniform(-kJitter, kJitter);
    }
    pos.block(static_cast<Eigen::Index>(fr) * motion::kNumJoints, 0, motion::kNumJoints, 3) = frame;
  }
  return JointSequence(std::move(pos), fps);
}

}  // namespace

std::string_view primitive_name(Primitive p) {
  switch (p) {
    case Primitive::kWalkMove: return "walk_move";
    case Primitive::kJump: return "jump";
    case Primitive::kTurn: return "turn";
    case Primitive::kCrouch: return "crouch";
    case Primitive::kHandsUp: return "hands_up";
    case Primitive::kKick: return "kick";
    case Primitive::kClap: return "clap";
    case Primitive::kWave: return "wave";
    case Primitive::kIdle: return "idle";
  }
  return "idle";
}

Primitive parse_primitive(std::string_view name) {
  for (Primitive p : kAllPrimitives) {
    if (primitive_name(p) == name) return p;
  }
  throw Error(ErrorCode::kUnsupportedPrimitive, "unknown primitive '" + std::string(name) + "'");
}

int primitive_index(Primitive p) { return static_cast<int>(p); }

PrimitiveSpec calibrated_spec(Primitive p, std::uint64_t seed, double duration_s) {
  PrimitiveSpec s;
  s.primitive = p;
  s.seed = seed;
  s.duration_s = duration_s;
  switch (p) {
    case Primitive::kWalkMove: s.magnitude = 0.8; break;
    case Primitive::kJump: s.magnitude = 0.25; break;
    case Primitive::kTurn: s.magnitude = 180.0; break;
    case Primitive::kCrouch: s.magnitude = 0.2; break;
    case Primitive::kHandsUp: s.magnitude = 0.25; break;
    case Primitive::kKick: s.magnitude = 0.5; break;
    case Primitive::kClap:
      s.magnitude = 0.11;
      s.frequency_hz = 2.0;
      break;
    case Primitive::kWave:
      s.magnitude = 0.3;
      s.frequency_hz = 1.5;
      break;
    case Primitive::kIdle: break;
  }
  return s;
}

JointSequence synthesize(const PrimitiveSpec& spec, int fps) { return build(spec, fps, true); }

JointSequence synthesize_clean(const PrimitiveSpec& spec, int fps) { return build(spec, fps, false); }

JointSequence add_groove(const JointSequence& seq, double amplitude, double hz, double first_beat_s) {
  JointSequence::Positions pos = seq.positions();
  const int up = 1;
  for (int f = 0; f < seq.frames(); ++f) {
    const double t = static_cast<double>(f) / seq.fps();
    const double y = amplitude * std::abs(std::cos(kPi * hz * (t - first_beat_s)));
    for (int j = 0; j < motion::kNumJoints; ++j) pos(static_cast<Eigen::Index>(f) * motion::kNumJoints + j, up) += y;
  }
  return JointSequence(std::move(pos), seq.fps(), seq.joint_names());
}

const std::vector<std::string>& genre_tags() {
  static const std::vector<std::string> genres = {"popping", "locking", "hiphop", "jazz",
                                                  "breaking", "house",  "krump",  "waacking"};
  return genres;
}

double genre_tempo_bpm(std::string_view genre) {
  const auto& genres = genre_tags();
  for (std::size_t i = 0; i < genres.size(); ++i) {
    if (genres[i] == genre) return 84.0 + 12.0 * static_cast<double>(i);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown genre '" + std::string(genre) + "'");
}

std::vector<CorpusItem> synthesize_corpus(std::span<const PrimitiveSpec> specs, int fps) {
  if (specs.empty()) throw Error(ErrorCode::kEmptyInput, "corpus needs at least one primitive spec");
  std::vector<CorpusItem> out;
  out.reserve(specs.size());
  const auto& genres = genre_tags();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    out.push_back(CorpusItem{synthesize(specs[i], fps), std::string(primitive_name(specs[i].primitive)),
                             genres[i % genres.size()]});
  }
  return out;
}

void write_corpus(const std::filesystem::path& dir, std::span<const CorpusItem> corpus) {
  std::filesystem::create_directories(dir);
  Json manifest = Json::array();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "motion_%04zu.json", i);
    motion::save_joint_sequence(dir / name, corpus[i].sequence);
    manifest.push_back(Json{{"file", name}, {"label", corpus[i].label}, {"genre", corpus[i].genre}});
  }
  write_json_file(dir / "manifest.json", manifest);
}

std::vector<CorpusItem> read_corpus(const std::filesystem::path& dir) {
  const Json manifest = read_json_file(dir / "manifest.json");
  std::vector<CorpusItem> out;
  for (const auto& entry : manifest) {
    out.push_back(CorpusItem{motion::load_joint_sequence(dir / entry.at("file").get<std::string>()),
                             entry.at("label").get<std::string>(), entry.at("genre").get<std::string>()});
  }
  return out;
}

bool oracle_expected_pass(Primitive generated, Primitive predicate) {
  // Every calibrated generator fires exactly its own predicate; idle fires none.
  return generated != Primitive::kIdle && generated == predicate;
}

}  // namespace temu::synth
