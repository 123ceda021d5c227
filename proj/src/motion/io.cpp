#include "temudance/motion/io.hpp"

#include "temudance/common/error.hpp"

namespace temu::motion {

Json to_json(const JointSequence& seq) {
  Json j;
  j["fps"] = seq.fps();
  j["joints"] = seq.joint_names();
  j["frames"] = seq.frames();
  Json flat = Json::array();
  const auto& p = seq.positions();
  for (Eigen::Index r = 0; r < p.rows(); ++r)
    for (int c = 0; c < 3; ++c) flat.push_back(p(r, c));
  j["positions"] = std::move(flat);
  return j;
}

JointSequence joint_sequence_from_json(const Json& j) {
  try {
    const int frames = j.at("frames").get<int>();
    const auto names = j.at("joints").get<std::vector<std::string>>();
    const Eigen::MatrixXd flat = matrix_from_flat_json(j.at("positions"), static_cast<Eigen::Index>(frames) * kNumJoints, 3);
    return JointSequence(JointSequence::Positions(flat), j.at("fps").get<int>(), names);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed joint sequence: ") + e.what());
  }
}

Json to_json(const MotionClip& clip) {
  Json j;
  j["fps"] = clip.fps();
  j["frames"] = clip.frames();
  j["features"] = matrix_to_flat_json(clip.features());
  if (clip.layout().name != canonical_layout().name) j["layout"] = clip.layout().name;
  return j;
}

MotionClip motion_clip_from_json(const Json& j) {
  try {
    const FeatureLayout& layout =
        j.contains("layout") ? layout_by_name(j.at("layout").get<std::string>()) : canonical_layout();
    const int frames = j.at("frames").get<int>();
    return MotionClip(matrix_from_flat_json(j.at("features"), frames, layout.dim), j.at("fps").get<int>(), layout);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed motion clip: ") + e.what());
  }
}

void save_joint_sequence(const std::filesystem::path& path, const JointSequence& seq) {
  write_json_file(path, to_json(seq));
}

JointSequence load_joint_sequence(const std::filesystem::path& path) {
  return joint_sequence_from_json(read_json_file(path));
}

void save_motion_clip(const std::filesystem::path& path, const MotionClip& clip) { write_json_file(path, to_json(clip)); }

MotionClip load_motion_clip(const std::filesystem::path& path) { return motion_clip_from_json(read_json_file(path)); }

}  // namespace temu::motion
