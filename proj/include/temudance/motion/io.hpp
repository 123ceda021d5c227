#pragma once

#include <filesystem>

#include "temudance/common/json_io.hpp"
#include "temudance/motion/types.hpp"

namespace temu::motion {

// {"fps", "joints", "frames", "positions"} with positions row-major frames*22*3.
Json to_json(const JointSequence& seq);
JointSequence joint_sequence_from_json(const Json& j);

// {"fps", "frames", "features"} with features row-major frames*319. Clips in a
// non-canonical layout additionally carry a "layout" name.
Json to_json(const MotionClip& clip);
MotionClip motion_clip_from_json(const Json& j);

void save_joint_sequence(const std::filesystem::path& path, const JointSequence& seq);
JointSequence load_joint_sequence(const std::filesystem::path& path);
void save_motion_clip(const std::filesystem::path& path, const MotionClip& clip);
MotionClip load_motion_clip(const std::filesystem::path& path);

}  // namespace temu::motion
