#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>

#include "temudance/gen/model.hpp"
#include "temudance/gen/schedule.hpp"
#include "temudance/kps/protocol.hpp"
#include "temudance/motion/types.hpp"

namespace temu::gen {

// Guided x0 estimate in normalised space. With music absent only the null
// estimate is computed; with s == 1 only the conditional one. Otherwise
// null + s * (cond - null), where the text branch feeds both passes.
Eigen::MatrixXd predict_x0(const Backbone& model, const ControlBranch* branch, const Eigen::MatrixXd& x_t, int t,
                           const MusicCond& music, const TextCond& text, double scale);

struct SampleOptions {
  int frames = 0;
  double scale = 2.0;
  int diffusion_steps = 50;
  std::uint64_t seed = 0;
  int fps = 30;
  // Both conditions absent is rejected unless this is set.
  bool allow_unconditional = false;
};

// Ancestral sampling from x_T ~ N(0, I) using the x0-parameterised posterior.
// The result is denormalised with contact channels clamped to [0, 1].
// Throws kDivergence naming the step on a non-finite state.
motion::MotionClip cfg_sample(const Backbone& model, const ControlBranch* branch, const MusicCond& music,
                              const TextCond& text, const SampleOptions& options);

// Adapter for the probing protocol: frames and fps follow the music clip and
// text becomes word tokens. Requires the compact layout.
class ModelGenerator final : public kps::ConditionedGenerator {
 public:
  ModelGenerator(const Backbone& model, const ControlBranch* branch, double scale, int diffusion_steps);

  motion::JointSequence generate(const synth::MusicClip& music, const std::optional<std::string>& text,
                                 std::uint64_t seed) const override;
  std::string describe() const override;

 private:
  const Backbone* model_;
  const ControlBranch* branch_;
  double scale_;
  int diffusion_steps_;
};

}  // namespace temu::gen
