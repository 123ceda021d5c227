#include "temudance/gen/sample.hpp"

#include <cmath>
#include <sstream>

#include "temudance/align/tokens.hpp"
#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/motion/compact.hpp"

namespace temu::gen {

Eigen::MatrixXd predict_x0(const Backbone& model, const ControlBranch* branch, const Eigen::MatrixXd& x_t, int t,
                           const MusicCond& music, const TextCond& text, double scale) {
  if (!music) return controlled_forward(model, branch, x_t, t, std::nullopt, text);
  Eigen::MatrixXd cond = controlled_forward(model, branch, x_t, t, music, text);
  if (scale == 1.0) return cond;
  const Eigen::MatrixXd null = controlled_forward(model, branch, x_t, t, std::nullopt, text);
  return null + scale * (cond - null);
}

motion::MotionClip cfg_sample(const Backbone& model, const ControlBranch* branch, const MusicCond& music,
                              const TextCond& text, const SampleOptions& options) {
  const bool has_text = text.has_value() && branch != nullptr;
  if (!music && !has_text && !options.allow_unconditional) {
    throw Error(ErrorCode::kInvalidArgument, "sampling needs music or text unless unconditional sampling is requested");
  }
  if (!std::isfinite(options.scale) || options.scale < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "guidance scale must be finite and non-negative");
  }
  const int k = music ? static_cast<int>(music->rows()) : options.frames;
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "sampling needs at least one frame");
  const NoiseSchedule sched = NoiseSchedule::cosine(options.diffusion_steps);
  const int F = model.feature_dim();

  Rng rng(options.seed);
  Eigen::MatrixXd x(k, F);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();

  for (int t = sched.steps(); t >= 1; --t) {
    const Eigen::MatrixXd x0 = predict_x0(model, branch, x, t, music, text, options.scale);
    const double ab = sched.alpha_bar(t), abp = sched.alpha_bar_prev(t);
    const double alpha = ab / abp, beta = 1.0 - alpha;
    const double c0 = std::sqrt(abp) * beta / (1.0 - ab);
    const double ct = std::sqrt(alpha) * (1.0 - abp) / (1.0 - ab);
    x = c0 * x0 + ct * x;
    if (t > 1) {
      const double sigma = std::sqrt(beta * (1.0 - abp) / (1.0 - ab));
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += sigma * rng.normal();
    }
    if (!x.allFinite()) throw Error(ErrorCode::kDivergence, "sampling diverged at step " + std::to_string(t));
  }

  Eigen::MatrixXd raw = model.denormalise(x);
  for (int ch : model.layout().contact_channels) raw.col(ch) = raw.col(ch).cwiseMax(0.0).cwiseMin(1.0);
  return motion::MotionClip(std::move(raw), options.fps, model.layout());
}

ModelGenerator::ModelGenerator(const Backbone& model, const ControlBranch* branch, double scale, int diffusion_steps)
    : model_(&model), branch_(branch), scale_(scale), diffusion_steps_(diffusion_steps) {
  if (model.layout().name != motion::compact_layout().name) {
    throw Error(ErrorCode::kInvalidArgument, "joint readout needs a compact-layout model");
  }
}

motion::JointSequence ModelGenerator::generate(const synth::MusicClip& music, const std::optional<std::string>& text,
                                               std::uint64_t seed) const {
  SampleOptions opt;
  opt.scale = scale_;
  opt.diffusion_steps = diffusion_steps_;
  opt.seed = seed;
  opt.fps = music.fps;
  TextCond tokens;
  if (text) tokens = align::text_tokens(*text);
  return motion::readout_positions(cfg_sample(*model_, branch_, music.features, tokens, opt));
}

std::string ModelGenerator::describe() const {
  std::ostringstream os;
  os << (branch_ ? "controlled" : "backbone") << " s=" << scale_ << " T=" << diffusion_steps_;
  return os.str();
}

}  // namespace temu::gen
