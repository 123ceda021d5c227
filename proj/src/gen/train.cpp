#include "temudance/gen/train.hpp"

#include <cmath>
#include <sstream>

#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/motion/compact.hpp"
#include "temudance/nn/optim.hpp"

namespace temu::gen {

using nn::Mat;

Eigen::MatrixXd motion_features(const motion::JointSequence& seq, const motion::FeatureLayout& layout) {
  if (layout.name != motion::compact_layout().name) {
    throw Error(ErrorCode::kInvalidArgument, "joint sequences can only be encoded in the compact layout");
  }
  return motion::to_compact_clip(seq).features();
}

Json to_json(const BackboneTrainConfig& c) {
  return Json{{"steps", c.steps},
              {"batch", c.batch},
              {"lr", c.lr},
              {"cond_dropout", c.cond_dropout},
              {"diffusion_steps", c.diffusion_steps},
              {"weights", to_json(c.weights)},
              {"seed", c.seed}};
}

BackboneTrainConfig backbone_train_config_from_json(const Json& j) {
  BackboneTrainConfig c;
  c.steps = j.value("steps", c.steps);
  c.batch = j.value("batch", c.batch);
  c.lr = j.value("lr", c.lr);
  c.cond_dropout = j.value("cond_dropout", c.cond_dropout);
  c.diffusion_steps = j.value("diffusion_steps", c.diffusion_steps);
  if (j.contains("weights")) c.weights = loss_weights_from_json(j.at("weights"));
  c.seed = j.value("seed", c.seed);
  return c;
}

Json to_json(const FinetuneConfig& c) {
  return Json{{"steps", c.steps},
              {"batch", c.batch},
              {"lr", c.lr},
              {"lambda_p", c.lambda_p},
              {"music_dropout", c.music_dropout},
              {"diffusion_steps", c.diffusion_steps},
              {"weights", to_json(c.weights)},
              {"seed", c.seed}};
}

FinetuneConfig finetune_config_from_json(const Json& j) {
  FinetuneConfig c;
  c.steps = j.value("steps", c.steps);
  c.batch = j.value("batch", c.batch);
  c.lr = j.value("lr", c.lr);
  c.lambda_p = j.value("lambda_p", c.lambda_p);
  c.music_dropout = j.value("music_dropout", c.music_dropout);
  c.diffusion_steps = j.value("diffusion_steps", c.diffusion_steps);
  if (j.contains("weights")) c.weights = loss_weights_from_json(j.at("weights"));
  c.seed = j.value("seed", c.seed);
  return c;
}

namespace {

Mat normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void fit_normaliser(Backbone& model, const std::vector<TrainSample>& corpus) {
  const int F = model.feature_dim();
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(F), sq = Eigen::RowVectorXd::Zero(F);
  double n = 0.0;
  for (const TrainSample& s : corpus) {
    sum += s.x0.colwise().sum();
    sq += s.x0.array().square().matrix().colwise().sum();
    n += static_cast<double>(s.x0.rows());
  }
  const Eigen::RowVectorXd mean = sum / n;
  Eigen::RowVectorXd var = sq / n - mean.cwiseProduct(mean);
  // Floor keeps near-constant channels from being blown up.
  const Eigen::RowVectorXd scale = var.cwiseMax(0.0).cwiseSqrt().cwiseMax(1e-2);
  model.set_normaliser(mean, scale);
}

void check_corpus(const std::vector<TrainSample>& corpus, int F, const char* what) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, std::string(what) + " corpus is empty");
  for (const TrainSample& s : corpus) {
    if (s.x0.rows() < 3 || s.x0.cols() != F) {
      throw Error(ErrorCode::kDimension, std::string(what) + " sample must be k x " + std::to_string(F) + " with k >= 3");
    }
  }
}

}  // namespace

nn::Var denoising_loss(nn::Tape& tape, const Backbone& model, const ControlBranch* branch, const TrainSample& sample,
                       int t, const Eigen::MatrixXd& eps, const NoiseSchedule& sched, const LossWeights& weights,
                       bool drop_music, LossTerms* terms) {
  const Mat z0 = model.normalise(sample.x0);
  const Mat xt = forward_diffuse(z0, t, eps, sched);
  const nn::Var pred = controlled_forward(tape, model, branch, xt, t, drop_music ? MusicCond{} : sample.music, sample.text);
  const ContactSpec spec = contact_spec(model.layout());
  return dance_loss(tape, pred, z0, weights, spec, contact_mask(sample.x0, spec), terms);
}

BackboneResult train_backbone(const std::vector<TrainSample>& corpus, const ModelConfig& model_config,
                              const BackboneTrainConfig& config) {
  config.weights.validate();
  if (config.steps < 0 || config.batch < 1 || !(config.lr > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad backbone training steps, batch or learning rate");
  }
  BackboneResult result{Backbone(model_config), {}};
  Backbone& model = result.model;
  check_corpus(corpus, model.feature_dim(), "backbone");
  fit_normaliser(model, corpus);
  const NoiseSchedule sched = NoiseSchedule::cosine(config.diffusion_steps);
  nn::Adam adam(config.lr);
  Rng rng(derive_seed(config.seed, {0xb0b}));
  for (int step = 0; step < config.steps; ++step) {
    nn::Tape tape;
    nn::Var total{};
    for (int b = 0; b < config.batch; ++b) {
      const TrainSample& s = corpus[rng.below(corpus.size())];
      const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.diffusion_steps)));
      const bool drop = rng.uniform() < config.cond_dropout;
      const Mat eps = normal_matrix(rng, s.x0.rows(), s.x0.cols());
      const nn::Var l = tape.scale(denoising_loss(tape, model, nullptr, s, t, eps, sched, config.weights, drop),
                                   1.0 / config.batch);
      total = b == 0 ? l : tape.add(total, l);
    }
    const double loss = tape.scalar(total);
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kDivergence, "backbone loss became non-finite at step " + std::to_string(step));
    }
    result.trace.push_back(loss);
    adam.step(model.params(), tape.backward(total));
  }
  return result;
}

double combined_loss(double text, double dance, double lambda_p) {
  return (1.0 - lambda_p) * text + lambda_p * dance;
}

FinetuneResult finetune_control(const Backbone& backbone, const ControlBranch& initial,
                                const std::vector<TrainSample>& text_stream,
                                const std::vector<TrainSample>& dance_stream, const FinetuneConfig& config) {
  config.weights.validate();
  if (!(config.lambda_p >= 0.0 && config.lambda_p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda_p must lie in [0, 1]");
  }
  if (config.steps < 0 || config.batch < 1 || !(config.lr > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad fine-tuning steps, batch or learning rate");
  }
  check_corpus(text_stream, backbone.feature_dim(), "text-motion");
  check_corpus(dance_stream, backbone.feature_dim(), "music-dance");
  const std::string frozen = backbone.digest();

  FinetuneResult result{initial, {}};
  ControlBranch& branch = result.branch;
  const NoiseSchedule sched = NoiseSchedule::cosine(config.diffusion_steps);
  nn::Adam adam(config.lr);
  Rng rng(derive_seed(config.seed, {0xf17e}));
  const double lp = config.lambda_p;

  for (int step = 0; step < config.steps; ++step) {
    nn::Tape tape;
    auto stream_loss = [&](const std::vector<TrainSample>& stream) {
      nn::Var total{};
      for (int b = 0; b < config.batch; ++b) {
        const TrainSample& s = stream[rng.below(stream.size())];
        const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.diffusion_steps)));
        const bool drop = rng.uniform() < config.music_dropout;
        const Mat eps = normal_matrix(rng, s.x0.rows(), s.x0.cols());
        const nn::Var l = tape.scale(
            denoising_loss(tape, backbone, &branch, s, t, eps, sched, config.weights, drop), 1.0 / config.batch);
        total = b == 0 ? l : tape.add(total, l);
      }
      return total;
    };
    const nn::Var l_text = stream_loss(text_stream);
    const nn::Var l_dance = stream_loss(dance_stream);
    const nn::Var combined = tape.add(tape.scale(l_text, 1.0 - lp), tape.scale(l_dance, lp));

    FinetuneRecord rec;
    rec.step = step;
    rec.text = tape.scalar(l_text);
    rec.dance = tape.scalar(l_dance);
    rec.combined = combined_loss(rec.text, rec.dance, lp);
    if (!std::isfinite(rec.combined)) {
      throw Error(ErrorCode::kDivergence, "fine-tuning loss became non-finite at step " + std::to_string(step));
    }
    result.trace.push_back(rec);
    // Only branch parameters are stepped; backbone gradients are discarded.
    adam.step(branch.params(), tape.backward(combined));
  }
  if (backbone.digest() != frozen) throw Error(ErrorCode::kFrozenDrift, "backbone parameters changed during fine-tuning");
  return result;
}

std::string loss_trace_csv(const std::vector<double>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "step,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << trace[i] << '\n';
  return os.str();
}

std::string finetune_trace_csv(const std::vector<FinetuneRecord>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "step,L_text,L_dance,combined\n";
  for (const FinetuneRecord& r : trace) os << r.step << ',' << r.text << ',' << r.dance << ',' << r.combined << '\n';
  return os.str();
}

}  // namespace temu::gen
