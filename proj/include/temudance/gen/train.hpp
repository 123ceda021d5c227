#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "temudance/common/json_io.hpp"
#include "temudance/gen/loss.hpp"
#include "temudance/gen/model.hpp"
#include "temudance/gen/schedule.hpp"
#include "temudance/motion/types.hpp"

namespace temu::gen {

// One training example in raw feature space.
struct TrainSample {
  Eigen::MatrixXd x0;  // k x F
  MusicCond music;     // absent: null condition
  TextCond text;       // absent: no text
};

// Raw features of a joint sequence in the model's layout (compact46 only;
// the 319-channel layout has no forward kinematics at desk scale).
Eigen::MatrixXd motion_features(const motion::JointSequence& seq, const motion::FeatureLayout& layout);

struct BackboneTrainConfig {
  int steps = 2000;
  int batch = 4;
  double lr = 2e-3;
  double cond_dropout = 0.1;
  int diffusion_steps = 50;
  LossWeights weights;
  std::uint64_t seed = 0;
};

Json to_json(const BackboneTrainConfig& c);
BackboneTrainConfig backbone_train_config_from_json(const Json& j);

struct BackboneResult {
  Backbone model;
  std::vector<double> trace;  // mean batch loss per step
};

// Fits the normaliser on the corpus, then minimises dance_loss on
// x0_hat = backbone_forward(x_t, t, c_M) with Adam. Music is replaced by the
// null condition with probability cond_dropout. Throws kDivergence with the
// step index on a non-finite loss.
BackboneResult train_backbone(const std::vector<TrainSample>& corpus, const ModelConfig& model_config,
                              const BackboneTrainConfig& config);

// Mean loss of one sample at a fixed (t, eps) draw, recorded on `tape`.
nn::Var denoising_loss(nn::Tape& tape, const Backbone& model, const ControlBranch* branch, const TrainSample& sample,
                       int t, const Eigen::MatrixXd& eps, const NoiseSchedule& sched, const LossWeights& weights,
                       bool drop_music, LossTerms* terms = nullptr);

struct FinetuneConfig {
  int steps = 500;
  int batch = 2;
  double lr = 2e-3;
  double lambda_p = 0.5;
  double music_dropout = 0.1;
  int diffusion_steps = 50;
  LossWeights weights;
  std::uint64_t seed = 0;
};

Json to_json(const FinetuneConfig& c);
FinetuneConfig finetune_config_from_json(const Json& j);

struct FinetuneRecord {
  int step = 0;
  double text = 0.0;
  double dance = 0.0;
  double combined = 0.0;  // (1 - lambda_p) * text + lambda_p * dance
};

// (1 - lambda_p) * text + lambda_p * dance.
double combined_loss(double text, double dance, double lambda_p);

struct FinetuneResult {
  ControlBranch branch;
  std::vector<FinetuneRecord> trace;
};

// Each step draws one minibatch from each stream and updates only the branch
// on the combined loss. Throws kFrozenDrift if the backbone digest changes.
FinetuneResult finetune_control(const Backbone& backbone, const ControlBranch& initial,
                                const std::vector<TrainSample>& text_stream,
                                const std::vector<TrainSample>& dance_stream, const FinetuneConfig& config);

std::string loss_trace_csv(const std::vector<double>& trace);
std::string finetune_trace_csv(const std::vector<FinetuneRecord>& trace);

}  // namespace temu::gen
