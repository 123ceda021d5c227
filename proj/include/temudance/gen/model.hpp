#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "temudance/common/json_io.hpp"
#include "temudance/motion/types.hpp"
#include "temudance/nn/tape.hpp"

namespace temu::gen {

struct ModelConfig {
  std::string layout = "compact46";
  int cond_dim = 32;      // C, music feature width
  int text_dim = 32;      // width of text tokens before projection
  int hidden = 32;        // H
  int group_hidden = 8;   // per body-part subnetwork width
  int blocks = 4;         // L
  int control_blocks = 2; // K
  std::uint64_t seed = 0;

  void validate() const;
};

Json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j);

// Music-conditioned denoiser predicting x0 from x_t. Inputs and outputs live in
// the standardised feature space; `mean` and `scale` map raw features to it.
class Backbone {
 public:
  explicit Backbone(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const motion::FeatureLayout& layout() const { return *layout_; }
  int feature_dim() const { return layout_->dim; }

  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  // Per-channel standardisation fitted on the training corpus.
  void set_normaliser(Eigen::RowVectorXd mean, Eigen::RowVectorXd scale);
  const Eigen::RowVectorXd& mean() const { return mean_; }
  const Eigen::RowVectorXd& scale() const { return scale_; }
  Eigen::MatrixXd normalise(const Eigen::MatrixXd& raw) const;
  Eigen::MatrixXd denormalise(const Eigen::MatrixXd& z) const;

  // SHA-256 over parameters and the normaliser.
  std::string digest() const;

  Json to_json() const;
  static Backbone from_json(const Json& j);
  void save(const std::filesystem::path& path) const;
  static Backbone load(const std::filesystem::path& path);

 private:
  ModelConfig config_;
  const motion::FeatureLayout* layout_;
  nn::ParameterSet params_;
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
};

// Residual text branch: K blocks cloned from the first K backbone blocks that
// cross-attend over projected text tokens, each followed by a zero-initialised
// H x H projection.
class ControlBranch {
 public:
  explicit ControlBranch(const Backbone& backbone);

  int blocks() const { return blocks_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  std::string digest() const { return params_.digest(); }

  Json to_json() const;
  // `backbone` fixes the shapes.
  static ControlBranch from_json(const Json& j, const Backbone& backbone);
  void save(const std::filesystem::path& path) const;
  static ControlBranch load(const std::filesystem::path& path, const Backbone& backbone);

 private:
  ControlBranch() = default;
  int blocks_ = 0;
  nn::ParameterSet params_;
};

// Per-group hidden features before fusion, frames x (7 * group_hidden);
// columns [g * group_hidden, (g + 1) * group_hidden) depend only on group g.
Eigen::MatrixXd encoder_group_features(const Backbone& model, const Eigen::MatrixXd& x);

// Absent music selects the learned null condition; absent text (or a null
// branch) bypasses the control branch.
using MusicCond = std::optional<Eigen::MatrixXd>;  // k x C
using TextCond = std::optional<Eigen::MatrixXd>;   // N x text_dim tokens

// Tape versions, used for training.
nn::Var backbone_forward(nn::Tape& tape, const Backbone& model, const Eigen::MatrixXd& x_t, int t,
                         const MusicCond& music);
nn::Var controlled_forward(nn::Tape& tape, const Backbone& model, const ControlBranch* branch,
                           const Eigen::MatrixXd& x_t, int t, const MusicCond& music, const TextCond& text);

// Plain versions.
Eigen::MatrixXd backbone_forward(const Backbone& model, const Eigen::MatrixXd& x_t, int t, const MusicCond& music);
Eigen::MatrixXd controlled_forward(const Backbone& model, const ControlBranch* branch, const Eigen::MatrixXd& x_t,
                                   int t, const MusicCond& music, const TextCond& text);

}  // namespace temu::gen
