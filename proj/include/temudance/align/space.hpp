#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "temudance/common/json_io.hpp"
#include "temudance/nn/tape.hpp"
#include "temudance/synth/datasets.hpp"

namespace temu::align {

struct AlignConfig {
  int token_dim = 32;
  int embed_dim = 16;
  int hidden = 32;
  int queue_size = 256;
  double momentum = 0.99;
  double lambda = 1.0;
  double alpha_init = 2.302585092994046;  // ln 10
  double lr = 0.02;
  int steps = 500;
  int batch = 8;
  std::uint64_t seed = 0;
};

Json to_json(const AlignConfig& c);
// Missing keys keep their defaults.
AlignConfig align_config_from_json(const Json& j);

enum class Modality { kMotion, kMusic, kText };

// FIFO of unit-norm keys, oldest first.
class MomentumQueue {
 public:
  MomentumQueue(int dim, int capacity);

  // Columns of `keys` are appended in order; the oldest entries are evicted
  // beyond capacity. Non-unit keys are normalised with a warning.
  void push(const Eigen::MatrixXd& keys);
  int occupancy() const { return static_cast<int>(keys_.size()); }
  int capacity() const { return capacity_; }
  int dim() const { return dim_; }
  // dim x occupancy, oldest column first.
  Eigen::MatrixXd matrix() const;

 private:
  int dim_;
  int capacity_;
  std::deque<Eigen::VectorXd> keys_;
};

// Shared embedding space: motion encoder E (two tanh layers over tokens),
// its EMA copy, mean pooling, and linear projectors for motion, music and
// text, plus learnable logit scales and one negative-key queue per stream.
class AlignmentSpace {
 public:
  explicit AlignmentSpace(const AlignConfig& config);

  const AlignConfig& config() const { return config_; }

  // Unit-norm embedding; motion goes through the online encoder E.
  Eigen::VectorXd embed(Modality kind, const Eigen::MatrixXd& tokens) const;
  // Motion key through the EMA encoder and the shared motion projector.
  Eigen::VectorXd embed_key(const Eigen::MatrixXd& motion_tokens) const;

  // Unnormalised 1 x D projections recorded on a tape.
  nn::Var project(nn::Tape& tape, Modality kind, const Eigen::MatrixXd& tokens) const;
  nn::Var project_key(nn::Tape& tape, const Eigen::MatrixXd& motion_tokens) const;

  // Pooled hidden features of the EMA encoder (1 x hidden).
  Eigen::RowVectorXd ema_features(const Eigen::MatrixXd& motion_tokens) const;

  // ema <- m * ema + (1 - m) * online, elementwise.
  void ema_update(double m);

  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  nn::ParameterSet& ema() { return ema_; }
  const nn::ParameterSet& ema() const { return ema_; }
  MomentumQueue& queue_da() { return queue_da_; }
  MomentumQueue& queue_mo() { return queue_mo_; }
  const MomentumQueue& queue_da() const { return queue_da_; }
  const MomentumQueue& queue_mo() const { return queue_mo_; }

  double alpha_mus() const { return params_.get("alpha_mus").value(0, 0); }
  double alpha_txt() const { return params_.get("alpha_txt").value(0, 0); }

  Json to_json() const;
  static AlignmentSpace from_json(const Json& j);
  void save(const std::filesystem::path& path) const;
  static AlignmentSpace load(const std::filesystem::path& path);
  std::string digest() const;

 private:
  AlignConfig config_;
  nn::ParameterSet params_;
  nn::ParameterSet ema_;
  MomentumQueue queue_da_;
  MomentumQueue queue_mo_;
};

// Tokenised training pairs.
struct DancePair {
  Eigen::MatrixXd motion;
  Eigen::MatrixXd music;
  std::string label;
};

struct TextPair {
  Eigen::MatrixXd motion;
  Eigen::MatrixXd text;
  std::string label;
};

std::vector<DancePair> dance_pairs(const std::vector<synth::DanceItem>& items, int stride = 4);
std::vector<TextPair> text_pairs(const std::vector<synth::TextMotionItem>& items, int stride = 4);

struct AlignLossRecord {
  int step = 0;
  double m2d = 0.0;
  double t2m = 0.0;
  double bridge = 0.0;
  double total = 0.0;
};

struct AlignStep {
  AlignLossRecord losses;
  nn::Gradients grads;  // keyed by parameters of the space that produced it
  Eigen::MatrixXd keys_da;  // D x batch unit keys for the queues
  Eigen::MatrixXd keys_mo;
};

// Losses and gradients of L_m2d + L_t2m + lambda * L_bridge for one pair of
// minibatches against the current queues; the space is not modified.
AlignStep alignment_step(const AlignmentSpace& space, const std::vector<const DancePair*>& batch_da,
                         const std::vector<const TextPair*>& batch_mo);

struct AlignResult {
  AlignmentSpace space;
  std::vector<AlignLossRecord> trace;
};

// Each step draws one minibatch from each corpus, minimises
// L_m2d + L_t2m + lambda * L_bridge by plain gradient descent, then pushes the
// batch keys into the queues and updates the EMA encoder. Throws kDivergence
// with the step index on a non-finite loss.
AlignResult train_alignment(const std::vector<DancePair>& corpus_da, const std::vector<TextPair>& corpus_mo,
                            const AlignConfig& config);

// CSV with header step,L_m2d,L_t2m,L_bridge,total.
std::string loss_trace_csv(const std::vector<AlignLossRecord>& trace);

// Fraction of pairs whose motion embedding's nearest music embedding (among
// all pairs) carries the same label.
double class_retrieval_accuracy(const AlignmentSpace& space, const std::vector<DancePair>& pairs);

}  // namespace temu::align
