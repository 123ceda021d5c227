#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "temudance/align/space.hpp"
#include "temudance/common/json_io.hpp"
#include "temudance/gen/model.hpp"
#include "temudance/gen/train.hpp"

namespace temu::pipeline {

// Build version embedded in every report.
std::string version();

struct SynthSettings {
  int dance_items = 144;
  int text_items = 144;
  int music_pool = 16;
  double duration_s = 4.0;
  int fps = 30;
};

struct SampleSettings {
  double scale = 2.0;
  int diffusion_steps = 50;  // must match the training schedule
};

struct KpsSettings {
  int R = 2;
  int G = 2;
};

struct TradeoffSettings {
  std::vector<double> scales{1.0, 2.0, 3.0};
  int R = 1;
  int G = 1;
  int samples = 8;  // clips per row for Div and BAS
};

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"synth",    "align", "bank",     "train",
                                                 "finetune", "kps",   "tradeoff", "summary"};
  return names;
}

struct PipelineConfig {
  std::uint64_t seed = 0;
  SynthSettings synth;
  align::AlignConfig align;
  double bank_threshold = 0.8;
  gen::ModelConfig model;
  gen::BackboneTrainConfig backbone;
  gen::FinetuneConfig finetune;
  SampleSettings sample;
  KpsSettings kps;
  TradeoffSettings tradeoff;
  std::vector<std::string> stages = stage_names();  // enabled stages

  // Range and consistency checks; throws kInvalidArgument.
  void validate() const;
};

// Module seeds are derived from the root seed so one number fixes a run.
void derive_seeds(PipelineConfig& c);

Json to_json(const PipelineConfig& c);
// Missing keys keep their defaults; unknown top-level keys are a schema error.
PipelineConfig pipeline_config_from_json(const Json& j);

// SHA-256 of the canonical config JSON.
std::string config_digest(const PipelineConfig& c);

}  // namespace temu::pipeline
