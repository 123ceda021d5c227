#include "temudance/pipeline/config.hpp"

#include <algorithm>
#include <set>

#include "temudance/common/digest.hpp"
#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"

#ifndef TEMU_VERSION
#define TEMU_VERSION "0.0.0"
#endif

namespace temu::pipeline {

std::string version() { return TEMU_VERSION; }

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "config: " + what);
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void PipelineConfig::validate() const {
  require(synth.dance_items >= 1 && synth.text_items >= 1, "corpora need at least one item");
  require(synth.music_pool >= 1, "music pool needs at least one clip");
  require(synth.duration_s > 1.0, "clip duration must exceed 1 s");
  require(synth.fps >= 1, "fps must be positive");
  require(bank_threshold > 0.0 && bank_threshold <= 1.0, "bank threshold must lie in (0, 1]");
  require(sample.scale >= 0.0, "guidance scale must be non-negative");
  require(sample.diffusion_steps == backbone.diffusion_steps && finetune.diffusion_steps == backbone.diffusion_steps,
          "sampling, backbone and fine-tuning must share one diffusion step count");
  require(kps.R >= 1 && kps.G >= 1 && tradeoff.R >= 1 && tradeoff.G >= 1, "R and G must be positive");
  require(tradeoff.samples >= 2, "trade-off rows need at least two samples for diversity");
  require(!tradeoff.scales.empty(), "trade-off needs at least one scale");
  for (double s : tradeoff.scales) require(s >= 0.0, "trade-off scales must be non-negative");
  require(model.layout == "compact46", "the pipeline reads motion out of the compact layout only");
  model.validate();
  backbone.weights.validate();
  finetune.weights.validate();
  for (const std::string& s : stages) {
    require(std::find(stage_names().begin(), stage_names().end(), s) != stage_names().end(), "unknown stage '" + s + "'");
  }
}

void derive_seeds(PipelineConfig& c) {
  c.align.seed = derive_seed(c.seed, {0xa1});
  c.model.seed = derive_seed(c.seed, {0x30});
  c.backbone.seed = derive_seed(c.seed, {0xb0});
  c.finetune.seed = derive_seed(c.seed, {0xf0});
}

Json to_json(const PipelineConfig& c) {
  return Json{{"seed", c.seed},
              {"synth",
               {{"dance_items", c.synth.dance_items},
                {"text_items", c.synth.text_items},
                {"music_pool", c.synth.music_pool},
                {"duration_s", c.synth.duration_s},
                {"fps", c.synth.fps}}},
              {"align", align::to_json(c.align)},
              {"bank", {{"threshold", c.bank_threshold}}},
              {"model", gen::to_json(c.model)},
              {"backbone", gen::to_json(c.backbone)},
              {"finetune", gen::to_json(c.finetune)},
              {"sample", {{"scale", c.sample.scale}, {"diffusion_steps", c.sample.diffusion_steps}}},
              {"kps", {{"R", c.kps.R}, {"G", c.kps.G}}},
              {"tradeoff",
               {{"scales", c.tradeoff.scales},
                {"R", c.tradeoff.R},
                {"G", c.tradeoff.G},
                {"samples", c.tradeoff.samples}}},
              {"stages", c.stages}};
}

PipelineConfig pipeline_config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "pipeline config must be a JSON object");
  static const std::set<std::string> known = {"seed",     "synth",  "align", "bank",     "model", "backbone",
                                              "finetune", "sample", "kps",   "tradeoff", "stages"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(ErrorCode::kSchema, "unknown config key '" + key + "'");
  }
  PipelineConfig c;
  try {
    read(j, "seed", c.seed);
    if (j.contains("synth")) {
      const Json& s = j.at("synth");
      read(s, "dance_items", c.synth.dance_items);
      read(s, "text_items", c.synth.text_items);
      read(s, "music_pool", c.synth.music_pool);
      read(s, "duration_s", c.synth.duration_s);
      read(s, "fps", c.synth.fps);
    }
    if (j.contains("align")) c.align = align::align_config_from_json(j.at("align"));
    if (j.contains("bank")) read(j.at("bank"), "threshold", c.bank_threshold);
    if (j.contains("model")) c.model = gen::model_config_from_json(j.at("model"));
    if (j.contains("backbone")) c.backbone = gen::backbone_train_config_from_json(j.at("backbone"));
    if (j.contains("finetune")) c.finetune = gen::finetune_config_from_json(j.at("finetune"));
    if (j.contains("sample")) {
      read(j.at("sample"), "scale", c.sample.scale);
      read(j.at("sample"), "diffusion_steps", c.sample.diffusion_steps);
    }
    if (j.contains("kps")) {
      read(j.at("kps"), "R", c.kps.R);
      read(j.at("kps"), "G", c.kps.G);
    }
    if (j.contains("tradeoff")) {
      const Json& t = j.at("tradeoff");
      read(t, "scales", c.tradeoff.scales);
      read(t, "R", c.tradeoff.R);
      read(t, "G", c.tradeoff.G);
      read(t, "samples", c.tradeoff.samples);
    }
    read(j, "stages", c.stages);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed pipeline config: ") + e.what());
  }
  return c;
}

std::string config_digest(const PipelineConfig& c) { return sha256_hex(to_json(c).dump()); }

}  // namespace temu::pipeline
