#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "temudance/gen/train.hpp"
#include "temudance/pipeline/config.hpp"
#include "temudance/synth/datasets.hpp"

namespace temu::pipeline {

// Run-directory paths, relative to the output root.
namespace paths {
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kDance = "data/dance.json";
inline constexpr const char* kTextMotion = "data/text_motion.json";
inline constexpr const char* kMusicPool = "data/music_pool";
inline constexpr const char* kAlign = "checkpoints/align.json";
inline constexpr const char* kBackbone = "checkpoints/backbone.json";
inline constexpr const char* kBranch = "checkpoints/branch.json";
inline constexpr const char* kMdBank = "banks/md.json";
inline constexpr const char* kTmBank = "banks/tm.json";
inline constexpr const char* kAlignTrace = "traces/align_loss.csv";
inline constexpr const char* kBackboneTrace = "traces/backbone_loss.csv";
inline constexpr const char* kFinetuneTrace = "traces/finetune_loss.csv";
inline constexpr const char* kRetrievalReport = "reports/retrieval";
inline constexpr const char* kKpsReport = "reports/kps";
inline constexpr const char* kTradeoffReport = "reports/tradeoff";
inline constexpr const char* kLossSummary = "reports/loss_traces.json";
}  // namespace paths

// root / rel, or kDependency naming the stage that produces it.
std::filesystem::path require_artifact(const std::filesystem::path& root, const std::string& rel);

void save_dance_corpus(const std::filesystem::path& path, const std::vector<synth::DanceItem>& items);
std::vector<synth::DanceItem> load_dance_corpus(const std::filesystem::path& path);
void save_text_corpus(const std::filesystem::path& path, const std::vector<synth::TextMotionItem>& items);
std::vector<synth::TextMotionItem> load_text_corpus(const std::filesystem::path& path);

// Music rows cropped, or padded with the last row, to `frames`.
Eigen::MatrixXd fit_frames(const Eigen::MatrixXd& music, Eigen::Index frames);

struct RunOptions {
  std::vector<std::string> stages;  // empty: the config's enabled stages
  bool force = false;               // rerun even when up to date
  std::function<void(const std::string&)> log;
};

struct RunResult {
  std::vector<std::string> executed;
  std::vector<std::string> skipped;  // up to date
};

// Runs the requested stages in dependency order under `root`. A stage is
// skipped when its key (stage config, version and input file digests) and its
// output digests match the manifest. Errors carry the stage name.
RunResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& root, const RunOptions& options = {});

}  // namespace temu::pipeline
