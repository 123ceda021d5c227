// Command-line front end over the run directory managed by the pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "temudance/align/space.hpp"
#include "temudance/align/tokens.hpp"
#include "temudance/bank/bank.hpp"
#include "temudance/common/error.hpp"
#include "temudance/gen/sample.hpp"
#include "temudance/kps/predicates.hpp"
#include "temudance/kps/protocol.hpp"
#include "temudance/motion/compact.hpp"
#include "temudance/motion/io.hpp"
#include "temudance/pipeline/config.hpp"
#include "temudance/pipeline/pipeline.hpp"
#include "temudance/pipeline/reports.hpp"

namespace fs = std::filesystem;
using namespace temu;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "temudance_out";
};

pipeline::PipelineConfig load_config(const Globals& g) {
  pipeline::PipelineConfig c;
  if (!g.config.empty()) {
    c = pipeline::pipeline_config_from_json(read_json_file(g.config));
  } else if (fs::exists(fs::path(g.out_dir) / pipeline::paths::kConfig)) {
    c = pipeline::pipeline_config_from_json(read_json_file(fs::path(g.out_dir) / pipeline::paths::kConfig));
  }
  if (g.seed) c.seed = *g.seed;
  pipeline::derive_seeds(c);
  c.validate();
  return c;
}

void run_stages(const Globals& g, std::vector<std::string> stages, bool force) {
  pipeline::RunOptions o;
  o.stages = std::move(stages);
  o.force = force;
  o.log = [](const std::string& m) { std::cerr << m << '\n'; };
  pipeline::run_pipeline(load_config(g), g.out_dir, o);
}

std::optional<std::string> nullable(const std::string& s) {
  if (s == "null" || s.empty()) return std::nullopt;
  return s;
}

std::vector<std::string> read_prompts(const std::string& path) {
  std::vector<std::string> prompts;
  if (path.empty()) {
    for (std::string_view n : kps::kPredicateNames) prompts.emplace_back(n);
    return prompts;
  }
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    try {
      return Json::parse(text).get<std::vector<std::string>>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kSchema, "prompt file must be a JSON array of strings: " + std::string(e.what()));
    }
  }
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) prompts.push_back(line);
  }
  return prompts;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDivergence:
    case ErrorCode::kFrozenDrift:
    case ErrorCode::kGenerator:
    case ErrorCode::kSingularInput:
    case ErrorCode::kCovarianceUndefined:
    case ErrorCode::kDegenerateEmbedding:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text- and music-conditioned dance generation at desk scale"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Root seed (overrides the config)");
  app.add_option("--out-dir", g.out_dir, "Run directory")->capture_default_str();
  app.fallthrough();

  bool force = false;

  auto* synth = app.add_subcommand("synth", "Synthesize the two corpora and the evaluation music pool");
  synth->add_flag("--force", force, "Rerun even if up to date");
  synth->callback([&] { run_stages(g, {"synth"}, force); });

  auto* align_cmd = app.add_subcommand("align", "Train the shared alignment space");
  align_cmd->add_flag("--force", force, "Rerun even if up to date");
  align_cmd->callback([&] { run_stages(g, {"align"}, force); });

  // bank
  auto* bank_cmd = app.add_subcommand("bank", "Motion-centred retrieval banks");
  bank_cmd->require_subcommand(1);
  auto* bank_build = bank_cmd->add_subcommand("build", "Build both banks and the retrieval report");
  bank_build->add_flag("--force", force, "Rerun even if up to date");
  bank_build->callback([&] { run_stages(g, {"bank"}, force); });

  std::string query, bank_kind = "md";
  std::optional<double> threshold;
  auto* bank_retrieve = bank_cmd->add_subcommand("retrieve", "Top-1 retrieval for one query");
  bank_retrieve->add_option("--query", query, "Motion JSON or a JSON array embedding")->required();
  bank_retrieve->add_option("--bank", bank_kind, "md or tm")->check(CLI::IsMember({"md", "tm"}))->capture_default_str();
  bank_retrieve->add_option("--threshold", threshold, "Similarity threshold override");
  bank_retrieve->callback([&] {
    const fs::path root = g.out_dir;
    bank::Bank b = bank::Bank::load(
        pipeline::require_artifact(root, bank_kind == "md" ? pipeline::paths::kMdBank : pipeline::paths::kTmBank));
    if (threshold) b = b.with_threshold(*threshold);
    const Json q = read_json_file(query);
    Eigen::VectorXd e;
    if (q.is_array()) {
      const auto v = q.get<std::vector<double>>();
      e = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else {
      const align::AlignmentSpace space = align::AlignmentSpace::load(pipeline::require_artifact(root, pipeline::paths::kAlign));
      e = space.embed(align::Modality::kMotion, align::motion_tokens(motion::joint_sequence_from_json(q)));
    }
    const bank::Match m = bank::top1(b, e);
    Json payload{{"text", m.entry->payload.text}, {"genre", m.entry->payload.genre}};
    if (m.entry->payload.music) payload["music_frames"] = m.entry->payload.music->features.rows();
    const Json out{{"source_id", m.entry->source_id},
                   {"similarity", m.similarity},
                   {"threshold", b.threshold()},
                   {"accepted", m.similarity >= b.threshold()},
                   {"payload", payload}};
    std::cout << out.dump(2) << '\n';
  });

  std::string stats_out;
  auto* bank_stats = bank_cmd->add_subcommand("stats", "Similarity and acceptance statistics of both banks");
  bank_stats->add_option("--out", stats_out, "Output JSON")->required();
  bank_stats->add_option("--threshold", threshold, "Similarity threshold override");
  bank_stats->callback([&] {
    const fs::path root = g.out_dir;
    const pipeline::PipelineConfig c = load_config(g);
    const align::AlignmentSpace space = align::AlignmentSpace::load(pipeline::require_artifact(root, pipeline::paths::kAlign));
    const bank::Bank md = bank::Bank::load(pipeline::require_artifact(root, pipeline::paths::kMdBank));
    const bank::Bank tm = bank::Bank::load(pipeline::require_artifact(root, pipeline::paths::kTmBank));
    const auto dance = pipeline::load_dance_corpus(pipeline::require_artifact(root, pipeline::paths::kDance));
    const auto text = pipeline::load_text_corpus(pipeline::require_artifact(root, pipeline::paths::kTextMotion));
    const double tau = threshold.value_or(c.bank_threshold);
    const bank::RetrievalStats s =
        bank::retrieval_stats(md, tm, bank::motion_queries(text, space), bank::motion_queries(dance, space), tau);
    fs::path stem = stats_out;
    stem.replace_extension();
    pipeline::emit_report(pipeline::ReportKind::kRetrieval, bank::to_json(s),
                          {pipeline::config_digest(c), pipeline::version()}, stem);
    std::cout << bank::retrieval_table(s);
  });

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "Backbone training, control fine-tuning and sampling");
  gen_cmd->require_subcommand(1);
  auto* gen_train = gen_cmd->add_subcommand("train-backbone", "Train the music-conditioned backbone");
  gen_train->add_flag("--force", force, "Rerun even if up to date");
  gen_train->callback([&] { run_stages(g, {"train"}, force); });
  auto* gen_ft = gen_cmd->add_subcommand("finetune", "Fine-tune the text control branch on pseudo-triplets");
  gen_ft->add_flag("--force", force, "Rerun even if up to date");
  gen_ft->callback([&] { run_stages(g, {"finetune"}, force); });

  std::string music_arg = "null", text_arg = "null", sample_out, backbone_path, branch_path;
  std::optional<double> scale;
  std::uint64_t sample_seed = 0;
  std::optional<int> frames;
  bool no_branch = false;
  auto* gen_sample = gen_cmd->add_subcommand("sample", "Sample one motion with guidance");
  gen_sample->add_option("--music", music_arg, "Music clip JSON or null")->capture_default_str();
  gen_sample->add_option("--text", text_arg, "Prompt or null")->capture_default_str();
  gen_sample->add_option("--scale", scale, "Music guidance scale");
  gen_sample->add_option("--seed", sample_seed, "Sampling seed")->capture_default_str();
  gen_sample->add_option("--frames", frames, "Frame count when music is null");
  gen_sample->add_option("--out", sample_out, "Output motion JSON")->required();
  gen_sample->add_option("--backbone", backbone_path, "Backbone checkpoint (default: run directory)");
  gen_sample->add_option("--branch", branch_path, "Control branch checkpoint (default: run directory)");
  gen_sample->add_flag("--no-branch", no_branch, "Sample from the backbone alone");
  gen_sample->callback([&] {
    const fs::path root = g.out_dir;
    const pipeline::PipelineConfig c = load_config(g);
    const gen::Backbone backbone = gen::Backbone::load(
        backbone_path.empty() ? pipeline::require_artifact(root, pipeline::paths::kBackbone) : fs::path(backbone_path));
    std::optional<gen::ControlBranch> branch;
    if (!no_branch) {
      branch = gen::ControlBranch::load(
          branch_path.empty() ? pipeline::require_artifact(root, pipeline::paths::kBranch) : fs::path(branch_path),
          backbone);
    }
    gen::MusicCond music;
    int fps = c.synth.fps;
    if (const auto m = nullable(music_arg)) {
      const synth::MusicClip clip = synth::music_from_json(read_json_file(*m));
      music = clip.features;
      fps = clip.fps;
    }
    gen::TextCond text;
    if (const auto t = nullable(text_arg)) text = align::text_tokens(*t);
    gen::SampleOptions o;
    o.frames = frames.value_or(static_cast<int>(c.synth.duration_s * c.synth.fps));
    o.scale = scale.value_or(c.sample.scale);
    o.diffusion_steps = c.sample.diffusion_steps;
    o.seed = sample_seed;
    o.fps = fps;
    const motion::MotionClip clip = gen::cfg_sample(backbone, branch ? &*branch : nullptr, music, text, o);
    motion::save_joint_sequence(sample_out, motion::readout_positions(clip));
  });

  // kps
  auto* kps_cmd = app.add_subcommand("kps", "Kinematic primitive success evaluation");
  kps_cmd->require_subcommand(1);
  std::string generator = "model", prompts_path, pool_dir, kps_out;
  kps::KpsOptions kopt;
  std::optional<int> kps_r, kps_g;
  std::uint64_t kps_seed = 0;
  auto* kps_run = kps_cmd->add_subcommand("run", "Prompted vs null-text success rates");
  kps_run->add_option("--generator", generator, "oracle, text-ignoring or model")
      ->check(CLI::IsMember({"oracle", "text-ignoring", "model"}))
      ->capture_default_str();
  kps_run->add_option("--prompts", prompts_path, "JSON array or one prompt per line (default: all primitives)");
  kps_run->add_option("--music-pool", pool_dir, "Music pool directory (default: run directory)");
  kps_run->add_option("-R", kps_r, "Replicates per group");
  kps_run->add_option("-G", kps_g, "Music groups");
  kps_run->add_option("--seed", kps_seed, "Evaluation seed")->capture_default_str();
  kps_run->add_option("--out", kps_out, "Report JSON")->required();
  kps_run->add_option("--backbone", backbone_path, "Backbone checkpoint for the model generator");
  kps_run->add_option("--branch", branch_path, "Control branch checkpoint for the model generator");
  kps_run->add_option("--scale", scale, "Music guidance scale for the model generator");
  kps_run->callback([&] {
    const fs::path root = g.out_dir;
    const pipeline::PipelineConfig c = load_config(g);
    const auto pool = synth::read_music_pool(pool_dir.empty() ? pipeline::require_artifact(root, pipeline::paths::kMusicPool)
                                                              : fs::path(pool_dir));
    kopt.R = kps_r.value_or(c.kps.R);
    kopt.G = kps_g.value_or(c.kps.G);
    kopt.seed = kps_seed;
    kps::KpsReport report;
    if (generator == "oracle") {
      report = kps::run_kps(kps::OracleGenerator{}, read_prompts(prompts_path), pool, kopt);
    } else if (generator == "text-ignoring") {
      report = kps::run_kps(kps::TextIgnoringGenerator{}, read_prompts(prompts_path), pool, kopt);
    } else {
      const gen::Backbone backbone = gen::Backbone::load(
          backbone_path.empty() ? pipeline::require_artifact(root, pipeline::paths::kBackbone) : fs::path(backbone_path));
      const gen::ControlBranch branch = gen::ControlBranch::load(
          branch_path.empty() ? pipeline::require_artifact(root, pipeline::paths::kBranch) : fs::path(branch_path),
          backbone);
      const gen::ModelGenerator model(backbone, &branch, scale.value_or(c.sample.scale), c.sample.diffusion_steps);
      report = kps::run_kps(model, read_prompts(prompts_path), pool, kopt);
    }
    fs::path stem = kps_out;
    stem.replace_extension();
    pipeline::emit_report(pipeline::ReportKind::kKps, kps::to_json(report),
                          {pipeline::config_digest(c), pipeline::version()}, stem);
    std::cout << kps::kps_table(report);
  });

  std::string predicate, motion_path;
  auto* kps_pred = kps_cmd->add_subcommand("predicate", "Evaluate one predicate on a motion file");
  kps_pred->add_option("--name", predicate, "Predicate name")->required();
  kps_pred->add_option("--motion", motion_path, "Joint sequence JSON")->required();
  kps_pred->callback([&] {
    const kps::PredicateResult r = kps::eval_predicate(predicate, motion::load_joint_sequence(motion_path));
    std::cout << kps::to_json(r).dump(2) << '\n';
  });

  // report
  std::string report_kind, report_in, report_out;
  auto* report_cmd = app.add_subcommand("report", "Render a report JSON as its text table");
  report_cmd->add_option("--kind", report_kind, "kps, retrieval or tradeoff")->required();
  report_cmd->add_option("--in", report_in, "Report JSON")->required();
  report_cmd->add_option("--out", report_out, "Write the table here instead of stdout");
  report_cmd->callback([&] {
    const std::string table =
        pipeline::render_report(pipeline::report_kind_from_name(report_kind), read_json_file(report_in));
    if (report_out.empty()) {
      std::cout << table;
    } else {
      write_text_file(report_out, table);
    }
  });

  // pipeline
  std::vector<std::string> stages;
  auto* pipe = app.add_subcommand("pipeline", "Run stages in dependency order, skipping up-to-date ones");
  pipe->add_option("--stages", stages, "Subset of stages (default: all enabled in the config)")->delimiter(',');
  pipe->add_flag("--force", force, "Rerun even if up to date");
  pipe->callback([&] { run_stages(g, stages, force); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
