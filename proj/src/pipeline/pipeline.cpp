#include "temudance/pipeline/pipeline.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "temudance/align/space.hpp"
#include "temudance/align/tokens.hpp"
#include "temudance/bank/bank.hpp"
#include "temudance/common/digest.hpp"
#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/gen/sample.hpp"
#include "temudance/kps/metrics.hpp"
#include "temudance/kps/predicates.hpp"
#include "temudance/kps/protocol.hpp"
#include "temudance/motion/compact.hpp"
#include "temudance/motion/io.hpp"
#include "temudance/pipeline/reports.hpp"

namespace temu::pipeline {

namespace fs = std::filesystem;

namespace {

struct StageSpec {
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

std::string with_ext(const char* stem, const char* ext) { return std::string(stem) + ext; }

const std::vector<StageSpec>& stage_specs() {
  using namespace paths;
  static const std::vector<StageSpec> specs = {
      {"synth", {}, {kDance, kTextMotion, kMusicPool}},
      {"align", {kDance, kTextMotion}, {kAlign, kAlignTrace}},
      {"bank",
       {kAlign, kDance, kTextMotion},
       {kMdBank, kTmBank, with_ext(kRetrievalReport, ".json"), with_ext(kRetrievalReport, ".txt")}},
      {"train", {kDance}, {kBackbone, kBackboneTrace}},
      {"finetune", {kBackbone, kAlign, kMdBank, kTmBank, kDance, kTextMotion}, {kBranch, kFinetuneTrace}},
      {"kps", {kBackbone, kBranch, kMusicPool}, {with_ext(kKpsReport, ".json"), with_ext(kKpsReport, ".txt")}},
      {"tradeoff",
       {kBackbone, kBranch, kMusicPool},
       {with_ext(kTradeoffReport, ".json"), with_ext(kTradeoffReport, ".txt")}},
      {"summary", {kAlignTrace, kBackboneTrace, kFinetuneTrace}, {kLossSummary}},
  };
  return specs;
}

std::string producer_of(const std::string& rel) {
  for (const StageSpec& s : stage_specs()) {
    if (std::find(s.outputs.begin(), s.outputs.end(), rel) != s.outputs.end()) return s.name;
  }
  return "?";
}

// Digest of a file, or of every file under a directory in name order.
std::string path_digest(const fs::path& p) {
  if (!fs::is_directory(p)) return sha256_hex(read_text_file(p));
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(p)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  Sha256 h;
  for (const fs::path& f : files) h.update(f.filename().string()).update(sha256_hex(read_text_file(f)));
  return h.finish();
}

}  // namespace

fs::path require_artifact(const fs::path& root, const std::string& rel) {
  const fs::path p = root / rel;
  if (!fs::exists(p)) {
    throw Error(ErrorCode::kDependency,
                "missing '" + p.string() + "', produced by stage '" + producer_of(rel) + "'; run that stage first");
  }
  return p;
}

void save_dance_corpus(const fs::path& path, const std::vector<synth::DanceItem>& items) {
  Json arr = Json::array();
  for (const synth::DanceItem& it : items) {
    arr.push_back(Json{{"label", it.label},
                       {"genre", it.genre},
                       {"motion", motion::to_json(it.dance)},
                       {"music", synth::to_json(it.music)}});
  }
  write_text_file(path, Json{{"kind", "music-dance"}, {"items", arr}}.dump() + "\n");
}

std::vector<synth::DanceItem> load_dance_corpus(const fs::path& path) {
  const Json j = read_json_file(path);
  try {
    std::vector<synth::DanceItem> out;
    for (const Json& it : j.at("items")) {
      out.push_back(synth::DanceItem{motion::joint_sequence_from_json(it.at("motion")),
                                     synth::music_from_json(it.at("music")), it.at("label").get<std::string>(),
                                     it.at("genre").get<std::string>()});
    }
    return out;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, "malformed dance corpus '" + path.string() + "': " + e.what());
  }
}

void save_text_corpus(const fs::path& path, const std::vector<synth::TextMotionItem>& items) {
  Json arr = Json::array();
  for (const synth::TextMotionItem& it : items) {
    arr.push_back(Json{{"label", it.label}, {"text", it.text}, {"motion", motion::to_json(it.motion)}});
  }
  write_text_file(path, Json{{"kind", "text-motion"}, {"items", arr}}.dump() + "\n");
}

std::vector<synth::TextMotionItem> load_text_corpus(const fs::path& path) {
  const Json j = read_json_file(path);
  try {
    std::vector<synth::TextMotionItem> out;
    for (const Json& it : j.at("items")) {
      out.push_back(synth::TextMotionItem{motion::joint_sequence_from_json(it.at("motion")),
                                          it.at("text").get<std::string>(), it.at("label").get<std::string>()});
    }
    return out;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, "malformed text-motion corpus '" + path.string() + "': " + e.what());
  }
}

Eigen::MatrixXd fit_frames(const Eigen::MatrixXd& music, Eigen::Index frames) {
  if (music.rows() < 1) throw Error(ErrorCode::kEmptyInput, "music clip has no frames");
  Eigen::MatrixXd out(frames, music.cols());
  for (Eigen::Index f = 0; f < frames; ++f) out.row(f) = music.row(std::min(f, music.rows() - 1));
  return out;
}

namespace {

class Runner {
 public:
  Runner(const PipelineConfig& c, const fs::path& root) : c_(c), root_(root), digest_(config_digest(c)) {}

  ReportStamp stamp() const { return {digest_, version()}; }
  fs::path in(const std::string& rel) const { return require_artifact(root_, rel); }
  fs::path out(const std::string& rel) const { return root_ / rel; }

  std::string key(const StageSpec& s) const {
    Sha256 h;
    h.update(s.name).update(version()).update(slice(s.name).dump());
    for (const std::string& rel : s.inputs) h.update(rel).update(path_digest(in(rel)));
    return h.finish();
  }

  void run(const std::string& name) {
    if (name == "synth") return synth();
    if (name == "align") return align();
    if (name == "bank") return bank();
    if (name == "train") return train();
    if (name == "finetune") return finetune();
    if (name == "kps") return kps();
    if (name == "tradeoff") return tradeoff();
    if (name == "summary") return summary();
    throw Error(ErrorCode::kInvalidArgument, "unknown stage '" + name + "'");
  }

 private:
  // The part of the config a stage depends on. Stages that stamp reports
  // depend on the whole config through its digest.
  Json slice(const std::string& name) const {
    const Json all = to_json(c_);
    if (name == "synth") return Json{{"seed", c_.seed}, {"synth", all.at("synth")}};
    if (name == "align") return all.at("align");
    if (name == "train") return Json{{"model", all.at("model")}, {"backbone", all.at("backbone")}};
    if (name == "finetune") return Json{{"finetune", all.at("finetune")}};
    return Json{{"config_digest", digest_}};
  }

  std::uint64_t seed(std::uint64_t tag) const { return derive_seed(c_.seed, {tag}); }

  void synth() {
    synth::DatasetOptions o;
    o.duration_s = c_.synth.duration_s;
    o.fps = c_.synth.fps;
    o.items = c_.synth.dance_items;
    save_dance_corpus(out(paths::kDance), synth::make_dance_dataset(o, seed(0x5d)));
    o.items = c_.synth.text_items;
    save_text_corpus(out(paths::kTextMotion), synth::make_text_motion_dataset(o, seed(0x57)));
    // Held-out music for evaluation, from a separately seeded dance corpus.
    o.items = c_.synth.music_pool;
    std::vector<synth::MusicClip> pool;
    for (synth::DanceItem& it : synth::make_dance_dataset(o, seed(0x9e))) pool.push_back(std::move(it.music));
    fs::remove_all(out(paths::kMusicPool));
    synth::write_music_pool(out(paths::kMusicPool), pool);
  }

  void align() {
    const auto dance = load_dance_corpus(in(paths::kDance));
    const auto text = load_text_corpus(in(paths::kTextMotion));
    const align::AlignResult r = align::train_alignment(align::dance_pairs(dance), align::text_pairs(text), c_.align);
    r.space.save(out(paths::kAlign));
    write_text_file(out(paths::kAlignTrace), align::loss_trace_csv(r.trace));
  }

  void bank() {
    const align::AlignmentSpace space = align::AlignmentSpace::load(in(paths::kAlign));
    const auto dance = load_dance_corpus(in(paths::kDance));
    const auto text = load_text_corpus(in(paths::kTextMotion));
    const bank::Bank md = bank::build_bank(dance, space, c_.bank_threshold);
    const bank::Bank tm = bank::build_bank(text, space, c_.bank_threshold);
    md.save(out(paths::kMdBank));
    tm.save(out(paths::kTmBank));
    const bank::RetrievalStats stats = bank::retrieval_stats(md, tm, bank::motion_queries(text, space),
                                                             bank::motion_queries(dance, space), c_.bank_threshold);
    emit_report(ReportKind::kRetrieval, bank::to_json(stats), stamp(), out(paths::kRetrievalReport));
  }

  void train() {
    const auto dance = load_dance_corpus(in(paths::kDance));
    const motion::FeatureLayout& layout = motion::layout_by_name(c_.model.layout);
    std::vector<gen::TrainSample> corpus;
    for (const synth::DanceItem& it : dance) {
      Eigen::MatrixXd x0 = gen::motion_features(it.dance, layout);
      Eigen::MatrixXd music = fit_frames(it.music.features, x0.rows());
      corpus.push_back({std::move(x0), std::move(music), std::nullopt});
    }
    const gen::BackboneResult r = gen::train_backbone(corpus, c_.model, c_.backbone);
    r.model.save(out(paths::kBackbone));
    write_text_file(out(paths::kBackboneTrace), gen::loss_trace_csv(r.trace));
  }

  static gen::TrainSample to_sample(const bank::PseudoTriplet& t, const motion::FeatureLayout& layout) {
    gen::TrainSample s{gen::motion_features(t.motion, layout), std::nullopt, std::nullopt};
    if (t.music) s.music = fit_frames(t.music->features, s.x0.rows());
    if (t.text) s.text = align::text_tokens(*t.text);
    return s;
  }

  void finetune() {
    const gen::Backbone backbone = gen::Backbone::load(in(paths::kBackbone));
    const align::AlignmentSpace space = align::AlignmentSpace::load(in(paths::kAlign));
    const bank::Bank md = bank::Bank::load(in(paths::kMdBank));
    const bank::Bank tm = bank::Bank::load(in(paths::kTmBank));
    const auto dance = load_dance_corpus(in(paths::kDance));
    const auto text = load_text_corpus(in(paths::kTextMotion));
    std::vector<gen::TrainSample> text_stream, dance_stream;
    for (const auto& t : bank::make_pseudo_triplets(text, bank::motion_queries(text, space), md)) {
      text_stream.push_back(to_sample(t, backbone.layout()));
    }
    for (const auto& t : bank::make_pseudo_triplets(dance, bank::motion_queries(dance, space), tm)) {
      dance_stream.push_back(to_sample(t, backbone.layout()));
    }
    const gen::FinetuneResult r =
        gen::finetune_control(backbone, gen::ControlBranch(backbone), text_stream, dance_stream, c_.finetune);
    r.branch.save(out(paths::kBranch));
    write_text_file(out(paths::kFinetuneTrace), gen::finetune_trace_csv(r.trace));
  }

  static std::vector<std::string> prompts() {
    std::vector<std::string> p;
    for (std::string_view n : kps::kPredicateNames) p.emplace_back(n);
    return p;
  }

  void kps() {
    const gen::Backbone backbone = gen::Backbone::load(in(paths::kBackbone));
    const gen::ControlBranch branch = gen::ControlBranch::load(in(paths::kBranch), backbone);
    const auto pool = synth::read_music_pool(in(paths::kMusicPool));
    const gen::ModelGenerator generator(backbone, &branch, c_.sample.scale, c_.sample.diffusion_steps);
    kps::KpsOptions o;
    o.R = c_.kps.R;
    o.G = c_.kps.G;
    o.seed = seed(0x4b);
    emit_report(ReportKind::kKps, kps::to_json(kps::run_kps(generator, prompts(), pool, o)), stamp(),
                out(paths::kKpsReport));
  }

  // Per-clip summary used for diversity: mean and standard deviation of each
  // compact feature over time.
  static Eigen::VectorXd clip_summary(const motion::JointSequence& seq) {
    const Eigen::MatrixXd f = motion::to_compact_clip(seq).features();
    const Eigen::RowVectorXd mean = f.colwise().mean();
    const Eigen::RowVectorXd sd = ((f.rowwise() - mean).array().square().colwise().mean()).sqrt().matrix();
    Eigen::VectorXd v(2 * f.cols());
    v << mean.transpose(), sd.transpose();
    return v;
  }

  void tradeoff() {
    const gen::Backbone backbone = gen::Backbone::load(in(paths::kBackbone));
    const gen::ControlBranch branch = gen::ControlBranch::load(in(paths::kBranch), backbone);
    const auto pool = synth::read_music_pool(in(paths::kMusicPool));
    const std::vector<std::string> names = prompts();
    TradeoffReport report;
    report.R = c_.tradeoff.R;
    report.G = c_.tradeoff.G;
    report.samples = c_.tradeoff.samples;
    report.seed = seed(0x7d);
    for (double s : c_.tradeoff.scales) {
      for (bool text : {false, true}) {
        const gen::ModelGenerator generator(backbone, text ? &branch : nullptr, s, c_.sample.diffusion_steps);
        TradeoffRow row;
        row.scale = s;
        row.text = text;
        std::vector<Eigen::VectorXd> summaries;
        double bas = 0.0;
        for (int i = 0; i < c_.tradeoff.samples; ++i) {
          const synth::MusicClip& music = pool[static_cast<std::size_t>(i) % pool.size()];
          std::optional<std::string> prompt;
          if (text) prompt = names[static_cast<std::size_t>(i) % names.size()];
          const motion::JointSequence seq =
              generator.generate(music, prompt, derive_seed(report.seed, {static_cast<std::uint64_t>(i)}));
          summaries.push_back(clip_summary(seq));
          bas += music.beats.empty() ? 0.0 : kps::beat_alignment_score(kps::kinematic_beats(seq), music.beats);
        }
        row.diversity = kps::diversity(summaries);
        row.bas = bas / c_.tradeoff.samples;
        kps::KpsOptions o;
        o.R = c_.tradeoff.R;
        o.G = c_.tradeoff.G;
        o.seed = report.seed;
        const kps::KpsReport k = kps::run_kps(generator, names, pool, o);
        row.prompt_rate = k.macro.prompt_rate;
        row.null_rate = k.macro.null_rate;
        row.lift = k.macro.lift;
        report.rows.push_back(row);
      }
    }
    emit_report(ReportKind::kTradeoff, to_json(report), stamp(), out(paths::kTradeoffReport));
  }

  // Last CSV column, one value per data row.
  static std::vector<double> trace_column(const fs::path& p) {
    std::istringstream in(read_text_file(p));
    std::string line;
    std::getline(in, line);
    std::vector<double> v;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      v.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    }
    return v;
  }

  static Json trace_summary(const std::vector<double>& v, int window) {
    const int n = static_cast<int>(v.size());
    if (n == 0) return Json{{"steps", 0}};
    const int w = std::max(1, std::min(window, n / 2));
    double first = 0.0, last = 0.0;
    for (int i = 0; i < w; ++i) {
      first += v[static_cast<std::size_t>(i)] / w;
      last += v[static_cast<std::size_t>(n - w + i)] / w;
    }
    return Json{{"steps", n},       {"window", w},           {"first_mean", first},
                {"last_mean", last}, {"ratio", last / first}, {"halved", last < 0.5 * first}};
  }

  void summary() {
    Json doc{{"traces",
              {{"align", trace_summary(trace_column(in(paths::kAlignTrace)), 10)},
               {"backbone", trace_summary(trace_column(in(paths::kBackboneTrace)), 50)},
               {"finetune", trace_summary(trace_column(in(paths::kFinetuneTrace)), 50)}}},
             {"config_digest", digest_},
             {"version", version()}};
    write_json_file(out(paths::kLossSummary), doc);
  }

  const PipelineConfig& c_;
  fs::path root_;
  std::string digest_;
};

}  // namespace

RunResult run_pipeline(const PipelineConfig& config, const fs::path& root, const RunOptions& options) {
  config.validate();
  std::vector<std::string> wanted = options.stages.empty() ? config.stages : options.stages;
  for (const std::string& s : wanted) {
    if (std::find(stage_names().begin(), stage_names().end(), s) == stage_names().end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown stage '" + s + "'");
    }
  }
  auto log = [&](const std::string& m) {
    if (options.log) options.log(m);
  };

  fs::create_directories(root);
  write_json_file(root / paths::kConfig, to_json(config));
  const fs::path manifest_path = root / paths::kManifest;
  Json manifest = fs::exists(manifest_path) ? read_json_file(manifest_path) : Json::object();
  if (!manifest.contains("stages") || !manifest.at("stages").is_object()) manifest["stages"] = Json::object();
  manifest["version"] = version();
  manifest["config_digest"] = config_digest(config);

  Runner runner(config, root);
  RunResult result;
  for (const StageSpec& spec : stage_specs()) {
    if (std::find(wanted.begin(), wanted.end(), spec.name) == wanted.end()) continue;
    try {
      const std::string key = runner.key(spec);
      const Json& prev = manifest["stages"].contains(spec.name) ? manifest["stages"][spec.name] : Json();
      bool fresh = !options.force && prev.is_object() && prev.value("key", "") == key;
      if (fresh) {
        for (const std::string& rel : spec.outputs) {
          const fs::path p = root / rel;
          const Json& outs = prev.at("outputs");
          if (!fs::exists(p) || !outs.contains(rel) || outs.at(rel).get<std::string>() != path_digest(p)) fresh = false;
        }
      }
      if (fresh) {
        log("stage '" + spec.name + "': up to date");
        result.skipped.push_back(spec.name);
        continue;
      }
      log("stage '" + spec.name + "': running");
      runner.run(spec.name);
      Json outs = Json::object();
      for (const std::string& rel : spec.outputs) outs[rel] = path_digest(root / rel);
      manifest["stages"][spec.name] = Json{{"key", key}, {"outputs", outs}};
      write_json_file(manifest_path, manifest);
      result.executed.push_back(spec.name);
    } catch (const Error& e) {
      throw Error(e.code(), "stage '" + spec.name + "': " + e.message());
    }
  }
  write_json_file(manifest_path, manifest);
  return result;
}

}  // namespace temu::pipeline
