#include "doctest.h"

#include <algorithm>
#include <filesystem>

#include "temudance/bank/bank.hpp"
#include "temudance/common/digest.hpp"
#include "temudance/common/error.hpp"
#include "temudance/kps/protocol.hpp"
#include "temudance/pipeline/config.hpp"
#include "temudance/pipeline/pipeline.hpp"
#include "temudance/pipeline/reports.hpp"

using namespace temu;
using namespace temu::pipeline;
namespace fs = std::filesystem;

namespace {

PipelineConfig tiny_config(std::uint64_t seed = 3) {
  PipelineConfig c;
  c.seed = seed;
  c.synth.dance_items = 16;
  c.synth.text_items = 16;
  c.synth.music_pool = 2;
  c.synth.duration_s = 1.5;
  c.align.steps = 10;
  c.backbone.steps = 6;
  c.backbone.diffusion_steps = 6;
  c.finetune.steps = 4;
  c.finetune.diffusion_steps = 6;
  c.sample.diffusion_steps = 6;
  c.kps.R = 1;
  c.kps.G = 1;
  c.tradeoff.scales = {1.0, 2.0, 3.0};
  c.tradeoff.samples = 2;
  derive_seeds(c);
  return c;
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("temu_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

std::string file_digest(const fs::path& p) { return sha256_hex(read_text_file(p)); }

}  // namespace

TEST_CASE("config round-trips through JSON and keeps its digest") {
  const PipelineConfig c = tiny_config(11);
  const PipelineConfig back = pipeline_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(config_digest(back) == config_digest(c));
  CHECK(config_digest(tiny_config(12)) != config_digest(c));
}

TEST_CASE("missing config keys keep defaults, unknown ones are rejected") {
  const PipelineConfig c = pipeline_config_from_json(Json{{"seed", 5}});
  CHECK(c.seed == 5);
  CHECK(c.synth.dance_items == SynthSettings{}.dance_items);
  try {
    pipeline_config_from_json(Json{{"seed", 5}, {"sedd", 6}});
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchema);
  }
}

TEST_CASE("derived seeds differ per module and follow the root seed") {
  const PipelineConfig a = tiny_config(1), b = tiny_config(2);
  CHECK(a.align.seed != a.model.seed);
  CHECK(a.backbone.seed != a.finetune.seed);
  CHECK(a.align.seed != b.align.seed);
  CHECK(tiny_config(1).backbone.seed == a.backbone.seed);
}

TEST_CASE("validation rejects mismatched diffusion steps and short clips") {
  PipelineConfig c = tiny_config();
  c.sample.diffusion_steps = 7;
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny_config();
  c.synth.duration_s = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny_config();
  c.model.layout = "canonical319";
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_NOTHROW(tiny_config().validate());
}

TEST_CASE("trade-off report round-trips and tabulates every row") {
  TradeoffReport r;
  r.R = 1;
  r.G = 2;
  r.samples = 4;
  r.seed = 9;
  for (double s : {1.0, 2.0, 3.0}) {
    for (bool text : {false, true}) r.rows.push_back({s, text, 0.5 * s, 0.9, text ? 0.5 : 0.0, 0.0, text ? 0.5 : 0.0});
  }
  const TradeoffReport back = tradeoff_report_from_json(to_json(r));
  REQUIRE(back.rows.size() == 6);
  CHECK(back.rows[3].scale == 2.0);
  CHECK(back.rows[3].text);
  const std::string table = tradeoff_table(r);
  for (const char* col : {"Music scale", "Div", "BAS", "Prompt%", "Null%", "Lift%"}) {
    CHECK(table.find(col) != std::string::npos);
  }
  CHECK(std::count(table.begin(), table.end(), '\n') == 7);
}

TEST_CASE("emitting a report checks its schema and stamps it") {
  const fs::path dir = fresh_dir("emit");
  kps::KpsReport k = kps::run_kps(kps::OracleGenerator{}, {"jump", "clap"},
                                  {synth::synthesize_music({"pop", 120.0, 1.0, ""}, 90, 30, 1)}, {1, 1, 4, {}});
  emit_report(ReportKind::kKps, kps::to_json(k), {"abc", "9.9"}, dir / "k");
  const Json doc = read_json_file(dir / "k.json");
  CHECK(doc.at("config_digest") == "abc");
  CHECK(doc.at("version") == "9.9");
  const std::string text = read_text_file(dir / "k.txt");
  CHECK(text.rfind("# kps report, config abc, version 9.9\n", 0) == 0);
  CHECK(text == render_report(ReportKind::kKps, doc));

  try {
    emit_report(ReportKind::kRetrieval, Json{{"threshold", 0.8}}, {"abc", "9.9"}, dir / "r");
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchema);
  }
  CHECK_FALSE(fs::exists(dir / "r.json"));
  CHECK_THROWS_AS(report_kind_from_name("fid"), Error);
}

TEST_CASE("a stage whose input is missing names the stage that produces it") {
  const fs::path dir = fresh_dir("missing");
  RunOptions o;
  o.stages = {"finetune"};
  try {
    run_pipeline(tiny_config(), dir, o);
    FAIL("expected a dependency error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDependency);
    const std::string msg = e.what();
    CHECK(msg.find("stage 'finetune'") != std::string::npos);
    CHECK(msg.find("produced by stage 'train'") != std::string::npos);
  }
  o.stages = {"paint"};
  CHECK_THROWS_AS(run_pipeline(tiny_config(), dir, o), Error);
}

TEST_CASE("a tiny end-to-end run writes every report, reruns nothing and is reproducible") {
  const PipelineConfig c = tiny_config();
  const fs::path a = fresh_dir("run_a"), b = fresh_dir("run_b");
  const RunResult first = run_pipeline(c, a);
  CHECK(first.executed == stage_names());

  const std::vector<std::string> artifacts = {"reports/kps.json",       "reports/retrieval.json", "reports/tradeoff.json",
                                              "reports/loss_traces.json", "manifest.json"};
  for (const auto& rel : artifacts) CHECK(fs::exists(a / rel));
  for (const auto& rel : {"reports/kps.txt", "reports/retrieval.txt", "reports/tradeoff.txt"}) CHECK(fs::exists(a / rel));

  const Json kps = read_json_file(a / "reports/kps.json");
  CHECK(kps.at("config_digest") == config_digest(c));
  CHECK(kps.at("version") == version());
  CHECK(tradeoff_report_from_json(read_json_file(a / "reports/tradeoff.json")).rows.size() == 6);
  CHECK(read_json_file(a / "manifest.json").at("stages").size() == stage_names().size());

  SUBCASE("second run skips every stage") {
    const RunResult again = run_pipeline(c, a);
    CHECK(again.executed.empty());
    CHECK(again.skipped == stage_names());
  }
  SUBCASE("a changed output forces its stage and dependants to rerun") {
    write_text_file(a / "reports/kps.json", "{}");
    const RunResult again = run_pipeline(c, a);
    CHECK(again.executed == std::vector<std::string>{"kps"});
    CHECK(file_digest(a / "reports/kps.json") != sha256_hex("{}"));
  }
  SUBCASE("an independent directory reproduces every artifact byte for byte") {
    run_pipeline(c, b);
    for (const auto& rel : artifacts) CHECK_MESSAGE(file_digest(a / rel) == file_digest(b / rel), rel);
    for (const auto& rel : {"checkpoints/backbone.json", "checkpoints/branch.json", "banks/md.json"}) {
      CHECK_MESSAGE(file_digest(a / rel) == file_digest(b / rel), rel);
    }
  }
}
