#include "temudance/gen/model.hpp"

#include <cmath>

#include "temudance/common/digest.hpp"
#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/nn/optim.hpp"

namespace temu::gen {

using nn::Mat;
using nn::Tape;
using nn::Var;

void ModelConfig::validate() const {
  motion::layout_by_name(layout);
  if (cond_dim < 1 || text_dim < 1 || hidden < 2 || group_hidden < 1 || blocks < 1) {
    throw Error(ErrorCode::kInvalidArgument, "model dimensions must be positive");
  }
  if (hidden % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "hidden width must be even for sinusoidal embeddings");
  if (control_blocks < 0 || control_blocks > blocks) {
    throw Error(ErrorCode::kInvalidArgument, "control blocks must lie in [0, blocks]");
  }
}

Json to_json(const ModelConfig& c) {
  return Json{{"layout", c.layout},     {"cond_dim", c.cond_dim},         {"text_dim", c.text_dim},
              {"hidden", c.hidden},     {"group_hidden", c.group_hidden}, {"blocks", c.blocks},
              {"control_blocks", c.control_blocks}, {"seed", c.seed}};
}

ModelConfig model_config_from_json(const Json& j) {
  ModelConfig c;
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "model config must be an object");
  c.layout = j.value("layout", c.layout);
  c.cond_dim = j.value("cond_dim", c.cond_dim);
  c.text_dim = j.value("text_dim", c.text_dim);
  c.hidden = j.value("hidden", c.hidden);
  c.group_hidden = j.value("group_hidden", c.group_hidden);
  c.blocks = j.value("blocks", c.blocks);
  c.control_blocks = j.value("control_blocks", c.control_blocks);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

namespace {

Mat init(Rng& rng, int rows, int cols, double gain = 1.0) {
  const double sd = gain / std::sqrt(static_cast<double>(rows));
  Mat w(rows, cols);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = sd * rng.normal();
  return w;
}

std::string blk(int l) { return "blk" + std::to_string(l) + "."; }

const char* const kBlockTensors[] = {"sa.q", "sa.k", "sa.v", "sa.o", "ca.q", "ca.k", "ca.v", "ca.o",
                                     "ff.w1", "ff.b1", "ff.w2", "ff.b2", "film.w", "film.b"};

void add_block(nn::ParameterSet& ps, const std::string& p, int H, int C, Rng& rng) {
  ps.add(p + "sa.q", init(rng, H, H));
  ps.add(p + "sa.k", init(rng, H, H));
  ps.add(p + "sa.v", init(rng, H, H));
  ps.add(p + "sa.o", init(rng, H, H, 0.5));
  ps.add(p + "ca.q", init(rng, H, H));
  ps.add(p + "ca.k", init(rng, C, H));
  ps.add(p + "ca.v", init(rng, C, H));
  ps.add(p + "ca.o", init(rng, H, H, 0.5));
  ps.add(p + "ff.w1", init(rng, H, 2 * H));
  ps.add(p + "ff.b1", Mat::Zero(1, 2 * H));
  ps.add(p + "ff.w2", init(rng, 2 * H, H, 0.5));
  ps.add(p + "ff.b2", Mat::Zero(1, H));
  ps.add(p + "film.w", init(rng, H, 4 * H, 0.1));
  ps.add(p + "film.b", Mat::Zero(1, 4 * H));
}

Json row_json(const Eigen::RowVectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::RowVectorXd row_from_json(const Json& j, int n) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<int>(v.size()) != n) throw Error(ErrorCode::kSchema, "normaliser has the wrong width");
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(), n);
}

}  // namespace

Backbone::Backbone(const ModelConfig& config) : config_(config) {
  config_.validate();
  layout_ = &motion::layout_by_name(config_.layout);
  const int H = config_.hidden, C = config_.cond_dim, G = config_.group_hidden;
  Rng rng(derive_seed(config_.seed, {0xbac6}));
  for (std::size_t g = 0; g < layout_->groups.size(); ++g) {
    const std::string p = "enc.g" + std::to_string(g) + ".";
    params_.add(p + "w", init(rng, static_cast<int>(layout_->groups[g].size()), G));
    params_.add(p + "b", Mat::Zero(1, G));
  }
  params_.add("enc.fuse.w", init(rng, G * static_cast<int>(layout_->groups.size()), H));
  params_.add("enc.fuse.b", Mat::Zero(1, H));
  params_.add("time.w1", init(rng, H, H));
  params_.add("time.b1", Mat::Zero(1, H));
  params_.add("time.w2", init(rng, H, H));
  params_.add("time.b2", Mat::Zero(1, H));
  params_.add("null_music", init(rng, 1, C, 0.1));
  for (int l = 0; l < config_.blocks; ++l) add_block(params_, blk(l), H, C, rng);
  params_.add("head.w", init(rng, H, layout_->dim, 0.1));
  params_.add("head.b", Mat::Zero(1, layout_->dim));
  mean_ = Eigen::RowVectorXd::Zero(layout_->dim);
  scale_ = Eigen::RowVectorXd::Ones(layout_->dim);
}

void Backbone::set_normaliser(Eigen::RowVectorXd mean, Eigen::RowVectorXd scale) {
  if (mean.size() != feature_dim() || scale.size() != feature_dim()) {
    throw Error(ErrorCode::kDimension, "normaliser width differs from the feature width");
  }
  if (!(scale.array() > 0.0).all() || !scale.allFinite() || !mean.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "normaliser scales must be positive and finite");
  }
  mean_ = std::move(mean);
  scale_ = std::move(scale);
}

Eigen::MatrixXd Backbone::normalise(const Eigen::MatrixXd& raw) const {
  if (raw.cols() != feature_dim()) throw Error(ErrorCode::kDimension, "feature width differs from the model");
  return (raw.rowwise() - mean_).array().rowwise() / scale_.array();
}

Eigen::MatrixXd Backbone::denormalise(const Eigen::MatrixXd& z) const {
  if (z.cols() != feature_dim()) throw Error(ErrorCode::kDimension, "feature width differs from the model");
  return (z.array().rowwise() * scale_.array()).matrix().rowwise() + mean_;
}

std::string Backbone::digest() const {
  Sha256 h;
  h.update(params_.digest());
  h.update(std::span<const double>(mean_.data(), static_cast<std::size_t>(mean_.size())));
  h.update(std::span<const double>(scale_.data(), static_cast<std::size_t>(scale_.size())));
  return h.finish();
}

Json Backbone::to_json() const {
  return Json{{"config", gen::to_json(config_)},
              {"params", nn::to_json(params_)},
              {"normaliser", {{"mean", row_json(mean_)}, {"scale", row_json(scale_)}}},
              {"digest", digest()}};
}

Backbone Backbone::from_json(const Json& j) {
  try {
    Backbone b(model_config_from_json(j.at("config")));
    nn::load_json(b.params_, j.at("params"));
    b.set_normaliser(row_from_json(j.at("normaliser").at("mean"), b.feature_dim()),
                     row_from_json(j.at("normaliser").at("scale"), b.feature_dim()));
    if (j.contains("digest") && j.at("digest").get<std::string>() != b.digest()) {
      throw Error(ErrorCode::kSchema, "backbone checkpoint digest mismatch");
    }
    return b;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed backbone checkpoint: ") + e.what());
  }
}

void Backbone::save(const std::filesystem::path& path) const { write_json_file(path, to_json()); }

Backbone Backbone::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

ControlBranch::ControlBranch(const Backbone& backbone) : blocks_(backbone.config().control_blocks) {
  const ModelConfig& c = backbone.config();
  Rng rng(derive_seed(c.seed, {0xc0de}));
  params_.add("txt.w", init(rng, c.text_dim, c.cond_dim));
  params_.add("txt.b", Mat::Zero(1, c.cond_dim));
  for (int l = 0; l < blocks_; ++l) {
    for (const char* name : kBlockTensors) params_.add(blk(l) + name, backbone.params().get(blk(l) + name).value);
    params_.add("Z" + std::to_string(l), Mat::Zero(c.hidden, c.hidden));
  }
}

Json ControlBranch::to_json() const {
  return Json{{"blocks", blocks_}, {"params", nn::to_json(params_)}, {"digest", digest()}};
}

ControlBranch ControlBranch::from_json(const Json& j, const Backbone& backbone) {
  try {
    ControlBranch b(backbone);
    if (j.at("blocks").get<int>() != b.blocks_) throw Error(ErrorCode::kSchema, "control branch depth differs");
    nn::load_json(b.params_, j.at("params"));
    if (j.contains("digest") && j.at("digest").get<std::string>() != b.digest()) {
      throw Error(ErrorCode::kSchema, "control branch checkpoint digest mismatch");
    }
    return b;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed control branch checkpoint: ") + e.what());
  }
}

void ControlBranch::save(const std::filesystem::path& path) const { write_json_file(path, to_json()); }

ControlBranch ControlBranch::load(const std::filesystem::path& path, const Backbone& backbone) {
  return from_json(read_json_file(path), backbone);
}

namespace {

Mat sinusoid(int H, double pos) {
  Mat e(1, H);
  const int half = H / 2;
  for (int i = 0; i < half; ++i) {
    const double w = std::pow(10000.0, -static_cast<double>(i) / half);
    e(0, i) = std::sin(pos * w);
    e(0, half + i) = std::cos(pos * w);
  }
  return e;
}

Mat positional(int k, int H) {
  Mat pe(k, H);
  for (int f = 0; f < k; ++f) pe.row(f) = sinusoid(H, f).row(0);
  return pe;
}

class Graph {
 public:
  Graph(Tape& t, const Backbone& m) : t_(t), m_(m), H_(m.config().hidden) {}

  Var P(const nn::ParameterSet& ps, const std::string& name) { return t_.param(ps.get(name)); }

  void check(const Eigen::MatrixXd& x, const MusicCond& music, const TextCond& text) {
    if (x.rows() < 1 || x.cols() != m_.feature_dim()) {
      throw Error(ErrorCode::kDimension, "x_t must be k x " + std::to_string(m_.feature_dim()));
    }
    if (music && (music->rows() != x.rows() || music->cols() != m_.config().cond_dim)) {
      throw Error(ErrorCode::kDimension, "music condition must be k x " + std::to_string(m_.config().cond_dim));
    }
    if (text && (text->rows() < 1 || text->cols() != m_.config().text_dim)) {
      throw Error(ErrorCode::kDimension, "text condition must be N x " + std::to_string(m_.config().text_dim));
    }
  }

  Var encode(const Eigen::MatrixXd& x) {
    const Var xv = t_.constant(x);
    std::vector<Var> parts;
    const auto& groups = m_.layout().groups;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const std::string p = "enc.g" + std::to_string(g) + ".";
      parts.push_back(t_.tanh(t_.add_row(t_.matmul(t_.select_cols(xv, groups[g]), P(m_.params(), p + "w")),
                                         P(m_.params(), p + "b"))));
    }
    const Var fused = t_.add_row(t_.matmul(t_.concat_cols(parts), P(m_.params(), "enc.fuse.w")),
                                 P(m_.params(), "enc.fuse.b"));
    return t_.add(fused, t_.constant(positional(static_cast<int>(x.rows()), H_)));
  }

  Var time_embedding(int t) {
    const Var s = t_.constant(sinusoid(H_, t));
    const Var h = t_.silu(t_.add(t_.matmul(s, P(m_.params(), "time.w1")), P(m_.params(), "time.b1")));
    return t_.add(t_.matmul(h, P(m_.params(), "time.w2")), P(m_.params(), "time.b2"));
  }

  Var music(const MusicCond& music, int k) {
    if (music) return t_.constant(*music);
    return t_.broadcast_rows(P(m_.params(), "null_music"), k);
  }

  Var attend(Var q_in, Var kv_in, const nn::ParameterSet& ps, const std::string& p) {
    const Var q = t_.matmul(q_in, P(ps, p + "q"));
    const Var k = t_.matmul(kv_in, P(ps, p + "k"));
    const Var v = t_.matmul(kv_in, P(ps, p + "v"));
    const Var a = t_.softmax_rows(t_.scale(t_.matmul(q, t_.transpose(k)), 1.0 / std::sqrt(static_cast<double>(H_))));
    return t_.matmul(t_.matmul(a, v), P(ps, p + "o"));
  }

  Var block(const nn::ParameterSet& ps, const std::string& p, Var h, Var cond, Var temb) {
    Var a = t_.layer_norm_rows(h);
    h = t_.add(h, attend(a, a, ps, p + "sa."));
    a = t_.layer_norm_rows(h);
    h = t_.add(h, attend(a, cond, ps, p + "ca."));
    a = t_.layer_norm_rows(h);
    Var f = t_.gelu(t_.add_row(t_.matmul(a, P(ps, p + "ff.w1")), P(ps, p + "ff.b1")));
    const Var film = t_.add(t_.matmul(temb, P(ps, p + "film.w")), P(ps, p + "film.b"));
    std::vector<int> gcols(2 * H_), bcols(2 * H_);
    for (int i = 0; i < 2 * H_; ++i) {
      gcols[i] = i;
      bcols[i] = 2 * H_ + i;
    }
    f = t_.add_row(t_.mul_row(f, t_.add_scalar(t_.select_cols(film, gcols), 1.0)), t_.select_cols(film, bcols));
    return t_.add(h, t_.add_row(t_.matmul(f, P(ps, p + "ff.w2")), P(ps, p + "ff.b2")));
  }

  Var run(const ControlBranch* branch, const Eigen::MatrixXd& x, int t, const MusicCond& music_cond,
          const TextCond& text) {
    check(x, music_cond, text);
    const int k = static_cast<int>(x.rows());
    const Var temb = time_embedding(t);
    const Var cond = music(music_cond, k);
    const bool controlled = branch != nullptr && text.has_value();
    Var text_cond{};
    if (controlled) {
      text_cond = t_.add_row(t_.matmul(t_.constant(*text), P(branch->params(), "txt.w")), P(branch->params(), "txt.b"));
    }
    Var h = encode(x);
    for (int l = 0; l < m_.config().blocks; ++l) {
      const Var base = block(m_.params(), blk(l), h, cond, temb);
      if (controlled && l < branch->blocks()) {
        const Var side = block(branch->params(), blk(l), h, text_cond, temb);
        h = t_.add(base, t_.matmul(side, P(branch->params(), "Z" + std::to_string(l))));
      } else {
        h = base;
      }
    }
    return t_.add_row(t_.matmul(t_.layer_norm_rows(h), P(m_.params(), "head.w")), P(m_.params(), "head.b"));
  }

 private:
  Tape& t_;
  const Backbone& m_;
  int H_;
};

}  // namespace

Eigen::MatrixXd encoder_group_features(const Backbone& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.feature_dim()) throw Error(ErrorCode::kDimension, "feature width differs from the model");
  const auto& groups = model.layout().groups;
  const int G = model.config().group_hidden;
  Eigen::MatrixXd out(x.rows(), G * static_cast<int>(groups.size()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Eigen::MatrixXd sub(x.rows(), static_cast<Eigen::Index>(groups[g].size()));
    for (std::size_t c = 0; c < groups[g].size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = x.col(groups[g][c]);
    const std::string p = "enc.g" + std::to_string(g) + ".";
    const Mat pre = (sub * model.params().get(p + "w").value).rowwise() + model.params().get(p + "b").value.row(0);
    out.middleCols(static_cast<Eigen::Index>(g) * G, G) = pre.array().tanh().matrix();
  }
  return out;
}

Var backbone_forward(Tape& tape, const Backbone& model, const Eigen::MatrixXd& x_t, int t, const MusicCond& music) {
  return Graph(tape, model).run(nullptr, x_t, t, music, std::nullopt);
}

Var controlled_forward(Tape& tape, const Backbone& model, const ControlBranch* branch, const Eigen::MatrixXd& x_t,
                       int t, const MusicCond& music, const TextCond& text) {
  return Graph(tape, model).run(branch, x_t, t, music, text);
}

Eigen::MatrixXd backbone_forward(const Backbone& model, const Eigen::MatrixXd& x_t, int t, const MusicCond& music) {
  Tape tape;
  return tape.value(backbone_forward(tape, model, x_t, t, music));
}

Eigen::MatrixXd controlled_forward(const Backbone& model, const ControlBranch* branch, const Eigen::MatrixXd& x_t,
                                   int t, const MusicCond& music, const TextCond& text) {
  Tape tape;
  return tape.value(controlled_forward(tape, model, branch, x_t, t, music, text));
}

}  // namespace temu::gen
