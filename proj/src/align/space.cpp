#include "temudance/align/space.hpp"

#include <cmath>
#include <sstream>

#include "temudance/align/losses.hpp"
#include "temudance/align/tokens.hpp"
#include "temudance/common/digest.hpp"
#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/nn/optim.hpp"

namespace temu::align {

using nn::Mat;
using nn::Var;

Json to_json(const AlignConfig& c) {
  return Json{{"token_dim", c.token_dim}, {"embed_dim", c.embed_dim}, {"hidden", c.hidden},
              {"queue_size", c.queue_size}, {"momentum", c.momentum}, {"lambda", c.lambda},
              {"alpha_init", c.alpha_init}, {"lr", c.lr}, {"steps", c.steps},
              {"batch", c.batch}, {"seed", c.seed}};
}

AlignConfig align_config_from_json(const Json& j) {
  AlignConfig c;
  if (!j.is_object()) throw Error(ErrorCode::kSchema, "alignment config must be an object");
  c.token_dim = j.value("token_dim", c.token_dim);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.hidden = j.value("hidden", c.hidden);
  c.queue_size = j.value("queue_size", c.queue_size);
  c.momentum = j.value("momentum", c.momentum);
  c.lambda = j.value("lambda", c.lambda);
  c.alpha_init = j.value("alpha_init", c.alpha_init);
  c.lr = j.value("lr", c.lr);
  c.steps = j.value("steps", c.steps);
  c.batch = j.value("batch", c.batch);
  c.seed = j.value("seed", c.seed);
  return c;
}

MomentumQueue::MomentumQueue(int dim, int capacity) : dim_(dim), capacity_(capacity) {
  if (dim <= 0 || capacity < 0) throw Error(ErrorCode::kInvalidArgument, "queue needs dim > 0 and capacity >= 0");
}

void MomentumQueue::push(const Eigen::MatrixXd& keys) {
  if (keys.cols() == 0) return;
  if (keys.rows() != dim_) throw Error(ErrorCode::kDimension, "queue keys have the wrong dimension");
  for (Eigen::Index c = 0; c < keys.cols(); ++c) {
    Eigen::VectorXd k = keys.col(c);
    const double n = k.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorCode::kDegenerateEmbedding, "cannot enqueue a zero key");
    if (std::abs(n - 1.0) > 1e-6) {
      warn("queue key with norm " + std::to_string(n) + " normalised");
      k /= n;
    }
    keys_.push_back(std::move(k));
    if (static_cast<int>(keys_.size()) > capacity_) keys_.pop_front();
  }
}

Eigen::MatrixXd MomentumQueue::matrix() const {
  Eigen::MatrixXd m(dim_, occupancy());
  for (int i = 0; i < occupancy(); ++i) m.col(i) = keys_[static_cast<std::size_t>(i)];
  return m;
}

namespace {

Mat init_weight(int rows, int cols, Rng& rng) {
  const double sd = 1.0 / std::sqrt(static_cast<double>(rows));
  Mat w(rows, cols);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = sd * rng.normal();
  return w;
}

constexpr const char* kEncoderNames[] = {"E.W1", "E.b1", "E.W2", "E.b2"};

Eigen::VectorXd unit_or_throw(const Mat& v) {
  const double n = v.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw Error(ErrorCode::kDegenerateEmbedding, "embedding has zero norm before normalisation");
  }
  return v.transpose() / n;
}

// Gradient of normalise(v) pulled back to v: (I - u u^T) g / |v|.
Mat through_normalise(const Mat& v_row, const Eigen::VectorXd& g) {
  const double n = v_row.norm();
  const Eigen::VectorXd u = v_row.transpose() / n;
  return ((g - u * u.dot(g)) / n).transpose();
}

void check_tokens(const Eigen::MatrixXd& tokens, int width) {
  if (tokens.rows() < 1) throw Error(ErrorCode::kEmptyInput, "embedding needs at least one token");
  if (tokens.cols() != width) {
    throw Error(ErrorCode::kDimension,
                "tokens are " + std::to_string(tokens.cols()) + " wide, expected " + std::to_string(width));
  }
}

}  // namespace

AlignmentSpace::AlignmentSpace(const AlignConfig& config)
    : config_(config),
      queue_da_(config.embed_dim, config.queue_size),
      queue_mo_(config.embed_dim, config.queue_size) {
  if (config.token_dim <= 0 || config.embed_dim <= 0 || config.hidden <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "alignment dimensions must be positive");
  }
  if (!(config.momentum >= 0.0 && config.momentum <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "EMA momentum must lie in [0, 1]");
  }
  Rng rng(derive_seed(config.seed, {0xa119}));
  const int din = config.token_dim, h = config.hidden, d = config.embed_dim;
  params_.add("E.W1", init_weight(din, h, rng));
  params_.add("E.b1", Mat::Zero(1, h));
  params_.add("E.W2", init_weight(h, h, rng));
  params_.add("E.b2", Mat::Zero(1, h));
  params_.add("P_mot.W", init_weight(h, d, rng));
  params_.add("P_mot.b", Mat::Zero(1, d));
  params_.add("P_mus.W", init_weight(din, d, rng));
  params_.add("P_mus.b", Mat::Zero(1, d));
  params_.add("P_txt.W", init_weight(din, d, rng));
  params_.add("P_txt.b", Mat::Zero(1, d));
  params_.add("alpha_mus", Mat::Constant(1, 1, config.alpha_init));
  params_.add("alpha_txt", Mat::Constant(1, 1, config.alpha_init));
  for (const char* name : kEncoderNames) ema_.add(name, params_.get(name).value);
}

Var AlignmentSpace::project(nn::Tape& t, Modality kind, const Eigen::MatrixXd& tokens) const {
  check_tokens(tokens, config_.token_dim);
  const Var x = t.constant(tokens);
  switch (kind) {
    case Modality::kMotion: {
      const Var h1 = t.tanh(t.add_row(t.matmul(x, t.param(params_.get("E.W1"))), t.param(params_.get("E.b1"))));
      const Var h2 = t.tanh(t.add_row(t.matmul(h1, t.param(params_.get("E.W2"))), t.param(params_.get("E.b2"))));
      return t.add(t.matmul(t.mean_rows(h2), t.param(params_.get("P_mot.W"))), t.param(params_.get("P_mot.b")));
    }
    case Modality::kMusic:
      return t.add(t.matmul(t.mean_rows(x), t.param(params_.get("P_mus.W"))), t.param(params_.get("P_mus.b")));
    case Modality::kText:
      return t.add(t.matmul(t.mean_rows(x), t.param(params_.get("P_txt.W"))), t.param(params_.get("P_txt.b")));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown modality");
}

Eigen::RowVectorXd AlignmentSpace::ema_features(const Eigen::MatrixXd& tokens) const {
  check_tokens(tokens, config_.token_dim);
  const Mat h1 = ((tokens * ema_.get("E.W1").value).rowwise() + ema_.get("E.b1").value.row(0)).array().tanh();
  const Mat h2 = ((h1 * ema_.get("E.W2").value).rowwise() + ema_.get("E.b2").value.row(0)).array().tanh();
  return h2.colwise().mean();
}

Var AlignmentSpace::project_key(nn::Tape& t, const Eigen::MatrixXd& tokens) const {
  const Var f = t.constant(ema_features(tokens));
  return t.add(t.matmul(f, t.param(params_.get("P_mot.W"))), t.param(params_.get("P_mot.b")));
}

Eigen::VectorXd AlignmentSpace::embed(Modality kind, const Eigen::MatrixXd& tokens) const {
  nn::Tape t;
  return unit_or_throw(t.value(project(t, kind, tokens)));
}

Eigen::VectorXd AlignmentSpace::embed_key(const Eigen::MatrixXd& tokens) const {
  nn::Tape t;
  return unit_or_throw(t.value(project_key(t, tokens)));
}

void AlignmentSpace::ema_update(double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "EMA momentum must lie in [0, 1]");
  for (const char* name : kEncoderNames) {
    Mat& e = ema_.get(name).value;
    e = m * e + (1.0 - m) * params_.get(name).value;
  }
}

Json AlignmentSpace::to_json() const {
  Json j;
  j["config"] = align::to_json(config_);
  j["params"] = nn::to_json(params_);
  j["ema"] = nn::to_json(ema_);
  j["queue_da"] = tensor_to_json(queue_da_.matrix());
  j["queue_mo"] = tensor_to_json(queue_mo_.matrix());
  j["digest"] = digest();
  return j;
}

AlignmentSpace AlignmentSpace::from_json(const Json& j) {
  for (const char* key : {"config", "params", "ema", "queue_da", "queue_mo"}) {
    if (!j.contains(key)) throw Error(ErrorCode::kSchema, std::string("alignment checkpoint lacks '") + key + "'");
  }
  AlignmentSpace s(align_config_from_json(j.at("config")));
  nn::load_json(s.params_, j.at("params"));
  nn::load_json(s.ema_, j.at("ema"));
  s.queue_da_.push(tensor_from_json(j.at("queue_da")));
  s.queue_mo_.push(tensor_from_json(j.at("queue_mo")));
  if (j.contains("digest") && j.at("digest").get<std::string>() != s.digest()) {
    throw Error(ErrorCode::kSchema, "alignment checkpoint digest mismatch");
  }
  return s;
}

void AlignmentSpace::save(const std::filesystem::path& path) const { write_json_file(path, to_json()); }

AlignmentSpace AlignmentSpace::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

std::string AlignmentSpace::digest() const {
  Sha256 h;
  h.update(params_.digest()).update(ema_.digest());
  for (const MomentumQueue* q : {&queue_da_, &queue_mo_}) {
    const Mat m = q->matrix();
    h.update(std::to_string(m.cols()));
    h.update(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
  }
  return h.finish();
}

namespace {

Mat random_unit_columns(int dim, int count, Rng& rng) {
  Mat m(dim, count);
  for (int c = 0; c < count; ++c) {
    for (int r = 0; r < dim; ++r) m(r, c) = rng.normal();
    m.col(c).normalize();
  }
  return m;
}

struct StreamOutcome {
  double loss = 0.0;
  double grad_alpha = 0.0;
  Mat keys;  // D x batch, unit columns
};

// Mean InfoNCE over a batch of (condition, motion) pairs; injects the
// gradients into the tape through the normalisation and returns the
// surrogate terms to sum.
StreamOutcome contrastive_stream(nn::Tape& t, const AlignmentSpace& space, Modality cond_kind,
                                 const std::vector<const Mat*>& cond, const std::vector<const Mat*>& motion,
                                 const Mat& queue, double alpha, std::vector<Var>& surrogate) {
  StreamOutcome out;
  const int n = static_cast<int>(cond.size());
  out.keys.resize(space.config().embed_dim, n);
  for (int i = 0; i < n; ++i) {
    const Var vq = space.project(t, cond_kind, *cond[i]);
    const Var vk = space.project_key(t, *motion[i]);
    const Eigen::VectorXd q = unit_or_throw(t.value(vq));
    const Eigen::VectorXd k = unit_or_throw(t.value(vk));
    const InfoNceResult r = infonce_loss(q, k, queue, alpha);
    out.loss += r.loss / n;
    out.grad_alpha += r.grad_alpha / n;
    surrogate.push_back(t.dot_const(vq, through_normalise(t.value(vq), r.grad_q / n)));
    surrogate.push_back(t.dot_const(vk, through_normalise(t.value(vk), r.grad_k / n)));
    out.keys.col(i) = k;
  }
  return out;
}

}  // namespace

AlignStep alignment_step(const AlignmentSpace& space, const std::vector<const DancePair*>& batch_da,
                         const std::vector<const TextPair*>& batch_mo) {
  if (batch_da.size() < 2 || batch_mo.size() < 2) {
    throw Error(ErrorCode::kCovarianceUndefined, "alignment batches need at least 2 pairs");
  }
  const AlignConfig& config = space.config();
  std::vector<const Mat*> music, dance, text, motion;
  for (const DancePair* p : batch_da) {
    music.push_back(&p->music);
    dance.push_back(&p->motion);
  }
  for (const TextPair* p : batch_mo) {
    text.push_back(&p->text);
    motion.push_back(&p->motion);
  }

  nn::Tape t;
  std::vector<Var> surrogate;
  const StreamOutcome m2d = contrastive_stream(t, space, Modality::kMusic, music, dance, space.queue_da().matrix(),
                                               space.alpha_mus(), surrogate);
  const StreamOutcome t2m = contrastive_stream(t, space, Modality::kText, text, motion, space.queue_mo().matrix(),
                                               space.alpha_txt(), surrogate);

  // Bridge over online motion embeddings of both batches.
  const Eigen::Index D = config.embed_dim;
  std::vector<Var> online_da, online_mo;
  Mat e_da(static_cast<Eigen::Index>(dance.size()), D), e_mo(static_cast<Eigen::Index>(motion.size()), D);
  for (std::size_t b = 0; b < dance.size(); ++b) {
    online_da.push_back(space.project(t, Modality::kMotion, *dance[b]));
    e_da.row(static_cast<Eigen::Index>(b)) = unit_or_throw(t.value(online_da.back())).transpose();
  }
  for (std::size_t b = 0; b < motion.size(); ++b) {
    online_mo.push_back(space.project(t, Modality::kMotion, *motion[b]));
    e_mo.row(static_cast<Eigen::Index>(b)) = unit_or_throw(t.value(online_mo.back())).transpose();
  }
  const BridgeResult br = bridge_loss(e_da, e_mo);
  if (config.lambda != 0.0) {
    for (std::size_t b = 0; b < online_da.size(); ++b) {
      const Eigen::VectorXd g = config.lambda * br.grad_da.row(static_cast<Eigen::Index>(b)).transpose();
      surrogate.push_back(t.dot_const(online_da[b], through_normalise(t.value(online_da[b]), g)));
    }
    for (std::size_t b = 0; b < online_mo.size(); ++b) {
      const Eigen::VectorXd g = config.lambda * br.grad_mo.row(static_cast<Eigen::Index>(b)).transpose();
      surrogate.push_back(t.dot_const(online_mo[b], through_normalise(t.value(online_mo[b]), g)));
    }
  }

  AlignStep out;
  out.losses.m2d = m2d.loss;
  out.losses.t2m = t2m.loss;
  out.losses.bridge = br.loss;
  out.losses.total = out.losses.m2d + out.losses.t2m + config.lambda * out.losses.bridge;

  Var total = surrogate.front();
  for (std::size_t i = 1; i < surrogate.size(); ++i) total = t.add(total, surrogate[i]);
  out.grads = t.backward(total);
  out.grads[&space.params().get("alpha_mus")] = Mat::Constant(1, 1, m2d.grad_alpha);
  out.grads[&space.params().get("alpha_txt")] = Mat::Constant(1, 1, t2m.grad_alpha);
  out.keys_da = m2d.keys;
  out.keys_mo = t2m.keys;
  return out;
}

AlignResult train_alignment(const std::vector<DancePair>& corpus_da, const std::vector<TextPair>& corpus_mo,
                            const AlignConfig& config) {
  if (corpus_da.empty() || corpus_mo.empty()) {
    throw Error(ErrorCode::kEmptyInput, "alignment needs non-empty music-motion and text-motion corpora");
  }
  if (config.batch < 2) throw Error(ErrorCode::kInvalidArgument, "alignment batch must be at least 2");
  if (config.steps < 0 || !(config.lr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bad steps or learning rate");

  AlignResult result{AlignmentSpace(config), {}};
  AlignmentSpace& space = result.space;
  Rng rng(derive_seed(config.seed, {0x7a11}));
  // Queues start full of random unit keys so the loss is informative from step 0.
  space.queue_da().push(random_unit_columns(config.embed_dim, config.queue_size, rng));
  space.queue_mo().push(random_unit_columns(config.embed_dim, config.queue_size, rng));

  for (int step = 0; step < config.steps; ++step) {
    std::vector<const DancePair*> batch_da;
    std::vector<const TextPair*> batch_mo;
    for (int b = 0; b < config.batch; ++b) batch_da.push_back(&corpus_da[rng.below(corpus_da.size())]);
    for (int b = 0; b < config.batch; ++b) batch_mo.push_back(&corpus_mo[rng.below(corpus_mo.size())]);

    AlignStep s;
    try {
      s = alignment_step(space, batch_da, batch_mo);
    } catch (const Error& e) {
      // Overflowing parameters show up first as non-finite embeddings.
      if (e.code() != ErrorCode::kDegenerateEmbedding) throw;
      throw Error(ErrorCode::kDivergence, "alignment diverged at step " + std::to_string(step) + " (" + e.what() + ")");
    }
    s.losses.step = step;
    if (!std::isfinite(s.losses.total)) {
      throw Error(ErrorCode::kDivergence, "alignment loss became non-finite at step " + std::to_string(step));
    }
    result.trace.push_back(s.losses);
    nn::gd_step(space.params(), s.grads, config.lr);
    space.queue_da().push(s.keys_da);
    space.queue_mo().push(s.keys_mo);
    space.ema_update(config.momentum);
  }
  return result;
}

std::vector<DancePair> dance_pairs(const std::vector<synth::DanceItem>& items, int stride) {
  std::vector<DancePair> out;
  out.reserve(items.size());
  for (const synth::DanceItem& it : items) {
    out.push_back({motion_tokens(it.dance, stride), music_tokens(it.music, stride), it.label});
  }
  return out;
}

std::vector<TextPair> text_pairs(const std::vector<synth::TextMotionItem>& items, int stride) {
  std::vector<TextPair> out;
  out.reserve(items.size());
  for (const synth::TextMotionItem& it : items) {
    out.push_back({motion_tokens(it.motion, stride), text_tokens(it.text), it.label});
  }
  return out;
}

std::string loss_trace_csv(const std::vector<AlignLossRecord>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "step,L_m2d,L_t2m,L_bridge,total\n";
  for (const AlignLossRecord& r : trace) {
    os << r.step << ',' << r.m2d << ',' << r.t2m << ',' << r.bridge << ',' << r.total << '\n';
  }
  return os.str();
}

double class_retrieval_accuracy(const AlignmentSpace& space, const std::vector<DancePair>& pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "retrieval accuracy needs pairs");
  std::vector<Eigen::VectorXd> mus;
  for (const DancePair& p : pairs) mus.push_back(space.embed(Modality::kMusic, p.music));
  int hits = 0;
  for (const DancePair& p : pairs) {
    const Eigen::VectorXd m = space.embed(Modality::kMotion, p.motion);
    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t j = 0; j < mus.size(); ++j) {
      const double s = m.dot(mus[j]);
      if (s > best_sim) {
        best_sim = s;
        best = j;
      }
    }
    if (pairs[best].label == p.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

}  // namespace temu::align
