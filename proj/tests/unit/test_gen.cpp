#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "temudance/align/tokens.hpp"
#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/gen/loss.hpp"
#include "temudance/gen/model.hpp"
#include "temudance/gen/sample.hpp"
#include "temudance/gen/schedule.hpp"
#include "temudance/gen/train.hpp"
#include "temudance/motion/compact.hpp"
#include "temudance/synth/datasets.hpp"

using namespace temu;
using namespace temu::gen;

namespace {

Eigen::MatrixXd random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double s = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = s * rng.normal();
  return m;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

ModelConfig mini_config(std::uint64_t seed = 0) {
  ModelConfig c;
  c.hidden = 8;
  c.group_hidden = 2;
  c.blocks = 2;
  c.control_blocks = 2;
  c.cond_dim = 3;
  c.text_dim = 4;
  c.seed = seed;
  return c;
}

ModelConfig small_config(std::uint64_t seed = 0) {
  ModelConfig c;
  c.hidden = 8;
  c.group_hidden = 4;
  c.blocks = 2;
  c.control_blocks = 1;
  c.seed = seed;
  return c;
}

// Random compact features with binary contact flags.
Eigen::MatrixXd random_motion(Rng& rng, int frames) {
  Eigen::MatrixXd x = random_mat(rng, frames, motion::compact_layout().dim);
  for (int ch : motion::compact_layout().contact_channels) {
    for (int f = 0; f < frames; ++f) x(f, ch) = rng.uniform() < 0.5 ? 0.0 : 1.0;
  }
  return x;
}

std::vector<TrainSample> random_corpus(Rng& rng, int n, int frames, int cond_dim, int text_dim, bool with_text) {
  std::vector<TrainSample> out;
  for (int i = 0; i < n; ++i) {
    TrainSample s{random_motion(rng, frames), random_mat(rng, frames, cond_dim), std::nullopt};
    if (with_text) s.text = random_mat(rng, 2, text_dim);
    out.push_back(std::move(s));
  }
  return out;
}

// Gives every Z a nonzero value so gradients reach the branch blocks.
void randomise_z(ControlBranch& branch, Rng& rng) {
  for (int l = 0; l < branch.blocks(); ++l) {
    nn::Parameter& z = branch.params().get("Z" + std::to_string(l));
    z.value = random_mat(rng, z.value.rows(), z.value.cols(), 0.3);
  }
}

}  // namespace

TEST_CASE("cosine schedule is strictly decreasing between the endpoint bounds") {
  for (int T : {1, 2, 50, 1000}) {
    const NoiseSchedule s = NoiseSchedule::cosine(T);
    REQUIRE(s.steps() == T);
    for (int t = 2; t <= T; ++t) CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    if (T >= 50) {
      CHECK(s.alpha_bar(1) >= 0.99);
      CHECK(s.alpha_bar(T) <= 0.01);
    }
    CHECK(s.alpha_bar(T) >= 1e-4);
    CHECK(s.alpha_bar(1) <= 1.0 - 1e-4);
    CHECK(s.alpha_bar_prev(1) == 1.0);
  }
  CHECK_THROWS_AS(NoiseSchedule::cosine(0), Error);
  CHECK_THROWS_AS(NoiseSchedule({0.9, 0.9}), Error);
  CHECK_THROWS_AS(NoiseSchedule({0.5, 0.7}), Error);
  CHECK_THROWS_AS(NoiseSchedule({1.0, 0.5}), Error);
  const NoiseSchedule s = NoiseSchedule::cosine(10);
  CHECK_THROWS_AS(s.alpha_bar(0), Error);
  CHECK_THROWS_AS(s.alpha_bar(11), Error);
}

TEST_CASE("forward diffusion examples") {
  const Eigen::MatrixXd x0 = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const Eigen::MatrixXd eps = Eigen::MatrixXd::Constant(1, 1, 1.0);
  CHECK(forward_diffuse(x0, 0.25, eps)(0, 0) == doctest::Approx(0.5 * 2.0 + std::sqrt(0.75)).epsilon(1e-12));
  CHECK(std::abs(forward_diffuse(x0, 0.25, eps)(0, 0) - 1.8660) < 1e-4);
  CHECK(forward_diffuse(x0, 1.0, eps)(0, 0) == 2.0);
  CHECK(forward_diffuse(x0, 0.0, eps)(0, 0) == 1.0);
  CHECK_THROWS_AS(forward_diffuse(x0, 0.5, Eigen::MatrixXd::Zero(2, 1)), Error);
  const NoiseSchedule s = NoiseSchedule::cosine(5);
  CHECK_THROWS_AS(forward_diffuse(x0, 6, eps, s), Error);
  CHECK(forward_diffuse(x0, 3, eps, s)(0, 0) ==
        std::sqrt(s.alpha_bar(3)) * 2.0 + std::sqrt(1.0 - s.alpha_bar(3)) * 1.0);
}

TEST_CASE("forward diffusion sample statistics") {
  const NoiseSchedule s = NoiseSchedule::cosine(50);
  const int t = 25;
  const double ab = s.alpha_bar(t);
  const Eigen::MatrixXd x0 = Eigen::MatrixXd::Constant(1, 1, 1.5);
  Rng rng(7);
  const int n = 10000;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd eps = Eigen::MatrixXd::Constant(1, 1, rng.normal());
    xs[i] = forward_diffuse(x0, t, eps, s)(0, 0);
  }
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean) / (n - 1);
  const double se = std::sqrt((1.0 - ab) / n);
  CHECK(std::abs(mean - std::sqrt(ab) * 1.5) < 3.0 * se);
  CHECK(std::abs(var / (1.0 - ab) - 1.0) < 0.05);
}

TEST_CASE("dance loss examples") {
  Rng rng(3);
  const ContactSpec spec = contact_spec(motion::compact_layout());
  const Eigen::MatrixXd x = random_motion(rng, 10);
  const LossTerms same = dance_loss(x, x, LossWeights{}, spec);
  CHECK(same.diff == 0.0);
  CHECK(same.joint == 0.0);
  CHECK(same.vel == 0.0);
  CHECK(same.total == 0.0);

  // Scalar sequences differing by 2 everywhere.
  const ContactSpec none;
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(6, 1, 1.0);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Constant(6, 1, 3.0);
  const LossTerms four = dance_loss(a, b, LossWeights{1, 0, 0, 0}, none);
  CHECK(four.total == 4.0);

  // Constant offset leaves the difference terms untouched.
  const Eigen::MatrixXd shifted = (x.array() + 0.7).matrix();
  CHECK(dance_loss(x, shifted, LossWeights{}, spec).vel < 1e-20);
  CHECK(dance_loss(x, shifted, LossWeights{}, spec).diff == doctest::Approx(0.49));

  CHECK_THROWS_AS(dance_loss(x, x.topRows(5), LossWeights{}, spec), Error);
  CHECK_THROWS_AS(LossWeights({0, 0, 0, 0}).validate(), Error);
  CHECK_THROWS_AS(LossWeights({1, -1, 0, 0}).validate(), Error);
}

TEST_CASE("dance loss terms match loop oracles") {
  Rng rng(4);
  const motion::FeatureLayout& layout = motion::compact_layout();
  const ContactSpec spec = contact_spec(layout);
  const Eigen::MatrixXd x = random_motion(rng, 7);
  const Eigen::MatrixXd y = random_mat(rng, 7, layout.dim);
  const LossTerms got = dance_loss(x, y, LossWeights{}, spec);
  const Eigen::Index k = x.rows(), F = x.cols();

  const Eigen::MatrixXd e = y - x;
  double diff = 0.0, joint = 0.0, v1 = 0.0, v2 = 0.0, contact = 0.0;
  int nj = 0;
  for (Eigen::Index f = 0; f < k; ++f)
    for (Eigen::Index c = 0; c < F; ++c) {
      diff += e(f, c) * e(f, c) / static_cast<double>(k * F);
      if (std::find(spec.contact_channels.begin(), spec.contact_channels.end(), c) == spec.contact_channels.end()) {
        joint += e(f, c) * e(f, c);
        if (f == 0) ++nj;
      }
    }
  joint /= static_cast<double>(k * nj);
  for (Eigen::Index f = 1; f < k; ++f)
    for (Eigen::Index c = 0; c < F; ++c) v1 += std::pow(e(f, c) - e(f - 1, c), 2) / static_cast<double>((k - 1) * F);
  for (Eigen::Index f = 2; f < k; ++f)
    for (Eigen::Index c = 0; c < F; ++c)
      v2 += std::pow(e(f, c) - 2 * e(f - 1, c) + e(f - 2, c), 2) / static_cast<double>((k - 2) * F);
  const std::size_t nc = spec.contact_channels.size();
  for (Eigen::Index f = 1; f < k; ++f)
    for (std::size_t i = 0; i < nc; ++i) {
      if (x(f, spec.contact_channels[i]) <= 0.5) continue;
      for (int ch : spec.foot_channels[i]) contact += std::pow(e(f, ch) - e(f - 1, ch), 2);
    }
  contact /= static_cast<double>((k - 1) * nc);

  CHECK(got.diff == doctest::Approx(diff).epsilon(1e-12));
  CHECK(got.joint == doctest::Approx(joint).epsilon(1e-12));
  CHECK(got.vel == doctest::Approx(v1 + v2).epsilon(1e-12));
  CHECK(got.contact == doctest::Approx(contact).epsilon(1e-12));
  CHECK(got.total == doctest::Approx(diff + 0.5 * joint + 0.5 * (v1 + v2) + 0.2 * contact).epsilon(1e-12));
}

TEST_CASE("backbone forward keeps shape and is deterministic") {
  Rng rng(5);
  const Backbone m(small_config());
  for (int k : {1, 3, 17}) {
    const Eigen::MatrixXd x = random_mat(rng, k, 46);
    const Eigen::MatrixXd c = random_mat(rng, k, 32);
    const Eigen::MatrixXd y = backbone_forward(m, x, 4, c);
    CHECK(y.rows() == k);
    CHECK(y.cols() == 46);
    CHECK(y.allFinite());
    CHECK(backbone_forward(m, x, 4, c) == y);
    CHECK(backbone_forward(m, x, 4, std::nullopt).allFinite());
  }
  CHECK_THROWS_AS(backbone_forward(m, random_mat(rng, 4, 45), 1, std::nullopt), Error);
  CHECK_THROWS_AS(backbone_forward(m, random_mat(rng, 4, 46), 1, random_mat(rng, 3, 32)), Error);
  CHECK(Backbone(small_config()).digest() == m.digest());
  CHECK(Backbone(small_config(1)).digest() != m.digest());
}

TEST_CASE("the full-width layout runs through the same forward pass") {
  ModelConfig c = small_config();
  c.layout = "canonical319";
  const Backbone m(c);
  Rng rng(6);
  const Eigen::MatrixXd y = backbone_forward(m, random_mat(rng, 5, 319), 2, random_mat(rng, 5, 32));
  CHECK(y.rows() == 5);
  CHECK(y.cols() == 319);
  CHECK(y.allFinite());
  CHECK_THROWS_AS(ModelGenerator(m, nullptr, 1.0, 5), Error);
}

TEST_CASE("permuting channels inside one group moves only that group's encoder path") {
  Rng rng(8);
  Backbone m(small_config());
  const auto& groups = m.layout().groups;
  const int G = m.config().group_hidden;
  const Eigen::MatrixXd x = random_mat(rng, 6, 46);
  const Eigen::MatrixXd base = encoder_group_features(m, x);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Eigen::MatrixXd p = x;
    const std::vector<int>& cols = groups[g];
    for (std::size_t i = 0; i < cols.size(); ++i) p.col(cols[i]) = x.col(cols[(i + 1) % cols.size()]);
    const Eigen::MatrixXd moved = encoder_group_features(m, p);
    for (std::size_t h = 0; h < groups.size(); ++h) {
      const auto a = base.middleCols(static_cast<Eigen::Index>(h) * G, G);
      const auto b = moved.middleCols(static_cast<Eigen::Index>(h) * G, G);
      if (h == g) {
        CHECK((a - b).cwiseAbs().maxCoeff() > 0.0);
      } else {
        CHECK(a == b);
      }
    }
  }
  // With the fusion weights zeroed the fused encoding cannot see any group.
  m.params().get("enc.fuse.w").value.setZero();
  Eigen::MatrixXd p = x;
  p.col(groups[2][0]).swap(p.col(groups[2][1]));
  CHECK(backbone_forward(m, x, 3, std::nullopt) == backbone_forward(m, p, 3, std::nullopt));
}

TEST_CASE("a fresh control branch preserves the backbone exactly") {
  Rng rng(9);
  const Backbone m(ModelConfig{});
  const ControlBranch b(m);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int k = 2 + static_cast<int>(rng.below(6));
    const Eigen::MatrixXd x = random_mat(rng, k, 46);
    const MusicCond c = i % 3 == 0 ? MusicCond{} : MusicCond{random_mat(rng, k, 32)};
    const int t = 1 + static_cast<int>(rng.below(50));
    const Eigen::MatrixXd base = backbone_forward(m, x, t, c);
    const Eigen::MatrixXd ctl = controlled_forward(m, &b, x, t, c, random_mat(rng, 3, 32));
    worst = std::max(worst, (base - ctl).cwiseAbs().maxCoeff());
  }
  CHECK(worst == 0.0);
}

TEST_CASE("null text bypasses a trained branch") {
  Rng rng(10);
  const Backbone m(small_config());
  ControlBranch b(m);
  randomise_z(b, rng);
  const Eigen::MatrixXd x = random_mat(rng, 5, 46);
  const Eigen::MatrixXd c = random_mat(rng, 5, 32);
  CHECK(controlled_forward(m, &b, x, 7, c, std::nullopt) == backbone_forward(m, x, 7, c));
  CHECK(controlled_forward(m, nullptr, x, 7, c, random_mat(rng, 2, 32)) == backbone_forward(m, x, 7, c));
  CHECK((controlled_forward(m, &b, x, 7, c, random_mat(rng, 2, 32)) - backbone_forward(m, x, 7, c)).cwiseAbs().maxCoeff() >
        0.0);
  CHECK_THROWS_AS(controlled_forward(m, &b, x, 7, c, random_mat(rng, 2, 31)), Error);
}

TEST_CASE("miniature model gradients match finite differences") {
  const NoiseSchedule sched = NoiseSchedule::cosine(10);
  for (std::uint64_t point = 0; point < 10; ++point) {
    Rng rng(200 + point);
    const ModelConfig cfg = mini_config(point);
    Backbone m(cfg);
    m.params().get("null_music").value = random_mat(rng, 1, cfg.cond_dim);
    ControlBranch branch(m);
    randomise_z(branch, rng);
    const bool controlled = point % 2 == 1;
    TrainSample s{random_motion(rng, 4), random_mat(rng, 4, cfg.cond_dim), std::nullopt};
    if (controlled) s.text = random_mat(rng, 3, cfg.text_dim);
    const int t = 1 + static_cast<int>(rng.below(10));
    const Eigen::MatrixXd eps = random_mat(rng, 4, 46);
    const bool drop = point % 4 == 2;
    const ControlBranch* bp = controlled ? &branch : nullptr;

    auto loss = [&] {
      nn::Tape tape;
      return tape.scalar(denoising_loss(tape, m, bp, s, t, eps, sched, LossWeights{}, drop));
    };
    nn::Tape tape;
    const nn::Var l = denoising_loss(tape, m, bp, s, t, eps, sched, LossWeights{}, drop);
    const nn::Gradients grads = tape.backward(l);

    std::vector<nn::ParameterSet*> sets = {&m.params()};
    if (controlled) sets.push_back(&branch.params());
    // Four-point central difference: gradients here reach 1e-7, where the
    // two-point form at small h is dominated by round-off.
    const double h = 1e-3;
    double worst = 0.0;
    int checked = 0;
    for (nn::ParameterSet* set : sets) {
      for (std::size_t p = 0; p < set->size(); ++p) {
        nn::Parameter& prm = (*set)[p];
        const auto it = grads.find(&prm);
        // Parameters off the active path (null token with music present) get no gradient.
        for (Eigen::Index i = 0; i < prm.value.size(); ++i) {
          const double g = it == grads.end() ? 0.0 : it->second.data()[i];
          double& x = prm.value.data()[i];
          const double saved = x;
          x = saved + h;
          const double up1 = loss();
          x = saved - h;
          const double dn1 = loss();
          x = saved + 2 * h;
          const double up2 = loss();
          x = saved - 2 * h;
          const double dn2 = loss();
          x = saved;
          worst = std::max(worst, rel_err(g, (8 * (up1 - dn1) - (up2 - dn2)) / (12 * h)));
          ++checked;
        }
      }
    }
    CHECK(checked > 1000);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("backbone training is deterministic and reports one loss per step") {
  Rng rng(11);
  const std::vector<TrainSample> corpus = random_corpus(rng, 6, 8, 32, 32, false);
  BackboneTrainConfig c;
  c.steps = 4;
  c.batch = 2;
  c.diffusion_steps = 10;
  c.seed = 3;
  const BackboneResult a = train_backbone(corpus, small_config(), c);
  const BackboneResult b = train_backbone(corpus, small_config(), c);
  REQUIRE(a.trace.size() == 4);
  CHECK(a.trace == b.trace);
  CHECK(a.model.digest() == b.model.digest());
  CHECK(a.model.digest() != Backbone(small_config()).digest());
  CHECK_THROWS_AS(train_backbone({}, small_config(), c), Error);
  BackboneTrainConfig bad = c;
  bad.lr = 1e12;
  bad.steps = 50;
  try {
    train_backbone(corpus, small_config(), bad);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDivergence);
  }
}

TEST_CASE("backbone checkpoint round trip") {
  Rng rng(12);
  Backbone m(small_config());
  m.set_normaliser(random_mat(rng, 1, 46).row(0), random_mat(rng, 1, 46).cwiseAbs().row(0).array() + 0.1);
  const auto path = std::filesystem::temp_directory_path() / "temu_backbone_rt.json";
  m.save(path);
  const Backbone r = Backbone::load(path);
  CHECK(r.digest() == m.digest());
  const Eigen::MatrixXd x = random_mat(rng, 4, 46);
  CHECK(backbone_forward(r, x, 2, std::nullopt) == backbone_forward(m, x, 2, std::nullopt));
  CHECK(r.normalise(x) == m.normalise(x));

  ControlBranch b(m);
  randomise_z(b, rng);
  b.save(path);
  CHECK(ControlBranch::load(path, m).digest() == b.digest());
  Json j = m.to_json();
  j["params"]["head.b"]["data"][0] = 123.0;
  CHECK_THROWS_AS(Backbone::from_json(j), Error);
  std::filesystem::remove(path);
}

TEST_CASE("fine-tuning updates only the branch and reports the weighted loss") {
  Rng rng(13);
  const std::vector<TrainSample> text = random_corpus(rng, 4, 6, 32, 32, true);
  const std::vector<TrainSample> dance = random_corpus(rng, 4, 6, 32, 32, true);
  const Backbone m(small_config());
  const ControlBranch init(m);
  const std::string frozen = m.digest();

  FinetuneConfig c;
  c.steps = 3;
  c.diffusion_steps = 10;
  c.seed = 5;
  for (double lp : {0.0, 1.0, 0.3}) {
    c.lambda_p = lp;
    const FinetuneResult r = finetune_control(m, init, text, dance, c);
    REQUIRE(r.trace.size() == 3);
    for (const FinetuneRecord& rec : r.trace) {
      if (lp == 0.0) CHECK(rec.combined == rec.text);
      if (lp == 1.0) CHECK(rec.combined == rec.dance);
      if (lp == 0.3) CHECK(rec.combined == doctest::Approx(0.7 * rec.text + 0.3 * rec.dance));
    }
    CHECK(r.branch.digest() != init.digest());
  }
  CHECK(combined_loss(2.0, 1.0, 0.5) == 1.5);
  CHECK(m.digest() == frozen);

  c.lambda_p = 1.5;
  CHECK_THROWS_AS(finetune_control(m, init, text, dance, c), Error);
  c.lambda_p = 0.5;
  CHECK_THROWS_AS(finetune_control(m, init, {}, dance, c), Error);
}

TEST_CASE("one fine-tuning step moves the controlled output away from the backbone") {
  Rng rng(14);
  const std::vector<TrainSample> text = random_corpus(rng, 3, 6, 32, 32, true);
  const Backbone m(small_config());
  FinetuneConfig c;
  c.steps = 1;
  c.diffusion_steps = 10;
  const FinetuneResult r = finetune_control(m, ControlBranch(m), text, text, c);
  const Eigen::MatrixXd x = random_mat(rng, 6, 46);
  const Eigen::MatrixXd mus = random_mat(rng, 6, 32);
  const Eigen::MatrixXd diff =
      controlled_forward(m, &r.branch, x, 5, mus, random_mat(rng, 2, 32)) - backbone_forward(m, x, 5, mus);
  CHECK(diff.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("guidance scale one returns the conditional estimate") {
  Rng rng(15);
  const Backbone m(small_config());
  ControlBranch b(m);
  randomise_z(b, rng);
  const Eigen::MatrixXd x = random_mat(rng, 5, 46);
  const Eigen::MatrixXd mus = random_mat(rng, 5, 32);
  const Eigen::MatrixXd txt = random_mat(rng, 2, 32);
  CHECK(predict_x0(m, &b, x, 3, mus, txt, 1.0) == controlled_forward(m, &b, x, 3, mus, txt));
  CHECK(predict_x0(m, nullptr, x, 3, mus, std::nullopt, 1.0) == backbone_forward(m, x, 3, mus));
  const Eigen::MatrixXd cond = controlled_forward(m, &b, x, 3, mus, txt);
  const Eigen::MatrixXd null = controlled_forward(m, &b, x, 3, std::nullopt, txt);
  CHECK(predict_x0(m, &b, x, 3, mus, txt, 2.5) == null + 2.5 * (cond - null));
  CHECK(predict_x0(m, &b, x, 3, mus, txt, 0.0) == null);
  CHECK(predict_x0(m, &b, x, 3, std::nullopt, txt, 2.5) == null);
}

TEST_CASE("sampling continuum: null text, text only, determinism") {
  Rng rng(16);
  const Backbone m(small_config());
  ControlBranch b(m);
  randomise_z(b, rng);
  const Eigen::MatrixXd mus = random_mat(rng, 8, 32);
  SampleOptions o;
  o.diffusion_steps = 10;
  o.seed = 4;
  for (double s : {0.0, 1.0, 3.0}) {
    o.scale = s;
    const motion::MotionClip with_branch = cfg_sample(m, &b, mus, std::nullopt, o);
    const motion::MotionClip plain = cfg_sample(m, nullptr, mus, std::nullopt, o);
    CHECK(with_branch.features() == plain.features());
    CHECK(cfg_sample(m, &b, mus, std::nullopt, o).features() == with_branch.features());
  }
  o.scale = 3.0;
  o.frames = 9;
  const motion::MotionClip text_only = cfg_sample(m, &b, std::nullopt, align::text_tokens("jump"), o);
  CHECK(text_only.frames() == 9);
  CHECK(text_only.features().allFinite());
  for (int ch : m.layout().contact_channels) {
    CHECK(text_only.features().col(ch).minCoeff() >= 0.0);
    CHECK(text_only.features().col(ch).maxCoeff() <= 1.0);
  }
  CHECK_THROWS_AS(cfg_sample(m, &b, std::nullopt, std::nullopt, o), Error);
  o.allow_unconditional = true;
  CHECK(cfg_sample(m, &b, std::nullopt, std::nullopt, o).frames() == 9);
  o.seed = 5;
  CHECK(cfg_sample(m, &b, mus, std::nullopt, o).features() != cfg_sample(m, &b, mus, std::nullopt, SampleOptions{8, 3.0, 10, 4}).features());
}

TEST_CASE("model generator returns joint sequences at the music frame rate") {
  synth::DatasetOptions d;
  d.items = 8;
  d.duration_s = 1.5;
  const auto items = synth::make_dance_dataset(d, 1);
  const Backbone m(small_config());
  const ModelGenerator g(m, nullptr, 2.0, 5);
  const motion::JointSequence seq = g.generate(items[0].music, std::string("jump"), 9);
  CHECK(seq.frames() == items[0].music.features.rows());
  CHECK(seq.fps() == items[0].music.fps);
  CHECK(g.generate(items[0].music, std::nullopt, 9).positions() == g.generate(items[0].music, std::nullopt, 9).positions());
  CHECK(g.describe().find("backbone") != std::string::npos);
}
