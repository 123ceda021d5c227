#include "temudance/gen/loss.hpp"

#include <algorithm>
#include <cmath>

#include "temudance/common/error.hpp"

namespace temu::gen {

void LossWeights::validate() const {
  for (double v : {diff, joint, vel, contact}) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::kInvalidArgument, "loss weights must be finite and >= 0");
  }
  if (diff + joint + vel + contact <= 0.0) throw Error(ErrorCode::kInvalidArgument, "at least one loss weight must be positive");
}

Json to_json(const LossWeights& w) {
  return Json{{"diff", w.diff}, {"joint", w.joint}, {"vel", w.vel}, {"contact", w.contact}};
}

LossWeights loss_weights_from_json(const Json& j) {
  LossWeights w;
  w.diff = j.value("diff", w.diff);
  w.joint = j.value("joint", w.joint);
  w.vel = j.value("vel", w.vel);
  w.contact = j.value("contact", w.contact);
  w.validate();
  return w;
}

ContactSpec contact_spec(const motion::FeatureLayout& layout) {
  return ContactSpec{layout.contact_channels, layout.foot_channels};
}

Eigen::MatrixXd contact_mask(const Eigen::MatrixXd& x, const ContactSpec& spec) {
  const Eigen::Index k = x.rows();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(k - 1, 0), static_cast<Eigen::Index>(spec.contact_channels.size()));
  for (std::size_t c = 0; c < spec.contact_channels.size(); ++c) {
    const int ch = spec.contact_channels[c];
    if (ch < 0 || ch >= x.cols()) throw Error(ErrorCode::kDimension, "contact channel outside the feature width");
    for (Eigen::Index f = 1; f < k; ++f) m(f - 1, static_cast<Eigen::Index>(c)) = x(f, ch) > 0.5 ? 1.0 : 0.0;
  }
  return m;
}

namespace {

double mse_scale(Eigen::Index n) { return n > 0 ? 1.0 / static_cast<double>(n) : 0.0; }

}  // namespace

nn::Var dance_loss(nn::Tape& t, nn::Var x0_hat, const Eigen::MatrixXd& x0, const LossWeights& w,
                   const ContactSpec& spec, const Eigen::MatrixXd& mask, LossTerms* terms) {
  const Eigen::MatrixXd& pred = t.value(x0_hat);
  if (pred.rows() != x0.rows() || pred.cols() != x0.cols()) {
    throw Error(ErrorCode::kDimension, "prediction and target differ in shape");
  }
  const Eigen::Index k = x0.rows(), F = x0.cols();
  const nn::Var err = t.sub(x0_hat, t.constant(x0));

  const nn::Var l_diff = t.mean(t.square(err));

  std::vector<int> body;
  for (int c = 0; c < F; ++c) {
    if (std::find(spec.contact_channels.begin(), spec.contact_channels.end(), c) == spec.contact_channels.end()) {
      body.push_back(c);
    }
  }
  const nn::Var l_joint = body.empty() ? t.constant(Eigen::MatrixXd::Zero(1, 1)) : t.mean(t.square(t.select_cols(err, body)));

  nn::Var l_vel = t.constant(Eigen::MatrixXd::Zero(1, 1));
  if (k >= 2) {
    const nn::Var d1 = t.row_diff(err);
    l_vel = t.add(l_vel, t.mean(t.square(d1)));
    if (k >= 3) l_vel = t.add(l_vel, t.mean(t.square(t.row_diff(d1))));
  }

  nn::Var l_contact = t.constant(Eigen::MatrixXd::Zero(1, 1));
  const Eigen::Index nc = static_cast<Eigen::Index>(spec.contact_channels.size());
  if (k >= 2 && nc > 0) {
    if (mask.rows() != k - 1 || mask.cols() != nc) throw Error(ErrorCode::kDimension, "contact mask has the wrong shape");
    std::vector<int> feet;
    for (const auto& f : spec.foot_channels) feet.insert(feet.end(), f.begin(), f.end());
    Eigen::MatrixXd wide(k - 1, 3 * nc);
    for (Eigen::Index c = 0; c < nc; ++c) wide.middleCols(3 * c, 3) = mask.col(c).replicate(1, 3);
    const nn::Var slide = t.square(t.row_diff(t.select_cols(err, feet)));
    l_contact = t.scale(t.dot_const(slide, wide), mse_scale((k - 1) * nc));
  }

  nn::Var total = t.scale(l_diff, w.diff);
  total = t.add(total, t.scale(l_joint, w.joint));
  total = t.add(total, t.scale(l_vel, w.vel));
  total = t.add(total, t.scale(l_contact, w.contact));
  if (terms != nullptr) {
    terms->diff = t.scalar(l_diff);
    terms->joint = t.scalar(l_joint);
    terms->vel = t.scalar(l_vel);
    terms->contact = t.scalar(l_contact);
    terms->total = t.scalar(total);
  }
  return total;
}

LossTerms dance_loss(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x0_hat, const LossWeights& w,
                     const ContactSpec& spec) {
  w.validate();
  nn::Tape t;
  LossTerms terms;
  dance_loss(t, t.constant(x0_hat), x0, w, spec, contact_mask(x0, spec), &terms);
  return terms;
}

}  // namespace temu::gen
