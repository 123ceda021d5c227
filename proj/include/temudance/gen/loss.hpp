#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

#include "temudance/common/json_io.hpp"
#include "temudance/motion/types.hpp"
#include "temudance/nn/tape.hpp"

namespace temu::gen {

struct LossWeights {
  double diff = 1.0;
  double joint = 0.5;
  double vel = 0.5;
  double contact = 0.2;

  // Finite, non-negative, at least one positive.
  void validate() const;
};

Json to_json(const LossWeights& w);
LossWeights loss_weights_from_json(const Json& j);

// Which channels are contact flags, and for each flag the three channels whose
// frame-to-frame change counts as foot sliding.
struct ContactSpec {
  std::vector<int> contact_channels;
  std::vector<std::array<int, 3>> foot_channels;
};

ContactSpec contact_spec(const motion::FeatureLayout& layout);

struct LossTerms {
  double diff = 0.0;
  double joint = 0.0;
  double vel = 0.0;
  double contact = 0.0;
  double total = 0.0;
};

// (frames - 1) x contacts mask: 1 where the reference flags contact (> 0.5)
// at the later frame of the pair.
Eigen::MatrixXd contact_mask(const Eigen::MatrixXd& contacts_at_frames, const ContactSpec& spec);

// Records the weighted loss on a tape. L_diff is the MSE over all channels,
// L_joint the MSE over non-contact channels, L_vel the MSE of first plus the
// MSE of second temporal differences, L_contact the masked squared foot
// displacement of the prediction relative to the reference (pure sliding when
// the reference foot is planted), averaged over (frames - 1) x contacts.
nn::Var dance_loss(nn::Tape& tape, nn::Var x0_hat, const Eigen::MatrixXd& x0, const LossWeights& w,
                   const ContactSpec& spec, const Eigen::MatrixXd& mask, LossTerms* terms = nullptr);

// Plain evaluation; the contact mask comes from the contact channels of x0.
LossTerms dance_loss(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x0_hat, const LossWeights& w,
                     const ContactSpec& spec);

}  // namespace temu::gen
