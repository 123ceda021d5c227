#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "temudance/nn/tape.hpp"

namespace temu::testing {

// Largest relative error between the tape gradient and central differences
// over every scalar of every parameter in `set`. Relative error uses
// |a - n| / max(|a|, |n|, floor) so exact zeros do not divide by zero.
inline double max_gradient_error(nn::ParameterSet& set, const std::function<nn::Var(nn::Tape&)>& loss_fn,
                                 double eps = 1e-5, double floor = 1e-6) {
  nn::Tape tape;
  const nn::Var loss = loss_fn(tape);
  const nn::Gradients grads = tape.backward(loss);
  auto eval = [&] {
    nn::Tape t;
    return t.scalar(loss_fn(t));
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    nn::Parameter& p = set[i];
    auto it = grads.find(&p);
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      const double saved = p.value.data()[k];
      p.value.data()[k] = saved + eps;
      const double up = eval();
      p.value.data()[k] = saved - eps;
      const double down = eval();
      p.value.data()[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = it == grads.end() ? 0.0 : it->second.data()[k];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace temu::testing
