#pragma once

#include <unordered_map>

#include "temudance/common/json_io.hpp"
#include "temudance/nn/tape.hpp"

namespace temu::nn {

// p <- p - lr * g for every parameter of `set` that has a gradient.
void gd_step(ParameterSet& set, const Gradients& grads, double lr);

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Only parameters of `set` present in `grads` move.
  void step(ParameterSet& set, const Gradients& grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::unordered_map<const Parameter*, std::pair<Mat, Mat>> moments_;
};

// Scales all gradients so their joint L2 norm is at most max_norm; returns the
// norm before clipping.
double clip_gradients(Gradients& grads, double max_norm);

// {"name": {"rows", "cols", "data"}, ...} in insertion order.
Json to_json(const ParameterSet& set);
// Values are loaded into an already-shaped set; names and shapes must match.
void load_json(ParameterSet& set, const Json& j);

}  // namespace temu::nn
