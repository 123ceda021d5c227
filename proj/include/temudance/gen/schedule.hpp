#pragma once

#include <Eigen/Core>

#include <vector>

namespace temu::gen {

// alpha_bar over steps t = 1..T, strictly decreasing inside (0, 1).
class NoiseSchedule {
 public:
  // Explicit values; throws kInvalidArgument unless strictly decreasing in (0, 1).
  explicit NoiseSchedule(std::vector<double> alpha_bar);

  // Cosine schedule (offset 0.008) squeezed affinely into [1e-4, 1 - 1e-4].
  static NoiseSchedule cosine(int T);

  int steps() const { return static_cast<int>(alpha_bar_.size()); }
  // 1-based.
  double alpha_bar(int t) const;
  // alpha_bar(t - 1), with alpha_bar(0) = 1.
  double alpha_bar_prev(int t) const;
  const std::vector<double>& values() const { return alpha_bar_; }

 private:
  std::vector<double> alpha_bar_;
};

// sqrt(a) * x0 + sqrt(1 - a) * eps for a in [0, 1].
Eigen::MatrixXd forward_diffuse(const Eigen::MatrixXd& x0, double alpha_bar, const Eigen::MatrixXd& eps);
// Same at step t of `sched`; throws kInvalidArgument for t outside [1, T].
Eigen::MatrixXd forward_diffuse(const Eigen::MatrixXd& x0, int t, const Eigen::MatrixXd& eps,
                                const NoiseSchedule& sched);

}  // namespace temu::gen
