#include "temudance/gen/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "temudance/common/error.hpp"

namespace temu::gen {

NoiseSchedule::NoiseSchedule(std::vector<double> alpha_bar) : alpha_bar_(std::move(alpha_bar)) {
  if (alpha_bar_.empty()) throw Error(ErrorCode::kInvalidArgument, "noise schedule needs at least one step");
  for (std::size_t i = 0; i < alpha_bar_.size(); ++i) {
    const double a = alpha_bar_[i];
    if (!(a > 0.0 && a < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha_bar values must lie in (0, 1)");
    if (i > 0 && !(a < alpha_bar_[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "alpha_bar must decrease strictly");
    }
  }
}

NoiseSchedule NoiseSchedule::cosine(int T) {
  if (T < 1) throw Error(ErrorCode::kInvalidArgument, "noise schedule needs T >= 1");
  constexpr double s = 0.008;
  constexpr double lo = 1e-4;
  auto f = [&](double t) {
    const double c = std::cos((t / T + s) / (1.0 + s) * std::numbers::pi / 2.0);
    return c * c;
  };
  std::vector<double> a(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const double raw = std::clamp(f(t) / f(0), 0.0, 1.0);
    a[static_cast<std::size_t>(t - 1)] = lo + (1.0 - 2.0 * lo) * raw;
  }
  return NoiseSchedule(std::move(a));
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 1 || t > steps()) {
    throw Error(ErrorCode::kInvalidArgument, "step " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
  }
  return alpha_bar_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar_prev(int t) const { return t == 1 ? 1.0 : alpha_bar(t - 1); }

Eigen::MatrixXd forward_diffuse(const Eigen::MatrixXd& x0, double alpha_bar, const Eigen::MatrixXd& eps) {
  if (x0.rows() != eps.rows() || x0.cols() != eps.cols()) {
    throw Error(ErrorCode::kDimension, "noise and clean motion differ in shape");
  }
  if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha_bar outside [0, 1]");
  return std::sqrt(alpha_bar) * x0 + std::sqrt(1.0 - alpha_bar) * eps;
}

Eigen::MatrixXd forward_diffuse(const Eigen::MatrixXd& x0, int t, const Eigen::MatrixXd& eps,
                                const NoiseSchedule& sched) {
  return forward_diffuse(x0, sched.alpha_bar(t), eps);
}

}  // namespace temu::gen
