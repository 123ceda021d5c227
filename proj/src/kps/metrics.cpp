#include "temudance/kps/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "temudance/common/error.hpp"

namespace temu::kps {

double beat_alignment_score(std::span<const double> kinematic_beats, std::span<const double> music_beats,
                            double sigma) {
  if (music_beats.empty()) throw Error(ErrorCode::kEmptyInput, "beat alignment needs at least one music beat");
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beat alignment sigma must be positive");
  if (kinematic_beats.empty()) return 0.0;
  double total = 0.0;
  for (double tb : music_beats) {
    double nearest = INFINITY;
    for (double tk : kinematic_beats) nearest = std::min(nearest, (tk - tb) * (tk - tb));
    total += std::exp(-nearest / (2.0 * sigma * sigma));
  }
  return total / static_cast<double>(music_beats.size());
}

std::vector<double> joint_speed(const motion::JointSequence& seq) {
  const int n = seq.frames();
  std::vector<double> speed(n, 0.0);
  const auto& p = seq.positions();
  for (int f = 1; f < n; ++f) {
    double s = 0.0;
    for (int j = 0; j < motion::kNumJoints; ++j) {
      s += (p.row(static_cast<Eigen::Index>(f) * motion::kNumJoints + j) -
            p.row(static_cast<Eigen::Index>(f - 1) * motion::kNumJoints + j))
               .norm();
    }
    speed[f] = s / motion::kNumJoints * seq.fps();
  }
  if (n > 1) speed[0] = speed[1];
  return speed;
}

std::vector<double> kinematic_beats(const motion::JointSequence& seq) {
  if (seq.frames() < 3) throw Error(ErrorCode::kSequenceTooShort, "kinematic beats need at least 3 frames");
  const std::vector<double> speed = joint_speed(seq);
  std::vector<double> sorted = speed;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  // Speeds within eps count as equal, so rounding jitter cannot create minima
  // and a flat-bottomed dip (two equal samples around a turning point) still
  // yields one beat, placed at the lower middle of the flat run.
  const double eps = 1e-9 * (1.0 + median);
  std::vector<double> beats;
  std::size_t a = 0;
  while (a < speed.size()) {
    std::size_t b = a;
    while (b + 1 < speed.size() && std::abs(speed[b + 1] - speed[a]) <= eps) ++b;
    const bool lower_left = a > 0 && speed[a] < speed[a - 1] - eps;
    const bool lower_right = b + 1 < speed.size() && speed[b] < speed[b + 1] - eps;
    if (lower_left && lower_right && speed[a] < median - eps) {
      beats.push_back(static_cast<double>((a + b) / 2) / seq.fps());
    }
    a = b + 1;
  }
  return beats;
}

double diversity(std::span<const Eigen::VectorXd> features) {
  if (features.size() < 2) throw Error(ErrorCode::kEmptyInput, "diversity needs at least 2 feature vectors");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t j = i + 1; j < features.size(); ++j) {
      if (features[i].size() != features[j].size()) {
        throw Error(ErrorCode::kDimension, "diversity needs vectors of equal dimension");
      }
      total += (features[i] - features[j]).norm();
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

}  // namespace temu::kps
