#include "temudance/kps/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "temudance/common/error.hpp"
#include "temudance/motion/kinematics.hpp"

namespace temu::kps {

using motion::BodyAxes;
using motion::Joint;
using motion::JointSequence;

void PredicateThresholds::validate() const {
  const double values[] = {walk_disp_floor, walk_disp_sigma_mult, double(walk_min_crossings), jump_lift,
                           jump_peak_vel,   turn_deg,             crouch_floor,              crouch_rest_mult,
                           handsup_both_frac, handsup_either_frac, kick_lift,               kick_dominance,
                           clap_dist_mult,  clap_frac,            wave_amp_mult,             double(wave_min_crossings),
                           wave_freq_lo,    wave_freq_hi,         double(baseline_frames)};
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "predicate thresholds must be positive");
  }
  if (!(wave_freq_lo < wave_freq_hi)) throw Error(ErrorCode::kInvalidArgument, "wave frequency band is empty");
}

#define TEMU_THRESHOLD_FIELDS(X)                                                                                     \
  X(walk_disp_floor) X(walk_disp_sigma_mult) X(walk_min_crossings) X(jump_lift) X(jump_peak_vel) X(turn_deg)        \
  X(crouch_floor) X(crouch_rest_mult) X(handsup_both_frac) X(handsup_either_frac) X(kick_lift) X(kick_dominance)    \
  X(clap_dist_mult) X(clap_frac) X(wave_amp_mult) X(wave_min_crossings) X(wave_freq_lo) X(wave_freq_hi)             \
  X(baseline_frames)

Json to_json(const PredicateThresholds& th) {
  Json j;
#define X(field) j[#field] = th.field;
  TEMU_THRESHOLD_FIELDS(X)
#undef X
  return j;
}

PredicateThresholds thresholds_from_json(const Json& j) {
  PredicateThresholds th;
  try {
#define X(field) \
  if (j.contains(#field)) j.at(#field).get_to(th.field);
    TEMU_THRESHOLD_FIELDS(X)
#undef X
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed thresholds: ") + e.what());
  }
  th.validate();
  return th;
}

double PredicateResult::get(std::string_view key) const {
  for (const auto& [k, v] : measured) {
    if (k == key) return v;
  }
  throw Error(ErrorCode::kInvalidArgument, "predicate result has no measurement '" + std::string(key) + "'");
}

Json to_json(const PredicateResult& r) {
  Json measured = Json::object();
  for (const auto& [k, v] : r.measured) measured[k] = v;
  return Json{{"name", r.name}, {"passed", r.passed}, {"measured", measured}};
}

std::vector<double> hann_window(std::span<const double> signal) {
  const std::size_t n = signal.size();
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = signal[0];
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    out[i] = w * signal[i];
  }
  return out;
}

double dominant_frequency(std::span<const double> signal, double fps) {
  const std::size_t n = signal.size();
  if (n < 2) throw Error(ErrorCode::kSequenceTooShort, "dominant frequency needs at least 2 samples");
  double best = -1.0;
  std::size_t best_k = 1;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * i) % n) / static_cast<double>(n);
      acc += signal[i] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    const double mag = std::abs(acc);
    if (mag > best) {
      best = mag;
      best_k = k;
    }
  }
  return static_cast<double>(best_k) * fps / static_cast<double>(n);
}

int zero_crossings(std::span<const double> signal) {
  int count = 0;
  double prev = 0.0;
  for (double v : signal) {
    if (v == 0.0) continue;
    if (prev != 0.0 && (v > 0.0) != (prev > 0.0)) ++count;
    prev = v;
  }
  return count;
}

namespace {

struct Context {
  const JointSequence& seq;
  const PredicateThresholds& th;
  BodyAxes axes;
  double sigma_s;

  double height(int f, Joint j) const { return motion::height_of(seq, axes, f, j); }
  Eigen::Vector2d ground(int f, Joint j) const { return motion::ground_of(seq, axes, f, j); }
  double baseline_height(Joint j) const {
    double s = 0.0;
    for (int f = 0; f < th.baseline_frames; ++f) s += height(f, j);
    return s / th.baseline_frames;
  }
};

PredicateResult walk_move(const Context& c) {
  const int last = c.seq.frames() - 1;
  const Eigen::Vector2d d = c.ground(last, motion::kPelvis) - c.ground(0, motion::kPelvis);
  const double disp = d.norm();
  const double disp_threshold = std::max(c.th.walk_disp_floor, c.th.walk_disp_sigma_mult * c.sigma_s);
  int crossings = 0;
  if (disp > 0.0) {
    const Eigen::Vector2d u = d / disp;
    std::vector<double> along(c.seq.frames());
    for (int f = 0; f <= last; ++f) along[f] = (c.ground(f, motion::kLeftAnkle) - c.ground(f, motion::kRightAnkle)).dot(u);
    crossings = zero_crossings(along);
  }
  return {"walk_move",
          disp > disp_threshold && crossings >= c.th.walk_min_crossings,
          {{"displacement", disp},
           {"displacement_threshold", disp_threshold},
           {"sigma_s", c.sigma_s},
           {"crossings", crossings},
           {"min_crossings", c.th.walk_min_crossings}}};
}

PredicateResult jump(const Context& c) {
  const double base = c.baseline_height(motion::kPelvis);
  double peak = -INFINITY;
  double peak_vel = -INFINITY;
  for (int f = 0; f < c.seq.frames(); ++f) {
    peak = std::max(peak, c.height(f, motion::kPelvis));
    if (f + 1 < c.seq.frames()) {
      peak_vel = std::max(peak_vel, (c.height(f + 1, motion::kPelvis) - c.height(f, motion::kPelvis)) * c.seq.fps());
    }
  }
  if (c.seq.frames() < 2) peak_vel = 0.0;
  const double lift = peak - base;
  return {"jump",
          lift > c.th.jump_lift && peak_vel > c.th.jump_peak_vel,
          {{"lift", lift}, {"lift_threshold", c.th.jump_lift}, {"peak_velocity", peak_vel},
           {"peak_velocity_threshold", c.th.jump_peak_vel}}};
}

PredicateResult turn(const Context& c) {
  const double yaw = motion::cumulative_yaw(c.seq, c.axes);
  return {"turn", yaw > c.th.turn_deg, {{"cumulative_yaw_deg", yaw}, {"turn_threshold_deg", c.th.turn_deg}}};
}

PredicateResult crouch(const Context& c) {
  const double rest = c.baseline_height(motion::kPelvis);
  double lowest = INFINITY;
  for (int f = 0; f < c.seq.frames(); ++f) lowest = std::min(lowest, c.height(f, motion::kPelvis));
  const double depth = rest - lowest;
  const double threshold = std::max(c.th.crouch_floor, c.th.crouch_rest_mult * std::abs(rest));
  return {"crouch", depth > threshold, {{"depth", depth}, {"h_rest", rest}, {"depth_threshold", threshold}}};
}

PredicateResult hands_up(const Context& c) {
  int left = 0;
  int right = 0;
  for (int f = 0; f < c.seq.frames(); ++f) {
    if (c.height(f, motion::kLeftWrist) > c.height(f, motion::kLeftShoulder)) ++left;
    if (c.height(f, motion::kRightWrist) > c.height(f, motion::kRightShoulder)) ++right;
  }
  const double fl = static_cast<double>(left) / c.seq.frames();
  const double fr = static_cast<double>(right) / c.seq.frames();
  const bool both = fl >= c.th.handsup_both_frac && fr >= c.th.handsup_both_frac;
  const bool either = std::max(fl, fr) >= c.th.handsup_either_frac;
  return {"hands_up",
          both || either,
          {{"left_fraction", fl}, {"right_fraction", fr}, {"both_threshold", c.th.handsup_both_frac},
           {"either_threshold", c.th.handsup_either_frac}}};
}

PredicateResult kick(const Context& c) {
  const double base_l = c.baseline_height(motion::kLeftAnkle);
  const double base_r = c.baseline_height(motion::kRightAnkle);
  double lift_l = -INFINITY;
  double lift_r = -INFINITY;
  for (int f = 0; f < c.seq.frames(); ++f) {
    lift_l = std::max(lift_l, c.height(f, motion::kLeftAnkle) - base_l);
    lift_r = std::max(lift_r, c.height(f, motion::kRightAnkle) - base_r);
  }
  const double lift = std::max(lift_l, lift_r);
  const double gap = lift - std::min(lift_l, lift_r);
  return {"kick",
          lift > c.th.kick_lift && gap > c.th.kick_dominance,
          {{"lift", lift}, {"left_lift", lift_l}, {"right_lift", lift_r}, {"dominance_gap", gap},
           {"lift_threshold", c.th.kick_lift}, {"dominance_threshold", c.th.kick_dominance}}};
}

PredicateResult clap(const Context& c) {
  const double limit = c.th.clap_dist_mult * c.sigma_s;
  int close = 0;
  for (int f = 0; f < c.seq.frames(); ++f) {
    if ((c.seq.at(f, motion::kLeftWrist) - c.seq.at(f, motion::kRightWrist)).norm() < limit) ++close;
  }
  const double frac = static_cast<double>(close) / c.seq.frames();
  return {"clap", frac >= c.th.clap_frac,
          {{"close_fraction", frac}, {"distance_threshold", limit}, {"fraction_threshold", c.th.clap_frac}}};
}

struct WaveMeasure {
  double amplitude = 0.0;
  int crossings = 0;
  double frequency = 0.0;
  int axis = 0;
};

WaveMeasure wave_of(const Context& c, Joint wrist, Joint shoulder) {
  const int n = c.seq.frames();
  Eigen::MatrixXd rel(n, 3);
  for (int f = 0; f < n; ++f) rel.row(f) = (c.seq.at(f, wrist) - c.seq.at(f, shoulder)).transpose();
  WaveMeasure m;
  double best_range = -1.0;
  for (int a = 0; a < 3; ++a) {
    const double range = rel.col(a).maxCoeff() - rel.col(a).minCoeff();
    if (range > best_range) {
      best_range = range;
      m.axis = a;
    }
  }
  std::vector<double> x(n);
  const double mean = rel.col(m.axis).mean();
  for (int f = 0; f < n; ++f) x[f] = rel(f, m.axis) - mean;
  m.amplitude = 0.5 * best_range;
  const std::vector<double> windowed = hann_window(x);
  m.crossings = zero_crossings(windowed);
  m.frequency = dominant_frequency(windowed, c.seq.fps());
  return m;
}

PredicateResult wave(const Context& c) {
  const double amp_threshold = c.th.wave_amp_mult * c.sigma_s;
  auto passes = [&](const WaveMeasure& m) {
    return m.amplitude > amp_threshold && m.crossings >= c.th.wave_min_crossings && m.frequency >= c.th.wave_freq_lo &&
           m.frequency <= c.th.wave_freq_hi;
  };
  const WaveMeasure left = wave_of(c, motion::kLeftWrist, motion::kLeftShoulder);
  const WaveMeasure right = wave_of(c, motion::kRightWrist, motion::kRightShoulder);
  // Report the passing wrist, else the one with the larger amplitude; left wins ties.
  const bool pick_right = passes(right) && !passes(left) ? true
                          : passes(left)                 ? false
                                                         : right.amplitude > left.amplitude;
  const WaveMeasure& m = pick_right ? right : left;
  return {"wave",
          passes(left) || passes(right),
          {{"wrist", pick_right ? 1.0 : 0.0},
           {"axis", m.axis},
           {"amplitude", m.amplitude},
           {"amplitude_threshold", amp_threshold},
           {"crossings", m.crossings},
           {"min_crossings", c.th.wave_min_crossings},
           {"dominant_freq_hz", m.frequency},
           {"freq_lo_hz", c.th.wave_freq_lo},
           {"freq_hi_hz", c.th.wave_freq_hi}}};
}

}  // namespace

PredicateResult eval_predicate(std::string_view name, const JointSequence& seq, const PredicateThresholds& th) {
  using Fn = PredicateResult (*)(const Context&);
  static constexpr std::pair<std::string_view, Fn> kTable[] = {
      {"walk_move", walk_move}, {"jump", jump}, {"turn", turn}, {"crouch", crouch},
      {"hands_up", hands_up},   {"kick", kick}, {"clap", clap}, {"wave", wave}};
  Fn fn = nullptr;
  for (const auto& [n, f] : kTable) {
    if (n == name) fn = f;
  }
  if (fn == nullptr) throw Error(ErrorCode::kUnknownPredicate, "no predicate named '" + std::string(name) + "'");
  th.validate();
  if (seq.frames() < th.baseline_frames) {
    throw Error(ErrorCode::kSequenceTooShort, "predicate needs at least " + std::to_string(th.baseline_frames) +
                                                   " frames, got " + std::to_string(seq.frames()));
  }
  const BodyAxes axes = motion::detect_axes(seq);
  const Context ctx{seq, th, axes, motion::shoulder_width(seq, axes)};
  return fn(ctx);
}

}  // namespace temu::kps
