#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "temudance/common/json_io.hpp"
#include "temudance/motion/types.hpp"

namespace temu::kps {

struct PredicateThresholds {
  double walk_disp_floor = 0.25;
  double walk_disp_sigma_mult = 1.0;
  int walk_min_crossings = 2;
  double jump_lift = 0.12;
  double jump_peak_vel = 0.6;
  double turn_deg = 90.0;
  double crouch_floor = 0.08;
  double crouch_rest_mult = 0.15;
  double handsup_both_frac = 0.08;
  double handsup_either_frac = 0.16;
  double kick_lift = 0.30;
  double kick_dominance = 0.08;
  double clap_dist_mult = 0.60;
  double clap_frac = 0.10;
  double wave_amp_mult = 0.40;
  int wave_min_crossings = 3;
  double wave_freq_lo = 0.5;
  double wave_freq_hi = 2.5;
  int baseline_frames = 10;

  // Throws kInvalidArgument unless every threshold is positive and the wave band is ordered.
  void validate() const;
};

Json to_json(const PredicateThresholds& th);
// Missing keys keep their defaults.
PredicateThresholds thresholds_from_json(const Json& j);

struct PredicateResult {
  std::string name;
  bool passed = false;
  std::vector<std::pair<std::string, double>> measured;

  // Throws kInvalidArgument for an absent key.
  double get(std::string_view key) const;
};

Json to_json(const PredicateResult& r);

inline constexpr std::array<std::string_view, 8> kPredicateNames = {"walk_move", "jump", "turn", "crouch",
                                                                    "hands_up",  "kick", "clap", "wave"};

// Throws kUnknownPredicate for names outside kPredicateNames and
// kSequenceTooShort when the sequence has fewer than baseline_frames frames.
PredicateResult eval_predicate(std::string_view name, const motion::JointSequence& seq,
                               const PredicateThresholds& th = {});

// Frequency (Hz) of the largest-magnitude DFT bin excluding DC; ties go to
// the lower bin. Needs at least 2 samples.
double dominant_frequency(std::span<const double> signal, double fps);
std::vector<double> hann_window(std::span<const double> signal);
// Sign changes between consecutive non-zero samples.
int zero_crossings(std::span<const double> signal);

}  // namespace temu::kps
