#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "temudance/motion/types.hpp"

namespace temu::kps {

inline constexpr double kDefaultBeatSigma = 0.1;

// Mean over music beats of exp(-d^2 / (2 sigma^2)), d = distance to the nearest
// kinematic beat. No kinematic beats scores 0. Throws on empty music beats or sigma <= 0.
double beat_alignment_score(std::span<const double> kinematic_beats, std::span<const double> music_beats,
                            double sigma = kDefaultBeatSigma);

// Per-frame mean joint speed (units/s); entry 0 repeats entry 1.
std::vector<double> joint_speed(const motion::JointSequence& seq);

// Times (s) of local minima of joint speed that lie below the median speed.
std::vector<double> kinematic_beats(const motion::JointSequence& seq);

// Mean pairwise Euclidean distance over all unordered pairs.
double diversity(std::span<const Eigen::VectorXd> features);

}  // namespace temu::kps
