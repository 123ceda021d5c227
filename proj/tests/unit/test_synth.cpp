#include "doctest.h"

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>

#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"
#include "temudance/motion/kinematics.hpp"
#include "temudance/synth/synth.hpp"

using namespace temu;
using namespace temu::synth;
using motion::JointSequence;

namespace {

double ground_displacement(const JointSequence& s) {
  const Eigen::Vector3d d = s.at(s.frames() - 1, motion::kPelvis) - s.at(0, motion::kPelvis);
  return std::hypot(d.x(), d.z());
}

// Independent oracle: direct O(n^2) DFT magnitude peak, skipping DC.
double peak_frequency(const std::vector<double>& x, double fps) {
  const int n = static_cast<int>(x.size());
  double best = -1.0;
  int best_k = 1;
  for (int k = 1; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * k * i / n);
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_k = k;
    }
  }
  return best_k * fps / n;
}

}  // namespace

TEST_CASE("primitive names round trip") {
  for (Primitive p : kAllPrimitives) CHECK(parse_primitive(primitive_name(p)) == p);
  try {
    parse_primitive("moonwalk");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedPrimitive);
  }
}

TEST_CASE("walk displacement matches magnitude") {
  const JointSequence s = synthesize(calibrated_spec(Primitive::kWalkMove, 1));
  CHECK(s.frames() == 120);
  CHECK(std::abs(ground_displacement(s) - 0.8) < 0.02);

  // Ankle alternation along the movement direction.
  int changes = 0;
  double prev = 0.0;
  for (int f = 0; f < s.frames(); ++f) {
    const double v = s.at(f, motion::kLeftAnkle).z() - s.at(f, motion::kRightAnkle).z();
    if (std::abs(v) < 0.01) continue;
    if (prev != 0.0 && (v > 0) != (prev > 0)) ++changes;
    prev = v;
  }
  CHECK(changes >= 4);
}

TEST_CASE("randomised walks hit their magnitudes") {
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    PrimitiveSpec spec = calibrated_spec(Primitive::kWalkMove, rng.next_u64());
    spec.magnitude = rng.uniform(0.3, 1.5);
    CHECK(std::abs(ground_displacement(synthesize(spec)) - spec.magnitude) < 0.02);
  }
}

TEST_CASE("wave dominant frequency") {
  const JointSequence s = synthesize(calibrated_spec(Primitive::kWave, 4));
  std::vector<double> x;
  for (int f = 0; f < s.frames(); ++f) x.push_back(s.at(f, motion::kLeftWrist).x() - s.at(f, motion::kLeftShoulder).x());
  const double hz = peak_frequency(x, 30.0);
  CHECK(hz >= 1.25);
  CHECK(hz <= 1.75);
}

TEST_CASE("outputs are deterministic, upright and noise-bounded") {
  for (Primitive p : kAllPrimitives) {
    const auto spec = calibrated_spec(p, 1234);
    const JointSequence a = synthesize(spec);
    const JointSequence b = synthesize(spec);
    CHECK(a.positions() == b.positions());
    CHECK(motion::detect_axes(a).height_axis == 1);
    const JointSequence clean = synthesize_clean(spec);
    CHECK((a.positions() - clean.positions()).cwiseAbs().maxCoeff() <= 0.002);
  }
  const JointSequence idle = synthesize_clean(calibrated_spec(Primitive::kIdle, 0));
  CHECK((idle.positions().topRows(22) - idle.positions().bottomRows(22)).isZero(0.0));
}

TEST_CASE("spec validation") {
  PrimitiveSpec s = calibrated_spec(Primitive::kJump, 0, 0.5);
  CHECK_THROWS_AS(synthesize(s), Error);
  s.duration_s = -1.0;
  CHECK_THROWS_AS(synthesize(s), Error);
  // One second leaves no room between the rest lead-in and lead-out.
  CHECK_THROWS_AS(synthesize(calibrated_spec(Primitive::kWalkMove, 0, 1.0)), Error);
  CHECK_NOTHROW(synthesize(calibrated_spec(Primitive::kWalkMove, 0, 1.5)));
  s = calibrated_spec(Primitive::kJump, 0);
  s.magnitude = -0.1;
  CHECK_THROWS_AS(synthesize(s), Error);
}

TEST_CASE("corpus generation") {
  std::vector<PrimitiveSpec> specs;
  for (Primitive p : kActionPrimitives) specs.push_back(calibrated_spec(p, 77));
  const auto corpus = synthesize_corpus(specs);
  REQUIRE(corpus.size() == 8);
  CHECK(corpus[0].label == "walk_move");
  CHECK(corpus[1].genre == genre_tags()[1]);
  const auto again = synthesize_corpus(specs);
  for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(corpus[i].sequence.positions() == again[i].sequence.positions());
  CHECK_THROWS_AS(synthesize_corpus({}), Error);

  const auto dir = std::filesystem::temp_directory_path() / "temu_synth_corpus_test";
  std::filesystem::remove_all(dir);
  write_corpus(dir, corpus);
  const auto back = read_corpus(dir);
  REQUIRE(back.size() == corpus.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].label == corpus[i].label);
    CHECK(back[i].genre == corpus[i].genre);
    CHECK(back[i].sequence.positions() == corpus[i].sequence.positions());
  }
  std::filesystem::remove_all(dir);
}
