#include "temudance/synth/datasets.hpp"

#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"

namespace temu::synth {

namespace {

std::vector<Primitive> primitives_for(const DatasetOptions& o) {
  std::vector<Primitive> out(kActionPrimitives.begin(), kActionPrimitives.end());
  if (o.include_idle) out.push_back(Primitive::kIdle);
  return out;
}

PrimitiveSpec jittered_spec(Primitive p, const DatasetOptions& o, Rng& rng, std::uint64_t seed) {
  PrimitiveSpec spec = calibrated_spec(p, seed, o.duration_s);
  spec.magnitude *= 1.0 + rng.uniform(-o.magnitude_jitter, o.magnitude_jitter);
  return spec;
}

void check(const DatasetOptions& o) {
  if (o.items < 1) throw Error(ErrorCode::kInvalidArgument, "dataset needs at least one item");
  if (!(o.magnitude_jitter >= 0.0 && o.magnitude_jitter < 0.2)) {
    throw Error(ErrorCode::kInvalidArgument, "magnitude jitter must lie in [0, 0.2) to keep predicates satisfied");
  }
}

}  // namespace

std::vector<DanceItem> make_dance_dataset(const DatasetOptions& options, std::uint64_t seed) {
  check(options);
  const auto prims = primitives_for(options);
  const auto& genres = genre_tags();
  const int frames = static_cast<int>(std::lround(options.duration_s * options.fps));
  std::vector<DanceItem> out;
  out.reserve(options.items);
  for (int i = 0; i < options.items; ++i) {
    const std::uint64_t item_seed = derive_seed(seed, {0xda0ULL, static_cast<std::uint64_t>(i)});
    Rng rng(item_seed);
    const Primitive p = prims[i % prims.size()];
    const std::string& genre = genres[(i / prims.size()) % genres.size()];
    const double bpm = genre_tempo_bpm(genre);
    const std::string label(primitive_name(p));
    MusicClip music = synthesize_music({genre, bpm, 1.0, label}, frames, options.fps, item_seed);
    const double first_beat = music.beats.empty() ? 0.0 : music.beats.front();
    motion::JointSequence dance = add_groove(synthesize(jittered_spec(p, options, rng, item_seed), options.fps),
                                             options.groove_amplitude, bpm / 60.0, first_beat);
    out.push_back(DanceItem{std::move(dance), std::move(music), label, genre});
  }
  return out;
}

std::vector<TextMotionItem> make_text_motion_dataset(const DatasetOptions& options, std::uint64_t seed) {
  check(options);
  const auto prims = primitives_for(options);
  std::vector<TextMotionItem> out;
  out.reserve(options.items);
  for (int i = 0; i < options.items; ++i) {
    const std::uint64_t item_seed = derive_seed(seed, {0x7e7ULL, static_cast<std::uint64_t>(i)});
    Rng rng(item_seed);
    const Primitive p = prims[i % prims.size()];
    const std::string label(primitive_name(p));
    out.push_back(TextMotionItem{synthesize(jittered_spec(p, options, rng, item_seed), options.fps), label, label});
  }
  return out;
}

}  // namespace temu::synth
