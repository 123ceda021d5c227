#include "temudance/synth/music.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"

namespace temu::synth {

namespace {

Eigen::VectorXd signature(std::string_view key, int n) {
  Rng rng(fnv1a64(key));
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v / v.norm() * 1.5;
}

}  // namespace

MusicClip synthesize_music(const MusicStyle& style, int frames, int fps, std::uint64_t seed) {
  if (frames < 1 || fps < 1) throw Error(ErrorCode::kInvalidArgument, "music clip needs positive frames and fps");
  if (!(style.tempo_bpm > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tempo must be positive");
  Rng rng(derive_seed(seed, {fnv1a64(style.genre), fnv1a64(style.paired_label)}));
  const Eigen::VectorXd genre_sig = signature("genre:" + style.genre, 8);
  const Eigen::VectorXd label_sig = signature("label:" + style.paired_label, 8);
  const double beat_period = 60.0 / style.tempo_bpm;
  const double phase0 = rng.uniform(0.0, beat_period);

  MusicClip clip;
  clip.fps = fps;
  clip.genre = style.genre;
  clip.features.resize(frames, kMusicDim);
  for (int f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / fps;
    const double phase = 2.0 * std::numbers::pi * (t - phase0) / beat_period;
    auto row = clip.features.row(f);
    row.segment(0, 8) = genre_sig.transpose();
    row.segment(8, 8) = label_sig.transpose();
    for (int h = 0; h < 4; ++h) {
      row[16 + 2 * h] = std::cos((h + 1) * phase) / (h + 1);
      row[17 + 2 * h] = std::sin((h + 1) * phase) / (h + 1);
    }
    row[24] = style.energy;
    for (int c = 25; c < kMusicDim; ++c) row[c] = 0.3 * rng.normal();
    for (int c = 0; c < 16; ++c) row[c] += 0.1 * rng.normal();
  }
  const double duration = static_cast<double>(frames) / fps;
  for (double b = phase0; b < duration; b += beat_period) clip.beats.push_back(b);
  return clip;
}

Json to_json(const MusicClip& clip) {
  Json j;
  j["frames"] = clip.features.rows();
  j["dim"] = clip.features.cols();
  j["fps"] = clip.fps;
  j["features"] = matrix_to_flat_json(clip.features);
  j["beats"] = clip.beats;
  j["genre"] = clip.genre;
  return j;
}

MusicClip music_from_json(const Json& j) {
  try {
    MusicClip clip;
    clip.fps = j.at("fps").get<int>();
    clip.features = matrix_from_flat_json(j.at("features"), j.at("frames").get<Eigen::Index>(), j.at("dim").get<Eigen::Index>());
    clip.beats = j.at("beats").get<std::vector<double>>();
    clip.genre = j.at("genre").get<std::string>();
    if (!clip.features.allFinite()) throw Error(ErrorCode::kSchema, "music features must be finite");
    return clip;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed music clip: ") + e.what());
  }
}

void write_music_pool(const std::filesystem::path& dir, const std::vector<MusicClip>& pool) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "music_%04zu.json", i);
    write_json_file(dir / name, to_json(pool[i]));
  }
}

std::vector<MusicClip> read_music_pool(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIo, "music pool '" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<MusicClip> pool;
  for (const auto& f : files) pool.push_back(music_from_json(read_json_file(f)));
  if (pool.empty()) throw Error(ErrorCode::kEmptyInput, "music pool '" + dir.string() + "' holds no clips");
  return pool;
}

}  // namespace temu::synth
