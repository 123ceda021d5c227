#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "temudance/align/space.hpp"
#include "temudance/align/tokens.hpp"
#include "temudance/common/json_io.hpp"
#include "temudance/motion/types.hpp"
#include "temudance/synth/datasets.hpp"
#include "temudance/synth/music.hpp"

namespace temu::bank {

// MD indexes music-dance pairs (payload: music), TM indexes text-motion pairs
// (payload: description).
enum class BankKind { kMD, kTM };

std::string kind_name(BankKind k);
BankKind kind_from_name(const std::string& s);

inline constexpr double kDefaultThreshold = 0.8;

struct Payload {
  std::optional<synth::MusicClip> music;
  std::string text;
  std::string genre;
};

struct BankEntry {
  Eigen::VectorXd embedding;
  Payload payload;
  std::uint64_t source_id = 0;
};

// Immutable embedding index with exhaustive cosine search.
class Bank {
 public:
  // Embeddings must be unit norm within 1e-6 and share one dimension.
  Bank(BankKind kind, double threshold, std::vector<BankEntry> entries);

  BankKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double threshold() const { return threshold_; }
  const std::vector<BankEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Same entries, different threshold.
  Bank with_threshold(double threshold) const;

  Json to_json() const;
  static Bank from_json(const Json& j);
  void save(const std::filesystem::path& path) const;
  static Bank load(const std::filesystem::path& path);

 private:
  BankKind kind_;
  int dim_ = 0;
  double threshold_;
  std::vector<BankEntry> entries_;
};

// One entry per item, embedded by the frozen online motion encoder.
Bank build_bank(const std::vector<synth::DanceItem>& corpus, const align::AlignmentSpace& space,
                double threshold = kDefaultThreshold, int stride = align::kDefaultStride);
Bank build_bank(const std::vector<synth::TextMotionItem>& corpus, const align::AlignmentSpace& space,
                double threshold = kDefaultThreshold, int stride = align::kDefaultStride);

struct Match {
  const BankEntry* entry = nullptr;
  double similarity = 0.0;
};

// Highest cosine similarity over all entries, ties to the lowest source_id.
// Throws kEmptyInput on an empty bank and kDimension on a width mismatch.
Match top1(const Bank& bank, const Eigen::VectorXd& query);
// top1 if its similarity reaches the bank threshold, otherwise nothing.
std::optional<Match> retrieve(const Bank& bank, const Eigen::VectorXd& query);

enum class Provenance { kNativePair, kRetrieved, kNullFilled };
std::string provenance_name(Provenance p);

struct PseudoTriplet {
  explicit PseudoTriplet(motion::JointSequence m) : motion(std::move(m)) {}

  motion::JointSequence motion;
  std::optional<synth::MusicClip> music;
  std::optional<std::string> text;
  Provenance music_provenance = Provenance::kNativePair;
  Provenance text_provenance = Provenance::kNativePair;
  std::optional<double> similarity;  // set when a condition was retrieved
  std::string label;
  std::uint64_t retrieved_from = 0;  // source_id of the retrieved entry
};

// "<description>, <genre>"
std::string composite_instruction(const std::string& description, const std::string& genre);

// Text-motion items gain music retrieved from an MD bank; music-dance items
// gain a composite instruction built from a TM bank description and the item's
// genre. `queries` holds one motion embedding per item. Sub-threshold
// retrievals become null conditions. Throws kBankMismatch for the wrong bank
// kind or embedding width.
std::vector<PseudoTriplet> make_pseudo_triplets(const std::vector<synth::TextMotionItem>& batch,
                                                const std::vector<Eigen::VectorXd>& queries, const Bank& md_bank);
std::vector<PseudoTriplet> make_pseudo_triplets(const std::vector<synth::DanceItem>& batch,
                                                const std::vector<Eigen::VectorXd>& queries, const Bank& tm_bank);

// Motion embeddings of a corpus through the frozen online encoder.
std::vector<Eigen::VectorXd> motion_queries(const std::vector<synth::TextMotionItem>& batch,
                                            const align::AlignmentSpace& space, int stride = align::kDefaultStride);
std::vector<Eigen::VectorXd> motion_queries(const std::vector<synth::DanceItem>& batch,
                                            const align::AlignmentSpace& space, int stride = align::kDefaultStride);

// Linear interpolation between order statistics at position p * (n - 1).
double percentile(const std::vector<double>& sorted, double p);

struct SimilaritySummary {
  double min = 0.0, p10 = 0.0, median = 0.0, p90 = 0.0, max = 0.0, mean = 0.0;
};

struct DirectionStats {
  std::string direction;  // e.g. "TM->MD": queries from TM items searched in an MD bank
  std::size_t queries = 0;
  double acceptance_rate = 0.0;
  double null_rate = 0.0;
  SimilaritySummary similarity;  // raw top-1, before thresholding
};

struct RetrievalStats {
  double threshold = kDefaultThreshold;
  DirectionStats a;
  DirectionStats b;
};

// Direction a searches bank_a with queries_a, direction b bank_b with queries_b.
RetrievalStats retrieval_stats(const Bank& bank_a, const Bank& bank_b, const std::vector<Eigen::VectorXd>& queries_a,
                               const std::vector<Eigen::VectorXd>& queries_b, double threshold);

Json to_json(const RetrievalStats& s);
// Throws kSchema on missing or mistyped fields.
RetrievalStats retrieval_stats_from_json(const Json& j);
// Similarity table (Min/P10/Median/P90/Max/Mean) and acceptance table
// (Acceptance/Null), one row per direction.
std::string retrieval_table(const RetrievalStats& s);

}  // namespace temu::bank
