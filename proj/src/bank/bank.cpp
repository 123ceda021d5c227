#include "temudance/bank/bank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "temudance/align/tokens.hpp"
#include "temudance/common/error.hpp"

namespace temu::bank {

std::string kind_name(BankKind k) { return k == BankKind::kMD ? "MD" : "TM"; }

BankKind kind_from_name(const std::string& s) {
  if (s == "MD") return BankKind::kMD;
  if (s == "TM") return BankKind::kTM;
  throw Error(ErrorCode::kSchema, "unknown bank kind '" + s + "'");
}

namespace {

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "similarity threshold must lie in (0, 1]");
}

}  // namespace

Bank::Bank(BankKind kind, double threshold, std::vector<BankEntry> entries)
    : kind_(kind), threshold_(threshold), entries_(std::move(entries)) {
  check_threshold(threshold);
  if (entries_.empty()) throw Error(ErrorCode::kEmptyInput, "a bank needs at least one entry");
  dim_ = static_cast<int>(entries_.front().embedding.size());
  for (const BankEntry& e : entries_) {
    if (e.embedding.size() != dim_) throw Error(ErrorCode::kDimension, "bank embeddings differ in width");
    if (std::abs(e.embedding.norm() - 1.0) > 1e-6) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bank embedding " + std::to_string(e.source_id) + " is not unit norm");
    }
  }
}

Bank Bank::with_threshold(double threshold) const { return Bank(kind_, threshold, entries_); }

Json Bank::to_json() const {
  Json entries = Json::array();
  for (const BankEntry& e : entries_) {
    Json payload = Json::object();
    if (e.payload.music) payload["music"] = synth::to_json(*e.payload.music);
    payload["text"] = e.payload.text;
    payload["genre"] = e.payload.genre;
    entries.push_back({{"embedding", std::vector<double>(e.embedding.data(), e.embedding.data() + e.embedding.size())},
                       {"payload", payload},
                       {"source_id", e.source_id}});
  }
  return Json{{"kind", kind_name(kind_)}, {"dim", dim_}, {"threshold", threshold_}, {"entries", entries}};
}

Bank Bank::from_json(const Json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    std::vector<BankEntry> entries;
    for (const Json& je : j.at("entries")) {
      BankEntry e;
      const auto v = je.at("embedding").get<std::vector<double>>();
      if (static_cast<int>(v.size()) != dim) throw Error(ErrorCode::kSchema, "bank entry width differs from dim");
      e.embedding = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      const Json& p = je.at("payload");
      if (p.contains("music")) e.payload.music = synth::music_from_json(p.at("music"));
      e.payload.text = p.value("text", "");
      e.payload.genre = p.value("genre", "");
      e.source_id = je.at("source_id").get<std::uint64_t>();
      entries.push_back(std::move(e));
    }
    return Bank(kind_from_name(j.at("kind").get<std::string>()), j.at("threshold").get<double>(), std::move(entries));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed bank: ") + e.what());
  }
}

void Bank::save(const std::filesystem::path& path) const { write_json_file(path, to_json()); }

Bank Bank::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

Bank build_bank(const std::vector<synth::DanceItem>& corpus, const align::AlignmentSpace& space, double threshold,
                int stride) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "cannot build a bank from an empty corpus");
  const auto emb = motion_queries(corpus, space, stride);
  std::vector<BankEntry> entries;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    entries.push_back({emb[i], Payload{corpus[i].music, corpus[i].label, corpus[i].genre}, i});
  }
  return Bank(BankKind::kMD, threshold, std::move(entries));
}

Bank build_bank(const std::vector<synth::TextMotionItem>& corpus, const align::AlignmentSpace& space,
                double threshold, int stride) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "cannot build a bank from an empty corpus");
  const auto emb = motion_queries(corpus, space, stride);
  std::vector<BankEntry> entries;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    entries.push_back({emb[i], Payload{std::nullopt, corpus[i].text, ""}, i});
  }
  return Bank(BankKind::kTM, threshold, std::move(entries));
}

Match top1(const Bank& bank, const Eigen::VectorXd& query) {
  if (bank.size() == 0) throw Error(ErrorCode::kEmptyInput, "retrieval from an empty bank");
  if (query.size() != bank.dim()) throw Error(ErrorCode::kDimension, "query width differs from the bank");
  Match best;
  for (const BankEntry& e : bank.entries()) {
    const double s = e.embedding.dot(query);
    if (best.entry == nullptr || s > best.similarity ||
        (s == best.similarity && e.source_id < best.entry->source_id)) {
      best = {&e, s};
    }
  }
  return best;
}

std::optional<Match> retrieve(const Bank& bank, const Eigen::VectorXd& query) {
  const Match m = top1(bank, query);
  if (m.similarity < bank.threshold()) return std::nullopt;
  return m;
}

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kNativePair: return "native_pair";
    case Provenance::kRetrieved: return "retrieved";
    case Provenance::kNullFilled: return "null_filled";
  }
  return "unknown";
}

std::string composite_instruction(const std::string& description, const std::string& genre) {
  return description + ", " + genre;
}

namespace {

void check_bank(const Bank& bank, BankKind want, std::size_t items, const std::vector<Eigen::VectorXd>& queries) {
  if (bank.kind() != want) {
    throw Error(ErrorCode::kBankMismatch, "pseudo-triplets need a " + kind_name(want) + " bank, got " +
                                              kind_name(bank.kind()));
  }
  if (queries.size() != items) throw Error(ErrorCode::kDimension, "one query embedding per item is required");
  for (const auto& q : queries) {
    if (q.size() != bank.dim()) throw Error(ErrorCode::kBankMismatch, "query width differs from the bank");
  }
}

}  // namespace

std::vector<PseudoTriplet> make_pseudo_triplets(const std::vector<synth::TextMotionItem>& batch,
                                                const std::vector<Eigen::VectorXd>& queries, const Bank& md_bank) {
  check_bank(md_bank, BankKind::kMD, batch.size(), queries);
  std::vector<PseudoTriplet> out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    PseudoTriplet t{batch[i].motion};
    t.text = batch[i].text;
    t.label = batch[i].label;
    t.text_provenance = Provenance::kNativePair;
    if (auto m = retrieve(md_bank, queries[i])) {
      t.music = m->entry->payload.music;
      t.music_provenance = Provenance::kRetrieved;
      t.similarity = m->similarity;
      t.retrieved_from = m->entry->source_id;
    } else {
      t.music_provenance = Provenance::kNullFilled;
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<PseudoTriplet> make_pseudo_triplets(const std::vector<synth::DanceItem>& batch,
                                                const std::vector<Eigen::VectorXd>& queries, const Bank& tm_bank) {
  check_bank(tm_bank, BankKind::kTM, batch.size(), queries);
  std::vector<PseudoTriplet> out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    PseudoTriplet t{batch[i].dance};
    t.music = batch[i].music;
    t.label = batch[i].label;
    t.music_provenance = Provenance::kNativePair;
    if (auto m = retrieve(tm_bank, queries[i])) {
      t.text = composite_instruction(m->entry->payload.text, batch[i].genre);
      t.text_provenance = Provenance::kRetrieved;
      t.similarity = m->similarity;
      t.retrieved_from = m->entry->source_id;
    } else {
      t.text_provenance = Provenance::kNullFilled;
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Eigen::VectorXd> motion_queries(const std::vector<synth::TextMotionItem>& batch,
                                            const align::AlignmentSpace& space, int stride) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& it : batch) out.push_back(space.embed(align::Modality::kMotion, align::motion_tokens(it.motion, stride)));
  return out;
}

std::vector<Eigen::VectorXd> motion_queries(const std::vector<synth::DanceItem>& batch,
                                            const align::AlignmentSpace& space, int stride) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& it : batch) out.push_back(space.embed(align::Modality::kMotion, align::motion_tokens(it.dance, stride)));
  return out;
}

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::kEmptyInput, "percentile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "percentile rank must lie in [0, 1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

DirectionStats direction_stats(const Bank& bank, const std::vector<Eigen::VectorXd>& queries, double threshold,
                               std::string name) {
  if (queries.empty()) throw Error(ErrorCode::kEmptyInput, "retrieval statistics need queries");
  std::vector<double> sims;
  std::size_t accepted = 0;
  for (const auto& q : queries) {
    const double s = top1(bank, q).similarity;
    sims.push_back(s);
    if (s >= threshold) ++accepted;
  }
  std::sort(sims.begin(), sims.end());
  DirectionStats d;
  d.direction = std::move(name);
  d.queries = queries.size();
  d.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(queries.size());
  d.null_rate = 1.0 - d.acceptance_rate;
  d.similarity = {sims.front(),
                  percentile(sims, 0.1),
                  percentile(sims, 0.5),
                  percentile(sims, 0.9),
                  sims.back(),
                  std::accumulate(sims.begin(), sims.end(), 0.0) / static_cast<double>(sims.size())};
  return d;
}

std::string direction_name(const Bank& bank) {
  // Queries come from the other domain.
  return bank.kind() == BankKind::kMD ? "TM->MD" : "MD->TM";
}

}  // namespace

RetrievalStats retrieval_stats(const Bank& bank_a, const Bank& bank_b, const std::vector<Eigen::VectorXd>& queries_a,
                               const std::vector<Eigen::VectorXd>& queries_b, double threshold) {
  check_threshold(threshold);
  RetrievalStats s;
  s.threshold = threshold;
  s.a = direction_stats(bank_a, queries_a, threshold, direction_name(bank_a));
  s.b = direction_stats(bank_b, queries_b, threshold, direction_name(bank_b));
  return s;
}

namespace {

Json direction_json(const DirectionStats& d) {
  const SimilaritySummary& s = d.similarity;
  return Json{{"direction", d.direction},
              {"queries", d.queries},
              {"acceptance_rate", d.acceptance_rate},
              {"null_rate", d.null_rate},
              {"similarity",
               {{"min", s.min}, {"p10", s.p10}, {"median", s.median}, {"p90", s.p90}, {"max", s.max}, {"mean", s.mean}}}};
}

DirectionStats direction_from_json(const Json& j) {
  DirectionStats d;
  d.direction = j.at("direction").get<std::string>();
  d.queries = j.at("queries").get<std::size_t>();
  d.acceptance_rate = j.at("acceptance_rate").get<double>();
  d.null_rate = j.at("null_rate").get<double>();
  const Json& s = j.at("similarity");
  d.similarity = {s.at("min").get<double>(),    s.at("p10").get<double>(), s.at("median").get<double>(),
                  s.at("p90").get<double>(),    s.at("max").get<double>(), s.at("mean").get<double>()};
  return d;
}

}  // namespace

RetrievalStats retrieval_stats_from_json(const Json& j) {
  try {
    const Json& dirs = j.at("directions");
    if (!dirs.is_array() || dirs.size() != 2) throw Error(ErrorCode::kSchema, "retrieval stats need two directions");
    RetrievalStats s;
    s.threshold = j.at("threshold").get<double>();
    s.a = direction_from_json(dirs[0]);
    s.b = direction_from_json(dirs[1]);
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed retrieval stats: ") + e.what());
  }
}

Json to_json(const RetrievalStats& s) {
  return Json{{"threshold", s.threshold}, {"directions", Json::array({direction_json(s.a), direction_json(s.b)})}};
}

std::string retrieval_table(const RetrievalStats& s) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %7s %7s %7s %7s %7s %7s\n", "Direction", "Min", "P10", "Median", "P90", "Max",
                "Mean");
  out += buf;
  for (const DirectionStats* d : {&s.a, &s.b}) {
    const SimilaritySummary& m = d->similarity;
    std::snprintf(buf, sizeof buf, "%-10s %7.4f %7.4f %7.4f %7.4f %7.4f %7.4f\n", d->direction.c_str(), m.min, m.p10,
                  m.median, m.p90, m.max, m.mean);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "\n%-10s %11s %8s   (threshold %.2f)\n", "Direction", "Acceptance", "Null",
                s.threshold);
  out += buf;
  for (const DirectionStats* d : {&s.a, &s.b}) {
    std::snprintf(buf, sizeof buf, "%-10s %10.2f%% %7.2f%%\n", d->direction.c_str(), 100.0 * d->acceptance_rate,
                  100.0 * d->null_rate);
    out += buf;
  }
  return out;
}

}  // namespace temu::bank
