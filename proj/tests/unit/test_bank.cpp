#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "temudance/bank/bank.hpp"
#include "temudance/common/error.hpp"
#include "temudance/common/rng.hpp"

using namespace temu;
using namespace temu::bank;

namespace {

// Unit vector in the plane whose dot product with e1 is exactly c.
Eigen::VectorXd at_cosine(double c, double side = 1.0, int dim = 2) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v[0] = c;
  v[1] = side * std::sqrt(1.0 - c * c);
  return v;
}

Eigen::VectorXd e1(int dim = 2) { return Eigen::VectorXd::Unit(dim, 0); }

Eigen::VectorXd random_unit(Rng& rng, int d) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v.normalized();
}

synth::MusicClip tiny_music(const std::string& genre) {
  synth::MusicClip m;
  m.features = Eigen::MatrixXd::Constant(3, synth::kMusicDim, 0.5);
  m.genre = genre;
  m.beats = {0.1};
  return m;
}

motion::JointSequence tiny_seq() { return motion::JointSequence(motion::JointSequence::Positions::Zero(2 * motion::kNumJoints, 3)); }

std::vector<synth::TextMotionItem> text_items(std::size_t n) {
  return std::vector<synth::TextMotionItem>(n, synth::TextMotionItem{tiny_seq(), "", ""});
}

std::vector<synth::DanceItem> dance_items(std::size_t n) {
  return std::vector<synth::DanceItem>(n, synth::DanceItem{tiny_seq(), tiny_music(""), "", ""});
}

Bank text_bank(const std::vector<Eigen::VectorXd>& emb, const std::vector<std::string>& texts, double tau = 0.8) {
  std::vector<BankEntry> entries;
  for (std::size_t i = 0; i < emb.size(); ++i) entries.push_back({emb[i], Payload{std::nullopt, texts[i], ""}, i});
  return Bank(BankKind::kTM, tau, entries);
}

Bank music_bank(const std::vector<Eigen::VectorXd>& emb, double tau = 0.8) {
  std::vector<BankEntry> entries;
  for (std::size_t i = 0; i < emb.size(); ++i) {
    entries.push_back({emb[i], Payload{tiny_music("g" + std::to_string(i)), "", "g" + std::to_string(i)}, i});
  }
  return Bank(BankKind::kMD, tau, entries);
}

// Oracle: brute-force argmax with the lowest-id tie rule, written independently.
std::size_t brute_force(const Bank& b, const Eigen::VectorXd& q) {
  std::vector<std::size_t> idx(b.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    const double sx = b.entries()[x].embedding.dot(q), sy = b.entries()[y].embedding.dot(q);
    if (sx != sy) return sx > sy;
    return b.entries()[x].source_id < b.entries()[y].source_id;
  });
  return idx.front();
}

}  // namespace

TEST_CASE("retrieval examples") {
  const Bank b = text_bank({at_cosine(0.85), at_cosine(0.79, -1.0)}, {"a", "b"});
  const auto m = retrieve(b, e1());
  REQUIRE(m.has_value());
  CHECK(m->entry->payload.text == "a");
  CHECK(m->similarity == doctest::Approx(0.85).epsilon(1e-12));

  // Self retrieval.
  const auto self = retrieve(b, at_cosine(0.79, -1.0));
  REQUIRE(self.has_value());
  CHECK(self->entry->payload.text == "b");
  CHECK(self->similarity == doctest::Approx(1.0).epsilon(1e-12));

  // Orthogonal query.
  const Bank b3 = text_bank({Eigen::VectorXd::Unit(3, 0), Eigen::VectorXd::Unit(3, 1)}, {"x", "y"});
  CHECK_FALSE(retrieve(b3, Eigen::VectorXd::Unit(3, 2)).has_value());
  CHECK(top1(b3, Eigen::VectorXd::Unit(3, 2)).similarity == 0.0);
}

TEST_CASE("ties go to the lowest source id") {
  std::vector<BankEntry> entries = {{at_cosine(0.9), {std::nullopt, "late", ""}, 7},
                                    {at_cosine(0.9, -1.0), {std::nullopt, "early", ""}, 3}};
  const Bank b(BankKind::kTM, 0.8, entries);
  CHECK(retrieve(b, e1())->entry->payload.text == "early");
}

TEST_CASE("retrieval equals the brute-force oracle") {
  Rng rng(21);
  std::vector<Eigen::VectorXd> emb;
  std::vector<std::string> names;
  for (int i = 0; i < 60; ++i) {
    emb.push_back(random_unit(rng, 5));
    names.push_back(std::to_string(i));
  }
  emb.push_back(emb[10]);  // exact duplicate to exercise ties
  names.push_back("dup");
  const Bank b = text_bank(emb, names, 0.3);
  for (int t = 0; t < 200; ++t) {
    const Eigen::VectorXd q = t % 10 == 0 ? emb[10] : random_unit(rng, 5);
    const std::size_t want = brute_force(b, q);
    const Match m = top1(b, q);
    CHECK(m.entry == &b.entries()[want]);
    const auto r = retrieve(b, q);
    CHECK(r.has_value() == (m.similarity >= 0.3));
  }
}

TEST_CASE("bank construction and errors") {
  CHECK_THROWS_AS(text_bank({}, {}), Error);
  CHECK_THROWS_AS(text_bank({Eigen::VectorXd::Constant(2, 1.0)}, {"x"}), Error);
  CHECK_THROWS_AS(text_bank({e1()}, {"x"}, 0.0), Error);
  CHECK_THROWS_AS(text_bank({e1()}, {"x"}, 1.5), Error);
  const Bank b = text_bank({e1()}, {"x"});
  try {
    top1(b, Eigen::VectorXd::Unit(3, 0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimension);
  }
}

TEST_CASE("bank JSON round trip") {
  const Bank b = music_bank({at_cosine(0.3), at_cosine(0.6, -1.0)}, 0.75);
  const auto path = std::filesystem::temp_directory_path() / "temu_bank.json";
  b.save(path);
  const Bank back = Bank::load(path);
  CHECK(back.kind() == BankKind::kMD);
  CHECK(back.dim() == 2);
  CHECK(back.threshold() == 0.75);
  REQUIRE(back.size() == 2);
  CHECK(back.entries()[1].embedding == b.entries()[1].embedding);
  CHECK(back.entries()[1].payload.music->genre == "g1");
  CHECK(back.to_json() == b.to_json());
  const Json j = b.to_json();
  CHECK(j.contains("kind"));
  CHECK(j["entries"][0].contains("payload"));
  CHECK(j["entries"][0].contains("source_id"));
  std::filesystem::remove(path);
  Json bad = j;
  bad["kind"] = "XX";
  CHECK_THROWS_AS(Bank::from_json(bad), Error);
}

TEST_CASE("pseudo-triplets from text-motion items retrieve music") {
  auto items = text_items(2);
  items[0].text = "jump";
  items[1].text = "wave";
  const Bank md = music_bank({at_cosine(0.9), at_cosine(0.2, -1.0)});
  const auto trips = make_pseudo_triplets(items, {e1(), Eigen::VectorXd::Unit(2, 1) * -1.0}, md);
  REQUIRE(trips.size() == 2);
  CHECK(trips[0].music_provenance == Provenance::kRetrieved);
  CHECK(trips[0].text_provenance == Provenance::kNativePair);
  CHECK(*trips[0].similarity == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(trips[0].music->genre == "g0");
  CHECK(*trips[0].text == "jump");
  // -e2 meets the second entry at sqrt(1 - 0.04) = 0.98.
  CHECK(trips[1].music_provenance == Provenance::kRetrieved);
  CHECK(trips[1].retrieved_from == 1);
}

TEST_CASE("pseudo-triplets from music-dance items compose instructions") {
  auto items = dance_items(2);
  items[0].genre = "popping";
  items[0].music = tiny_music("popping");
  items[1].genre = "house";
  items[1].music = tiny_music("house");
  const Bank tm = text_bank({Eigen::VectorXd::Unit(3, 0), Eigen::VectorXd::Unit(3, 1)}, {"walk forward", "jump"});
  const auto trips = make_pseudo_triplets(items, {Eigen::VectorXd::Unit(3, 0), Eigen::VectorXd::Unit(3, 2)}, tm);
  CHECK(*trips[0].text == "walk forward, popping");
  CHECK(trips[0].text_provenance == Provenance::kRetrieved);
  CHECK(trips[0].music_provenance == Provenance::kNativePair);
  CHECK_FALSE(trips[1].text.has_value());
  CHECK(trips[1].text_provenance == Provenance::kNullFilled);
  CHECK_FALSE(trips[1].similarity.has_value());
  CHECK(composite_instruction("walk forward", "popping") == "walk forward, popping");

  try {
    make_pseudo_triplets(items, {Eigen::VectorXd::Unit(3, 0), Eigen::VectorXd::Unit(3, 2)},
                         music_bank({Eigen::VectorXd::Unit(3, 0)}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBankMismatch);
  }
  try {
    make_pseudo_triplets(items, {e1(), e1()}, tm);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBankMismatch);
  }
}

TEST_CASE("all-orthogonal batches are null filled") {
  auto items = text_items(3);
  const Bank md = music_bank({Eigen::VectorXd::Unit(4, 0)});
  const auto trips = make_pseudo_triplets(
      items, {Eigen::VectorXd::Unit(4, 1), Eigen::VectorXd::Unit(4, 2), Eigen::VectorXd::Unit(4, 3)}, md);
  for (const auto& t : trips) {
    CHECK(t.music_provenance == Provenance::kNullFilled);
    CHECK_FALSE(t.music.has_value());
  }
}

TEST_CASE("no retrieved condition falls below the threshold") {
  Rng rng(8);
  std::vector<Eigen::VectorXd> emb;
  for (int i = 0; i < 30; ++i) emb.push_back(random_unit(rng, 3));
  for (double tau : {0.5, 0.8, 0.95}) {
    auto items = text_items(100);
    std::vector<Eigen::VectorXd> q;
    for (int i = 0; i < 100; ++i) q.push_back(random_unit(rng, 3));
    const auto a = make_pseudo_triplets(items, q, music_bank(emb, tau));
    const auto b = make_pseudo_triplets(items, q, music_bank(emb, tau));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].music_provenance == Provenance::kRetrieved) CHECK(*a[i].similarity >= tau);
      else CHECK_FALSE(a[i].similarity.has_value());
      CHECK(a[i].retrieved_from == b[i].retrieved_from);
      CHECK(a[i].music_provenance == b[i].music_provenance);
    }
  }
}

TEST_CASE("percentiles interpolate linearly") {
  CHECK(percentile({0.7, 0.85, 0.9, 0.95}, 0.5) == doctest::Approx(0.875));
  CHECK(percentile({1.0, 2.0, 3.0}, 0.5) == 2.0);
  CHECK(percentile({1.0, 2.0}, 0.1) == doctest::Approx(1.1));
  CHECK(percentile({4.0}, 0.9) == 4.0);
  CHECK_THROWS_AS(percentile({}, 0.5), Error);
}

TEST_CASE("retrieval statistics on constructed similarities") {
  const Bank md = music_bank({e1()});
  const Bank tm = text_bank({e1()}, {"x"});
  const std::vector<Eigen::VectorXd> qa = {at_cosine(0.7), at_cosine(0.85), at_cosine(0.9), at_cosine(0.95)};
  const RetrievalStats s = retrieval_stats(md, tm, qa, {e1(), e1()}, 0.8);
  CHECK(s.a.acceptance_rate == 0.75);
  CHECK(s.a.null_rate == 0.25);
  CHECK(s.a.similarity.median == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(s.a.similarity.min == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(s.a.similarity.max == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(s.a.similarity.mean == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(s.a.similarity.p10 == doctest::Approx(0.745).epsilon(1e-12));
  CHECK(s.b.acceptance_rate == 1.0);
  CHECK(s.b.similarity.min == doctest::Approx(1.0));
  CHECK(s.b.similarity.max == doctest::Approx(1.0));

  const Json j = to_json(s);
  for (const char* k : {"min", "p10", "median", "p90", "max", "mean"}) CHECK(j["directions"][0]["similarity"].contains(k));
  CHECK(to_json(retrieval_stats_from_json(j)).dump() == j.dump());
  Json broken = j;
  broken["directions"][1].erase("null_rate");
  CHECK_THROWS_AS(retrieval_stats_from_json(broken), Error);
  const std::string table = retrieval_table(s);
  for (const char* h : {"Min", "P10", "Median", "P90", "Max", "Mean", "Acceptance", "Null", "75.00%"}) {
    CHECK(table.find(h) != std::string::npos);
  }
}

TEST_CASE("retrieval statistics properties") {
  Rng rng(12);
  std::vector<Eigen::VectorXd> emb, qa;
  for (int i = 0; i < 40; ++i) emb.push_back(random_unit(rng, 4));
  for (int i = 0; i < 97; ++i) qa.push_back(random_unit(rng, 4));
  const Bank md = music_bank(emb);
  const Bank tm = text_bank(emb, std::vector<std::string>(40, "t"));
  double prev = 1.1;
  for (double tau = 0.05; tau <= 1.0; tau += 0.05) {
    const RetrievalStats s = retrieval_stats(md, tm, qa, qa, tau);
    CHECK(s.a.acceptance_rate + s.a.null_rate == 1.0);
    CHECK(s.a.acceptance_rate <= prev);
    prev = s.a.acceptance_rate;
    const auto& m = s.a.similarity;
    CHECK(m.min <= m.p10);
    CHECK(m.p10 <= m.median);
    CHECK(m.median <= m.p90);
    CHECK(m.p90 <= m.max);
    // Brute-force recount.
    int accepted = 0;
    for (const auto& q : qa) accepted += md.entries()[brute_force(md, q)].embedding.dot(q) >= tau;
    CHECK(s.a.acceptance_rate == static_cast<double>(accepted) / qa.size());
  }
  for (int n = 1; n <= 200; ++n) {
    for (int k = 0; k <= n; ++k) {
      const double acc = static_cast<double>(k) / n;
      CHECK(acc + (1.0 - acc) == 1.0);
    }
  }
}
