#include <doctest.h>

#include <algorithm>
#include <limits>
#include <set>

#include "placeorigin/doc_index.hpp"
#include "placeorigin/error.hpp"
#include "placeorigin/rng.hpp"
#include "support/helpers.hpp"

using namespace placeorigin;

namespace {

rdf::Triple lit(std::string s, std::string p, std::string o) {
  return {std::move(s), std::move(p), rdf::TermKind::literal, std::move(o), std::nullopt, std::nullopt};
}

const std::string kDbr = "http://dbpedia.org/resource/";
const std::string kLabel = "http://www.w3.org/2000/01/rdf-schema#label";
const std::string kAbstract = "http://dbpedia.org/ontology/abstract";

kg::KGSnapshot three_subjects() {
  kg::KGSnapshot s;
  s.root_name = "Batman";
  s.triples = {lit(kDbr + "John_Batman", kLabel, "John Batman"),
               lit(kDbr + "John_Batman", kAbstract, "Founder of Melbourne."),
               lit(kDbr + "Batman_Avenue", kLabel, "Batman Avenue"),
               lit(kDbr + "Batman,_Turkey", kLabel, "Batman")};
  std::sort(s.triples.begin(), s.triples.end());
  s.subject_count = 3;
  return s;
}

using Partition = std::set<std::set<std::size_t>>;

Partition partition_of(const std::vector<std::size_t>& assignment) {
  std::map<std::size_t, std::set<std::size_t>> groups;
  for (std::size_t i = 0; i < assignment.size(); ++i) groups[assignment[i]].insert(i);
  Partition p;
  for (auto& [c, g] : groups) p.insert(g);
  return p;
}

double sse(const std::vector<std::vector<float>>& pts, const std::vector<std::size_t>& group) {
  std::vector<double> mean(pts[0].size(), 0.0);
  for (auto i : group) {
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += pts[i][c];
  }
  for (auto& m : mean) m /= static_cast<double>(group.size());
  double s = 0;
  for (auto i : group) {
    for (std::size_t c = 0; c < mean.size(); ++c) s += (pts[i][c] - mean[c]) * (pts[i][c] - mean[c]);
  }
  return s;
}

/// Best 2-partition by enumerating every split.
Partition exhaustive_two_means(const std::vector<std::vector<float>>& pts) {
  const std::size_t n = pts.size();
  double best = std::numeric_limits<double>::infinity();
  Partition best_p;
  for (std::uint32_t mask = 1; mask < (1u << n) - 1; ++mask) {
    if (mask & 1u) continue;  // fix point 0 in the second group to skip mirrored splits
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? a : b).push_back(i);
    const double s = sse(pts, a) + sse(pts, b);
    if (s < best) {
      best = s;
      best_p = {std::set<std::size_t>(a.begin(), a.end()), std::set<std::size_t>(b.begin(), b.end())};
    }
  }
  return best_p;
}

}  // namespace

TEST_CASE("chunking gives one document per subject") {
  const enc::TestEncoder e(16, 512);
  const auto docs = index::chunk_by_subject(three_subjects(), e);
  REQUIRE(docs.size() == 3);
  std::size_t total = 0;
  std::set<std::string> seen;
  for (const auto& d : docs) {
    total += d.triples.size();
    seen.insert(d.subject);
    for (const auto& t : d.triples) CHECK(t.subject == d.subject);
    CHECK(d.text.find("rdf:Description") != std::string::npos);
    CHECK_FALSE(d.truncated);
  }
  CHECK(total == 4);
  CHECK(seen.size() == 3);
  CHECK(std::is_sorted(docs.begin(), docs.end(),
                       [](const auto& a, const auto& b) { return a.subject < b.subject; }));
}

TEST_CASE("long subjects are capped at 256 token units") {
  kg::KGSnapshot s;
  s.root_name = "Batman";
  std::string words;
  for (int i = 0; i < 400; ++i) words += "w" + std::to_string(i) + " ";
  s.triples = {lit(kDbr + "John_Batman", kAbstract, words)};
  s.subject_count = 1;
  const enc::TestEncoder e(16, 512);
  const auto docs = index::chunk_by_subject(s, e);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].truncated);
  CHECK(docs[0].token_count == 256);
  CHECK(e.tokenize(docs[0].text).size() == 256);
}

TEST_CASE("default cluster count is the ceiling square root") {
  CHECK(index::default_cluster_count(0) == 1);
  CHECK(index::default_cluster_count(1) == 1);
  CHECK(index::default_cluster_count(4) == 2);
  CHECK(index::default_cluster_count(5) == 3);
  CHECK(index::default_cluster_count(100) == 10);
  CHECK(index::default_cluster_count(101) == 11);
}

TEST_CASE("k-means: singletons, errors, and the exhaustive optimum on separated groups") {
  const std::vector<std::vector<float>> three = {{0, 0}, {1, 0}, {0, 1}};
  const auto single = index::kmeans(three, 5, 1);
  CHECK(single.assignment == std::vector<std::size_t>{0, 1, 2});
  CHECK_THROWS_AS(index::kmeans({}, 2, 1), Error);
  CHECK_THROWS_AS(index::kmeans(three, 0, 1), Error);
  CHECK_THROWS_AS(index::kmeans({{0, 0}, {1}}, 1, 1), Error);

  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::vector<float>> pts;
    const std::size_t n = 6 + rng.below(7);
    for (std::size_t i = 0; i < n; ++i) {
      const float cx = i < 2 ? (i == 0 ? 10.0f : -10.0f) : (rng.below(2) ? 10.0f : -10.0f);
      pts.push_back({cx + static_cast<float>(rng.normal()), static_cast<float>(rng.normal())});
    }
    const auto r = index::kmeans(pts, 2, 100 + trial);
    CHECK(partition_of(r.assignment) == exhaustive_two_means(pts));
    CHECK(r.assignment == index::kmeans(pts, 2, 100 + trial).assignment);
    CHECK(r.assignment[0] == 0);
  }
}

TEST_CASE("build_index is deterministic and independent of input order") {
  Rng rng(5);
  kg::KGSnapshot s;
  s.root_name = "x";
  for (int i = 0; i < 30; ++i) {
    s.triples.push_back(lit(kDbr + "S" + std::to_string(i), kAbstract, testsupport::random_sentence(rng, 5 + i % 7)));
  }
  std::sort(s.triples.begin(), s.triples.end());
  const enc::TestEncoder e(16, 512);
  const auto docs = index::chunk_by_subject(s, e);
  const auto a = index::build_index(docs, e, std::nullopt, 42);
  CHECK(a.size() == 30);
  CHECK(a.centroids.size() <= index::default_cluster_count(30));
  CHECK(a.embeddings.size() == 30);

  auto by_subject = [](const index::ClusteredIndex& idx) {
    std::set<std::set<std::string>> groups;
    for (const auto& m : idx.members()) {
      std::set<std::string> g;
      for (auto d : m) g.insert(idx.documents[d].subject);
      groups.insert(g);
    }
    return groups;
  };
  for (int t = 0; t < 5; ++t) {
    auto shuffled = docs;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    CHECK(by_subject(index::build_index(shuffled, e, std::nullopt, 42)) == by_subject(a));
  }
  const auto explicit_k = index::build_index(docs, e, 3, 42);
  CHECK(explicit_k.centroids.size() <= 3);
  CHECK_THROWS_AS(index::build_index({}, e, std::nullopt, 42), Error);
}

TEST_CASE("index save and load round trip") {
  const enc::TestEncoder e(16, 512);
  const auto idx = index::build_index(index::chunk_by_subject(three_subjects(), e), e, std::nullopt, 7);
  testsupport::TempDir dir("index");
  index::save_index(idx, dir.path());
  const auto back = index::load_index(dir.path());
  CHECK(back.documents == idx.documents);
  CHECK(back.embeddings == idx.embeddings);
  CHECK(back.centroids == idx.centroids);
  CHECK(back.assignment == idx.assignment);
  CHECK(back.encoder_fingerprint == idx.encoder_fingerprint);
  CHECK(back.seed == 7);
  CHECK_THROWS_AS(index::load_index(dir.path() / "missing"), Error);
}
