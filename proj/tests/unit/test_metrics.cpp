#include <doctest.h>

#include <fstream>
#include <sstream>

#include "placeorigin/error.hpp"
#include "placeorigin/metrics.hpp"
#include "placeorigin/rng.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace placeorigin;
using eval::Channel;

namespace {

double hr(const std::vector<int>& r, std::size_t k) { return eval::hr_at_k(r, k); }
double mrr(const std::vector<int>& r, std::size_t k) { return eval::mrr_at_k(r, k); }
double ndcg(const std::vector<int>& r, std::size_t k) { return eval::ndcg_at_k(r, k); }
double prec(const std::vector<int>& r, std::size_t k) { return eval::precision_at_k(r, k); }

std::vector<int> random_rels(Rng& rng) {
  std::vector<int> r(rng.below(30));
  const double p = rng.uniform();
  for (auto& x : r) x = rng.uniform() < p ? 1 : 0;
  return r;
}

eval::RelevanceJudgment judge(std::string q, std::string item, int sem, int aus, int vic) {
  return {std::move(q), std::move(item), sem, aus, vic};
}

}  // namespace

TEST_CASE("metric worked examples") {
  CHECK(hr({1, 0, 0}, 10) == 1.0);
  CHECK(hr({0, 0, 0}, 3) == 0.0);
  CHECK(hr({0, 0, 0, 1}, 3) == 0.0);
  CHECK(mrr({1, 0}, 10) == 1.0);
  CHECK(mrr({0, 0, 1}, 10) == doctest::Approx(1.0 / 3));
  CHECK(mrr({0, 0, 0, 1}, 3) == 0.0);
  CHECK(ndcg({1, 0, 0}, 3) == 1.0);
  CHECK(ndcg({0, 0, 1}, 3) == doctest::Approx(0.5));
  CHECK(ndcg({0, 0, 0}, 3) == 0.0);
  CHECK(eval::ndcg_at_k(std::vector<int>{0, 0, 1}, 3, 1) == doctest::Approx(0.5));
  CHECK(prec({1, 1, 0, 0, 0, 0, 0, 0, 0, 0}, 10) == doctest::Approx(0.2));
  CHECK(prec({1, 1, 1}, 3) == 1.0);
  CHECK(eval::map_at_k({{1, 1, 0, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0}}, 10) == doctest::Approx(0.1));
  CHECK(eval::average_precision_at_k(std::vector<int>{1, 0, 1}, 3) == doctest::Approx((1.0 + 2.0 / 3) / 2));
}

TEST_CASE("metrics match the reference scorer on random lists") {
  Rng rng(101);
  for (int t = 0; t < 1000; ++t) {
    const auto r = random_rels(rng);
    const std::size_t k = 1 + rng.below(40);
    CHECK(hr(r, k) == doctest::Approx(oracle::hr(r, k)).epsilon(1e-9));
    CHECK(mrr(r, k) == doctest::Approx(oracle::mrr(r, k)).epsilon(1e-9));
    CHECK(ndcg(r, k) == doctest::Approx(oracle::ndcg(r, k)).epsilon(1e-9));
    CHECK(prec(r, k) == doctest::Approx(oracle::precision(r, k)).epsilon(1e-9));
  }
}

TEST_CASE("metric properties") {
  Rng rng(103);
  for (int t = 0; t < 1000; ++t) {
    auto r = random_rels(rng);
    const std::size_t k = 1 + rng.below(30);
    CHECK(hr(r, k) >= ndcg(r, k) - 1e-12);
    CHECK(ndcg(r, k) >= 0.0);
    CHECK(hr(r, k) >= mrr(r, k));
    CHECK(hr(r, k + 1) >= hr(r, k));
    CHECK(prec(r, k + 1) * static_cast<double>(k + 1) >= prec(r, k) * static_cast<double>(k) - 1e-12);

    if (r.size() >= k) {
      const double h = hr(r, k), m = mrr(r, k), p = prec(r, k);
      // only the ideal may change nDCG; pin the relevant count to compare
      const double n = eval::ndcg_at_k(r, k, k);
      for (int extra = 0; extra < 5; ++extra) r.push_back(static_cast<int>(rng.below(2)));
      CHECK(hr(r, k) == h);
      CHECK(mrr(r, k) == m);
      CHECK(prec(r, k) == p);
      CHECK(eval::ndcg_at_k(r, k, k) == n);
    }
  }
}

TEST_CASE("aggregate over four queries, two starred") {
  eval::Judgments j;
  j.add(judge("q1", "a", 1, 1, 1));
  j.add(judge("q1", "b", 0, 1, 0));
  j.add(judge("q2", "c", 0, 0, 0));
  j.add(judge("q2", "d", 1, 1, 0));
  j.add(judge("q3", "e", 0, 1, 1));
  const std::vector<eval::Ranking> rankings = {{"q1", {"a", "b"}}, {"q2", {"c", "d"}}, {"q3", {"e"}}};
  const std::vector<eval::QueryMeta> meta = {
      {"q1", true, true}, {"q2", true, true}, {"q3", true, false}, {"q4", false, false}};
  const auto rep = eval::aggregate(j, rankings, meta, 2);
  CHECK(rep.n == 4);
  CHECK(rep.n_star == 2);
  CHECK(rep.n_extracted == 3);
  CHECK(rep.all.at(Channel::sem).hr == doctest::Approx(0.5));
  CHECK(rep.all.at(Channel::sem).mrr == doctest::Approx((1.0 + 0.5) / 4));
  CHECK(rep.starred.at(Channel::sem).hr == doctest::Approx(1.0));
  CHECK(rep.all.at(Channel::geo_aus).hr == doctest::Approx(0.75));
  CHECK(rep.all.at(Channel::geo_aus).precision == doctest::Approx((1.0 + 0.5 + 0.5) / 4));
  CHECK(rep.starred.at(Channel::geo_vic).hr == doctest::Approx(0.5));

  try {
    eval::aggregate(j, {{"q1", {"a", "zz"}}}, meta, 2);
    FAIL("expected MissingJudgment");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingJudgment);
    CHECK(std::string(e.what()).find("zz") != std::string::npos);
    CHECK(std::string(e.what()).find("q1") != std::string::npos);
  }
  // unjudged items past the cutoff are fine
  CHECK_NOTHROW(eval::aggregate(j, {{"q1", {"a", "b", "zz"}}}, meta, 2));
  CHECK_THROWS_AS(eval::aggregate(j, {{"q9", {"a"}}}, meta, 2), Error);
  CHECK_THROWS_AS(eval::aggregate(j, rankings, meta, 0), Error);
}

TEST_CASE("judgment validation") {
  eval::Judgments j;
  try {
    j.add(judge("q", "i", 0, 0, 1));
    FAIL("expected InvalidJudgment");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidJudgment);
  }
  CHECK_THROWS_AS(j.add(judge("q", "i", 2, 0, 0)), Error);
  j.add(judge("q", "i", 1, 0, 0));
  CHECK_NOTHROW(j.add(judge("q", "i", 1, 0, 0)));
  CHECK_THROWS_AS(j.add(judge("q", "i", 0, 0, 0)), Error);

  std::istringstream in(R"({"query_id":"q","item_id":"x","sem":0,"geo_aus":0,"geo_vic":1})" "\n");
  CHECK_THROWS_AS(eval::read_judgments(in), Error);
  std::istringstream bad_meta(R"({"query_id":"q","kg_extracted":false,"origin_mentioned":true})" "\n");
  CHECK_THROWS_AS(eval::read_meta(bad_meta), Error);
}

TEST_CASE("relative change in hit rate") {
  CHECK(*eval::delta_hr(0.375, 0.375) == 0.0);
  CHECK(*eval::delta_hr(0.30, 0.375) == doctest::Approx(-0.2));
  CHECK_FALSE(eval::delta_hr(0.5, 0.0));
}

TEST_CASE("Melbourne meta fixture reproduces the extraction and searcher rows") {
  std::ifstream in(testsupport::fixture("table3_meta.ndjson"));
  const auto meta = eval::read_meta(in);
  REQUIRE(meta.size() == 248);
  const auto rep = eval::aggregate(eval::Judgments{}, {}, meta, 10);
  CHECK(rep.n_extracted == 222);
  CHECK(rep.n_star == 93);
  CHECK(rep.extraction_rate() == doctest::Approx(222.0 / 248));
  CHECK(rep.extraction_rate() == doctest::Approx(0.895).epsilon(0.001));
  CHECK(rep.searcher_hit_ratio() == doctest::Approx(93.0 / 248));
  CHECK(rep.searcher_hit_ratio() == doctest::Approx(0.375).epsilon(0.001));
}

TEST_CASE("report writers") {
  eval::Judgments j;
  j.add(judge("q1", "a", 1, 1, 0));
  const std::vector<eval::QueryMeta> meta = {{"q1", true, true}};
  const std::vector<eval::Ranking> rankings = {{"q1", {"a"}}};
  const auto rep = eval::aggregate(j, rankings, meta, 3);
  std::ostringstream js, tsv, plot;
  eval::write_report_json(js, rep);
  eval::write_report_tsv(tsv, rep);
  eval::write_plot_data(plot, j, rankings, meta, 3);
  CHECK(js.str().find("\"n_star\"") != std::string::npos);
  CHECK(tsv.str().find("geo_vic") != std::string::npos);
  CHECK(plot.str().find("1\t.\t.") != std::string::npos);
}
