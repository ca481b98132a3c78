#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "placeorigin/error.hpp"
#include "placeorigin/pipeline.hpp"
#include "support/helpers.hpp"
#include "support/mock_servers.hpp"

using namespace placeorigin;
namespace fs = std::filesystem;

namespace {

const std::string kBatman = "http://dbpedia.org/resource/John_Batman";

testsupport::ScriptedGenerator::Reply batman_script(const std::string& prompt) {
  if (prompt.find("Batman Avenue") != std::string::npos) {
    return {200, "<CHOICE> dbr:John_Batman </CHOICE> <ANSWER> John Batman </ANSWER> Based on the provided information, ..."};
  }
  return {200, "There is no relevant information to answer the question."};
}

std::vector<GazetteerEntry> e2e_entries() {
  std::ifstream in(testsupport::fixture("e2e_gazetteer.csv"));
  return load_gazetteer(in, Delimiter::comma);
}

pipeline::PipelineConfig mock_config(const std::string& sparql, const std::string& generator,
                                     const fs::path& cache) {
  pipeline::PipelineConfig cfg;
  cfg.sparql_url = sparql;
  cfg.generator_url = generator;
  cfg.encoder = "test";
  cfg.encoder_dim = 64;
  cfg.token_counter = "whitespace";
  cfg.cache_dir = cache.string();
  cfg.rate_limit_ms = 0;
  cfg.retry_base_delay_ms = 1;
  return cfg;
}

std::map<std::string, std::string> run_outputs(const pipeline::PipelineConfig& cfg) {
  const auto dir = pipeline::run_dir(cfg);
  return {{"manifest", testsupport::slurp(dir / "manifest.json")},
          {"rankings", testsupport::slurp(dir / "rankings.ndjson")},
          {"generations", testsupport::slurp(dir / "generations.ndjson")}};
}

/// Sets SOURCE_DATE_EPOCH for the lifetime of the guard.
struct EpochGuard {
  EpochGuard() { ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1); }
  ~EpochGuard() { ::unsetenv("SOURCE_DATE_EPOCH"); }
};

}  // namespace

TEST_CASE("config round trip, validation and overrides") {
  pipeline::PipelineConfig cfg;
  cfg.k_ranker = 7;
  cfg.n_clusters = 4;
  cfg.ordering = gen::Ordering::head_best;
  cfg.index_mode = pipeline::IndexMode::joint;
  CHECK(pipeline::config_from_json(pipeline::to_json(cfg)) == cfg);
  CHECK(pipeline::config_from_json("{}") == pipeline::PipelineConfig{});
  try {
    pipeline::config_from_json(R"({"k_rankr": 3})");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).find("k_rankr") != std::string::npos);
  }
  CHECK_THROWS_AS(pipeline::validate(pipeline::config_from_json(R"({"k_ranker": 0})")), Error);
  CHECK_THROWS_AS(pipeline::validate(pipeline::config_from_json(R"({"encoder": "magic"})")), Error);
  CHECK_NOTHROW(pipeline::validate(cfg));
  CHECK_THROWS_AS(pipeline::config_from_json("not json"), Error);

  auto moved = cfg;
  moved.cache_dir = "elsewhere";
  moved.workers = 8;
  moved.rate_limit_ms = 5;
  CHECK(pipeline::config_hash(moved) == pipeline::config_hash(cfg));
  moved.k_ranker = 8;
  CHECK(pipeline::config_hash(moved) != pipeline::config_hash(cfg));

  testsupport::TempDir dir("cfg");
  std::ofstream(dir.path() / "c.json") << R"({"k_searcher": 500})";
  ::setenv("PLACEORIGIN_SPARQL_URL", "http://127.0.0.1:1/sparql", 1);
  const auto loaded = pipeline::load_config(dir.path() / "c.json");
  ::unsetenv("PLACEORIGIN_SPARQL_URL");
  CHECK(loaded.k_searcher == 500);
  CHECK(loaded.sparql_url == "http://127.0.0.1:1/sparql");
  CHECK_THROWS_AS(pipeline::load_config(dir.path() / "missing.json"), Error);
}

TEST_CASE("pipeline over mocks: answers, isolation, caching, order independence") {
  EpochGuard epoch;
  testsupport::SparqlPassthrough sparql(testsupport::slurp(testsupport::fixture("e2e_sparql.srj")));
  testsupport::ScriptedGenerator generator(batman_script);
  testsupport::TempDir dir("pipe");
  const auto cfg = mock_config(sparql.endpoint(), generator.endpoint(), dir.path() / "cache");

  pipeline::BackendCalls calls;
  const auto m = pipeline::run_pipeline(e2e_entries(), cfg, &calls);
  REQUIRE(m.entries.size() == 5);
  CHECK(std::is_sorted(m.entries.begin(), m.entries.end(),
                       [](const auto& a, const auto& b) { return a.query_id < b.query_id; }));
  std::map<std::string, const pipeline::EntryResult*> by_name;
  for (const auto& e : m.entries) by_name[e.raw_name] = &e;

  const auto& batman = *by_name.at("Batman Avenue");
  CHECK(batman.query_id == "Batman Avenue, Melbourne, Australia");
  CHECK(batman.status == pipeline::EntryStatus::ok);
  REQUIRE_FALSE(batman.ranked_subjects.empty());
  CHECK(batman.ranked_subjects.front() == kBatman);
  CHECK(batman.ranked_subjects.size() <= 10);
  CHECK(batman.answer == "John Batman");
  CHECK(batman.choice == "dbr:John_Batman");
  CHECK_FALSE(batman.off_list);

  const auto& zzyzx = *by_name.at("Zzyzx Way");
  CHECK(zzyzx.status == pipeline::EntryStatus::no_kg);
  CHECK(zzyzx.ranked_subjects.empty());
  CHECK(by_name.at("Swanston Street")->status == pipeline::EntryStatus::ok);
  CHECK(by_name.at("Swanston Street")->refusal);
  CHECK(calls.sparql == 5);
  CHECK(calls.generator == 4);
  CHECK(batman.started_at == "2023-11-14T22:13:20Z");

  const auto first = run_outputs(cfg);
  pipeline::BackendCalls again;
  pipeline::run_pipeline(e2e_entries(), cfg, &again);
  CHECK(again.sparql == 0);
  CHECK(again.encoder == 0);
  CHECK(again.generator == 0);
  CHECK(run_outputs(cfg) == first);

  auto reversed = e2e_entries();
  std::reverse(reversed.begin(), reversed.end());
  auto parallel = mock_config(sparql.endpoint(), generator.endpoint(), dir.path() / "cache2");
  parallel.workers = 3;
  pipeline::run_pipeline(reversed, parallel);
  auto a = run_outputs(cfg), b = run_outputs(parallel);
  CHECK(a == b);
}

TEST_CASE("an interrupted run resumes with only the missing work") {
  EpochGuard epoch;
  testsupport::SparqlPassthrough sparql(testsupport::slurp(testsupport::fixture("e2e_sparql.srj")));
  bool broken = true;
  testsupport::ScriptedGenerator generator([&](const std::string& prompt) -> testsupport::ScriptedGenerator::Reply {
    if (broken && prompt.find("Swanston Street") != std::string::npos) return {500, "backend down"};
    return batman_script(prompt);
  });
  testsupport::TempDir dir("resume");
  const auto cfg = mock_config(sparql.endpoint(), generator.endpoint(), dir.path() / "cache");

  const auto partial = pipeline::run_pipeline(e2e_entries(), cfg);
  std::size_t failed = 0;
  for (const auto& e : partial.entries) failed += e.status == pipeline::EntryStatus::generate_error;
  CHECK(failed == 1);

  broken = false;
  pipeline::BackendCalls calls;
  const auto resumed = pipeline::run_pipeline(e2e_entries(), cfg, &calls);
  CHECK(calls.sparql == 0);
  CHECK(calls.generator == 1);
  for (const auto& e : resumed.entries) CHECK(e.status != pipeline::EntryStatus::generate_error);

  const auto clean = mock_config(sparql.endpoint(), generator.endpoint(), dir.path() / "clean");
  pipeline::run_pipeline(e2e_entries(), clean);
  CHECK(run_outputs(cfg) == run_outputs(clean));
}

TEST_CASE("reports from a run, missing inputs and an empty run") {
  EpochGuard epoch;
  testsupport::SparqlPassthrough sparql(testsupport::slurp(testsupport::fixture("e2e_sparql.srj")));
  testsupport::ScriptedGenerator generator(batman_script);
  testsupport::TempDir dir("report");
  const auto cfg = mock_config(sparql.endpoint(), generator.endpoint(), dir.path() / "cache");
  const auto m = pipeline::run_pipeline(e2e_entries(), cfg);

  std::ofstream judg(dir.path() / "judgments.ndjson"), meta(dir.path() / "meta.ndjson");
  for (const auto& e : m.entries) {
    for (const auto& s : e.ranked_subjects) {
      const int hit = s == kBatman ? 1 : 0;
      judg << nlohmann::json{{"query_id", e.query_id}, {"item_id", s}, {"sem", hit}, {"geo_aus", hit}, {"geo_vic", hit}}.dump() << '\n';
    }
    if (e.answer) {
      judg << nlohmann::json{{"query_id", e.query_id}, {"item_id", "answer:" + *e.answer}, {"sem", 1}, {"geo_aus", 1}, {"geo_vic", 1}}.dump() << '\n';
    }
    const bool extracted = e.status != pipeline::EntryStatus::no_kg;
    meta << nlohmann::json{{"query_id", e.query_id}, {"kg_extracted", extracted}, {"origin_mentioned", e.raw_name == "Batman Avenue"}}.dump() << '\n';
  }
  judg.close();
  meta.close();

  const auto files = pipeline::emit_report(m, dir.path() / "judgments.ndjson", dir.path() / "meta.ndjson", 10, dir.path() / "out");
  const auto ranker = nlohmann::json::parse(testsupport::slurp(files.ranker_json));
  CHECK(ranker.at("n") == 5);
  CHECK(ranker.at("n_star") == 1);
  const auto generator_report = nlohmann::json::parse(testsupport::slurp(files.generator_json));
  CHECK(generator_report.at("n") == 5);

  try {
    pipeline::emit_report(m, dir.path() / "nope.ndjson", dir.path() / "meta.ndjson", 10, dir.path() / "out");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
    CHECK(std::string(e.what()).find("nope.ndjson") != std::string::npos);
  }

  const auto empty_cfg = mock_config(sparql.endpoint(), generator.endpoint(), dir.path() / "empty");
  const auto empty = pipeline::run_pipeline({}, empty_cfg);
  CHECK(empty.entries.empty());
  std::ofstream(dir.path() / "empty_meta.ndjson").close();
  const auto ef = pipeline::emit_report(empty, dir.path() / "judgments.ndjson", dir.path() / "empty_meta.ndjson", 10, dir.path() / "out_empty");
  CHECK(nlohmann::json::parse(testsupport::slurp(ef.ranker_json)).at("n") == 0);
}
