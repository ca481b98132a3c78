#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <set>

#include "placeorigin/error.hpp"
#include "placeorigin/kg_search.hpp"
#include "placeorigin/sparql.hpp"
#include "support/helpers.hpp"
#include "support/mock_servers.hpp"
#include "support/oracles.hpp"

using namespace placeorigin;
using nlohmann::json;

namespace {

http::RetryPolicy fast_policy() {
  http::RetryPolicy p;
  p.base_delay = std::chrono::milliseconds(1);
  p.max_delay = std::chrono::milliseconds(4);
  p.timeout = std::chrono::milliseconds(5000);
  return p;
}

/// Triples written out by hand in the manifest, read without going through
/// the searcher.
std::vector<rdf::Triple> manifest_triples() {
  const auto doc = json::parse(testsupport::slurp(testsupport::fixture("search_manifest.json")));
  std::vector<rdf::Triple> out;
  for (const auto& b : doc.at("triples")) {
    rdf::Triple t;
    t.subject = b.at("s").at("value");
    t.predicate = b.at("p").at("value");
    const auto& o = b.at("o");
    const std::string type = o.at("type");
    t.object = o.at("value");
    t.object_kind = type == "uri" ? rdf::TermKind::iri : type == "bnode" ? rdf::TermKind::blank
                                                                         : rdf::TermKind::literal;
    if (o.contains("xml:lang")) t.object_lang = o.at("xml:lang").get<std::string>();
    if (o.contains("datatype") && !t.object_lang) t.object_datatype = o.at("datatype").get<std::string>();
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string srj_from(const std::vector<json>& bindings) {
  return json{{"head", {{"vars", {"s", "p", "o"}}}}, {"results", {{"bindings", bindings}}}}.dump();
}

}  // namespace

TEST_CASE("relation filter defaults and restriction") {
  const auto f = kg::RelationFilter::defaults();
  CHECK(f.relations().size() == 12);
  for (const auto& [k, v] : f.relations()) CHECK_FALSE(v.empty());
  CHECK(f.key_of("http://dbpedia.org/ontology/abstract") == "abstract");
  CHECK_FALSE(f.key_of("http://dbpedia.org/ontology/thumbnail"));
  const auto shipped = kg::RelationFilter::load(std::string(PLACEORIGIN_DATA_DIR) + "/../../config/relations.json");
  CHECK(shipped.relations() == f.relations());
  CHECK(f.restricted_to({"label", "abstract"}).relations().size() == 2);
  CHECK_THROWS_AS(f.restricted_to({"nope"}), Error);
  CHECK_THROWS_AS(kg::RelationFilter::from_json(R"({"a": []})"), Error);
  CHECK_THROWS_AS(kg::RelationFilter::from_json(R"({"a": ["relative/iri"]})"), Error);
}

TEST_CASE("build_sparql carries every constraint") {
  const auto f = kg::RelationFilter::defaults();
  const auto q = kg::build_sparql("Batman", f, {10000, 1000});
  CHECK(q.find("LIMIT 10000") != std::string::npos);
  CHECK(q.find("LIMIT 1000\n") != std::string::npos);
  CHECK(q.find("LCASE(\"Batman\")") != std::string::npos);
  for (const auto& p : f.predicates()) CHECK(q.find("<" + p + ">") != std::string::npos);
  CHECK(q.find("langMatches(lang(?o), \"en\")") != std::string::npos);
  CHECK(kg::build_sparql("O'Brien", f, {10, 5}).find("\"O'Brien\"") != std::string::npos);
  CHECK(kg::build_sparql("a\"b\\c", f, {10, 5}).find("\"a\\\"b\\\\c\"") != std::string::npos);
  try {
    kg::build_sparql("  ", f, {10, 5});
    FAIL("expected EmptyName");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyName);
  }
  CHECK_THROWS_AS(kg::build_sparql("x", f, {0, 5}), Error);
}

TEST_CASE("helpers for containment and language") {
  CHECK(kg::english_or_untagged(std::nullopt));
  CHECK(kg::english_or_untagged(std::string("EN-au")));
  CHECK_FALSE(kg::english_or_untagged(std::string("fr")));
  CHECK_FALSE(kg::english_or_untagged(std::string("eng")));
  CHECK(kg::readable_local_name("http://dbpedia.org/resource/Batman%27s_Hill") == "Batman's Hill");
  CHECK(kg::name_contains("http://dbpedia.org/resource/John_Batman", "batman"));
  CHECK_FALSE(kg::name_contains("http://dbpedia.org/resource/Robin_(character)", "batman"));
}

TEST_CASE("the 60-row fixture conforms to exactly the hand-filtered manifest") {
  const auto body = testsupport::slurp(testsupport::fixture("search_fixture.srj"));
  const auto rows = sparql::parse_results(body, "application/sparql-results+json");
  CHECK(rows.rows.size() == 60);
  const auto res = kg::conform(rows, "Batman", kg::RelationFilter::defaults(), {10000, 1000});
  CHECK(res.triples == manifest_triples());
  CHECK(res.triples.size() == 23);
  CHECK_FALSE(res.truncated);
  for (const auto& t : res.triples) {
    CHECK(t.object != "John Batman était un entrepreneur et explorateur australien.");
  }

  const auto lim = kg::conform(rows, "Batman", kg::RelationFilter::defaults(), {5, 3});
  CHECK(lim.triples.size() <= 5);
  CHECK(lim.subject_count <= 3);
  CHECK(lim.truncated);
  const auto subj = kg::conform(rows, "Batman", kg::RelationFilter::defaults(), {10000, 2});
  CHECK(subj.subject_count == 2);
  CHECK(subj.truncated);
}

TEST_CASE("execute_search over the mock endpoint, with retries") {
  const auto manifest = json::parse(testsupport::slurp(testsupport::fixture("search_manifest.json")));
  std::vector<json> twelve(manifest["triples"].begin(), manifest["triples"].begin() + 12);
  testsupport::SparqlPassthrough server(srj_from(twelve));
  const sparql::Client client(server.endpoint(), fast_policy());
  const auto f = kg::RelationFilter::defaults();
  const auto q = kg::build_sparql("Batman", f, {10000, 1000});

  auto res = kg::execute_search(client, q, "Batman", f, {10000, 1000});
  CHECK(res.triples.size() == 12);
  CHECK(res.retries == 0);
  CHECK(server.last_query().find("Batman") != std::string::npos);

  server.fail_next(503, 2);
  res = kg::execute_search(client, q, "Batman", f, {10000, 1000});
  CHECK(res.triples.size() == 12);
  CHECK(res.retries == 2);

  server.fail_next(503, 3);
  try {
    kg::execute_search(client, q, "Batman", f, {10000, 1000});
    FAIL("expected HttpError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HttpError);
  }
  server.fail_next(400, 1);
  const int before = server.requests();
  CHECK_THROWS_AS(kg::execute_search(client, q, "Batman", f, {10000, 1000}), Error);
  CHECK(server.requests() == before + 1);
}

TEST_CASE("snapshot cache round trip, NotCached and corruption") {
  const auto body = testsupport::slurp(testsupport::fixture("search_fixture.srj"));
  testsupport::SparqlPassthrough server(body);
  const sparql::Client client(server.endpoint(), fast_policy());
  const auto f = kg::RelationFilter::defaults();
  const auto snap = kg::fetch_snapshot(client, "Batman", f, {10000, 1000});
  CHECK(snap.endpoint == server.endpoint());
  CHECK(snap.subject_count == 7);
  CHECK(kg::audit_snapshot(snap, f, {10000, 1000}).empty());

  testsupport::TempDir dir("snap");
  kg::cache_snapshot(snap, dir.path());
  const auto back = kg::load_snapshot("Batman", dir.path());
  REQUIRE(back);
  CHECK(*back == snap);
  CHECK_FALSE(kg::load_snapshot("Robin", dir.path()));

  // The cached document parses back to the same triples in an independent reader.
  const auto rdf_text = testsupport::slurp(kg::snapshot_rdf_path(dir.path(), "Batman"));
  CHECK(oracle::read_rdfxml(rdf_text) == snap.triples);
  kg::cache_snapshot(snap, dir.path());
  CHECK(testsupport::slurp(kg::snapshot_rdf_path(dir.path(), "Batman")) == rdf_text);

  std::ofstream(kg::snapshot_rdf_path(dir.path(), "Batman"), std::ios::app) << "<!-- edit -->";
  try {
    kg::load_snapshot("Batman", dir.path());
    FAIL("expected CorruptSnapshot");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CorruptSnapshot);
  }
}

TEST_CASE("audit flags rule violations") {
  kg::KGSnapshot s;
  s.root_name = "Batman";
  s.triples = {{"http://dbpedia.org/resource/Robin", "http://www.w3.org/2000/01/rdf-schema#label",
                rdf::TermKind::literal, "Robin", std::string("fr"), {}}};
  s.subject_count = 1;
  CHECK(kg::audit_snapshot(s, kg::RelationFilter::defaults(), {10000, 1000}).size() >= 2);
}
