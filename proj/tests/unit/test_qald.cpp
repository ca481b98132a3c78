#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "placeorigin/error.hpp"
#include "placeorigin/qald.hpp"
#include "support/helpers.hpp"
#include "support/mock_servers.hpp"
#include "support/oracles.hpp"

using namespace placeorigin;
using nlohmann::json;

namespace {

const std::string kDbr = "http://dbpedia.org/resource/";
const std::string kLabel = "http://www.w3.org/2000/01/rdf-schema#label";

json uri(const std::string& v) { return {{"type", "uri"}, {"value", v}}; }
json en(const std::string& v) { return {{"type", "literal"}, {"value", v}, {"xml:lang", "en"}}; }

/// A tiny graph served by dispatching on the shape of each query.
class QaldEndpoint : public testsupport::MockServer {
 public:
  QaldEndpoint() {
    labels_ = {{"John_Batman", "John Batman"},
               {"John_Pascoe_Fawkner", "John Pascoe Fawkner"},
               {"Melbourne", "Melbourne"},
               {"Melbourne_Cricket_Ground", "Melbourne Cricket Ground"},
               {"Swanston_Street", "Swanston Street"}};
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      const auto q = req.get_param_value("query");
      if (fail_founder && q.find("ontology/founder") != std::string::npos) {
        res.status = 500;
        return;
      }
      res.set_content(answer(q).dump(), "application/sparql-results+json");
    };
    server_.Get("/sparql", handler);
    server_.Post("/sparql", handler);
    start();
  }
  ~QaldEndpoint() override { stop(); }

  std::string endpoint() const { return base_url() + "/sparql"; }
  bool fail_founder = false;

 private:
  std::map<std::string, std::string> labels_;

  static json select(std::vector<std::string> vars, json rows) {
    return {{"head", {{"vars", vars}}}, {"results", {{"bindings", rows}}}};
  }

  json spo_for(const std::vector<std::string>& locals) const {
    json rows = json::array();
    for (const auto& l : locals) rows.push_back({{"s", uri(kDbr + l)}, {"p", uri(kLabel)}, {"o", en(labels_.at(l))}});
    return select({"s", "p", "o"}, rows);
  }

  json answer(const std::string& q) const {
    if (q.find("ontology/founder") != std::string::npos) {
      return select({"uri"}, {{{"uri", uri(kDbr + "John_Batman")}}, {{"uri", uri(kDbr + "John_Pascoe_Fawkner")}}});
    }
    if (q.find("ontology/namedAfter") != std::string::npos) {
      return select({"uri"}, {{{"uri", uri(kDbr + "Swanston_Street")}}});
    }
    if (q.find("resource/Moon>") != std::string::npos) return select({"uri"}, json::array());
    if (q.find("VALUES ?s {") != std::string::npos) {
      std::vector<std::string> described;
      for (const auto& [local, _] : labels_) {
        if (q.find("<" + kDbr + local + ">") != std::string::npos) described.push_back(local);
      }
      return spo_for(described);
    }
    // keyword search: every node whose label contains the keyword
    std::vector<std::string> hits;
    for (const auto& [local, label] : labels_) {
      const auto lower = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
      };
      const auto at = q.find("LCASE(\"");
      const auto kw = q.substr(at + 7, q.find('"', at + 7) - at - 7);
      if (lower(label).find(lower(kw)) != std::string::npos) hits.push_back(local);
    }
    return spo_for(hits);
  }
};

http::RetryPolicy fast() {
  http::RetryPolicy p;
  p.base_delay = std::chrono::milliseconds(1);
  p.max_delay = std::chrono::milliseconds(2);
  return p;
}

std::vector<pairs::QaldEntry> sample() {
  std::ifstream in(testsupport::fixture("qald9_sample.json"));
  return pairs::read_qald(in);
}

}  // namespace

TEST_CASE("read_qald keeps English questions with a query") {
  const auto entries = sample();
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].id == "1");
  CHECK(entries[0].question == "Who founded Melbourne?");
  CHECK(entries[0].keywords == std::vector<std::string>{"Melbourne", "founded"});
  CHECK(entries[2].id == "4");
  std::istringstream bad("{\"questions\": 3}");
  CHECK_THROWS_AS(pairs::read_qald(bad), Error);
}

TEST_CASE("building QALD records against a scripted endpoint") {
  QaldEndpoint server;
  const sparql::Client client(server.endpoint(), fast());
  const auto filter = kg::RelationFilter::defaults();
  pairs::QaldStats st;
  const auto recs = pairs::build_qald9_dataset(sample(), client, filter, {}, 7, &st);
  CHECK(st.questions == 3);
  CHECK(st.skipped_empty == 1);
  CHECK(st.endpoint_errors == 0);
  CHECK(st.positives == 2);
  // Melbourne and the cricket ground match a keyword of question 1; the
  // founders are gold answers. Question 2 finds only its own answer.
  CHECK(st.negatives == 2);

  std::map<std::string, std::set<std::string>> negatives;
  for (const auto& r : recs) {
    if (r.label == pairs::Label::negative) negatives[r.question_id].insert(r.subjects.at(0));
    if (r.label == pairs::Label::positive && r.question_id == "1") {
      CHECK(r.subjects == std::vector<std::string>{kDbr + "John_Batman", kDbr + "John_Pascoe_Fawkner"});
      CHECK(oracle::read_rdfxml(r.kg_doc).size() == 2);
    }
  }
  CHECK(negatives["1"] == std::set<std::string>{kDbr + "Melbourne", kDbr + "Melbourne_Cricket_Ground"});
  CHECK(negatives["2"].empty());

  pairs::QaldOptions per_node;
  per_node.mode = pairs::PositiveMode::per_node;
  per_node.max_negatives = 1;
  const auto split = pairs::build_qald9_dataset(sample(), client, filter, per_node, 7, &st);
  CHECK(st.positives == 3);
  CHECK(st.negatives == 1);
  CHECK(split.size() == 4);

  std::ostringstream out;
  pairs::write_ndjson(out, recs);
  std::istringstream lines(out.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = json::parse(line);
    CHECK(j.at("dataset") == "qald9_rdf");
    ++n;
  }
  CHECK(n == recs.size());
}

TEST_CASE("endpoint failures are counted, or thrown in strict mode") {
  QaldEndpoint server;
  server.fail_founder = true;
  const sparql::Client client(server.endpoint(), fast());
  pairs::QaldStats st;
  const auto recs = pairs::build_qald9_dataset(sample(), client, kg::RelationFilter::defaults(), {}, 7, &st);
  CHECK(st.endpoint_errors == 1);
  CHECK(st.positives == 1);
  pairs::QaldOptions strict;
  strict.strict = true;
  try {
    pairs::build_qald9_dataset(sample(), client, kg::RelationFilter::defaults(), strict, 7);
    FAIL("expected EndpointError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EndpointError);
  }
}
