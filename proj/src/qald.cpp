#include "placeorigin/qald.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "placeorigin/error.hpp"
#include "placeorigin/rng.hpp"
#include "placeorigin/text.hpp"

namespace placeorigin::pairs {

using nlohmann::json;

std::vector<QaldEntry> read_qald(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("QALD file: ") + e.what());
  }
  std::vector<QaldEntry> out;
  try {
    for (const auto& q : doc.at("questions")) {
      QaldEntry e;
      e.id = q.at("id").is_string() ? q.at("id").get<std::string>() : q.at("id").dump();
      for (const auto& lang : q.value("question", json::array())) {
        if (lang.value("language", "") != "en") continue;
        e.question = lang.value("string", "");
        const auto keywords = lang.value("keywords", "");
        for (auto kw : text::split(keywords, ',')) {
          kw = text::trim(kw);
          if (!kw.empty()) e.keywords.emplace_back(kw);
        }
      }
      if (q.contains("query") && q["query"].contains("sparql")) {
        e.sparql = q["query"]["sparql"].get<std::string>();
      }
      if (!e.question.empty() && !e.sparql.empty()) out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("QALD layout: ") + e.what());
  }
  return out;
}

namespace {

std::vector<rdf::Triple> to_triples(const sparql::ResultSet& rs) {
  std::vector<rdf::Triple> out;
  for (const auto& row : rs.rows) {
    const auto s = row.find("s"), p = row.find("p"), o = row.find("o");
    if (s == row.end() || p == row.end() || o == row.end()) continue;
    if (s->second.kind != rdf::TermKind::iri || p->second.kind != rdf::TermKind::iri) continue;
    rdf::Triple t{s->second.value, p->second.value, o->second.kind, o->second.value, {}, {}};
    if (t.object_kind == rdf::TermKind::literal) {
      t.object_lang = o->second.lang;
      if (!t.object_lang) t.object_datatype = o->second.datatype;
    }
    if (kg::english_or_untagged(t.object_lang)) out.push_back(std::move(t));
  }
  rdf::sort_unique(out);
  return out;
}

std::string describe_query(const std::vector<std::string>& nodes, const kg::RelationFilter& filter,
                           std::size_t limit) {
  std::ostringstream q;
  q << "SELECT ?s ?p ?o WHERE {\n  VALUES ?s {";
  for (const auto& n : nodes) q << "\n    <" << n << ">";
  q << "\n  }\n  VALUES ?p {";
  for (const auto& p : filter.predicates()) q << "\n    <" << p << ">";
  q << "\n  }\n  ?s ?p ?o .\n"
    << "  FILTER(!isLiteral(?o) || lang(?o) = \"\" || langMatches(lang(?o), \"en\"))\n"
    << "}\nORDER BY ?s ?p ?o\nLIMIT " << limit << "\n";
  return q.str();
}

}  // namespace

std::vector<Qald9Record> build_qald9_dataset(const std::vector<QaldEntry>& entries,
                                             const sparql::Client& client,
                                             const kg::RelationFilter& filter,
                                             const QaldOptions& options, std::uint64_t seed,
                                             QaldStats* stats) {
  QaldStats local;
  auto& st = stats ? *stats : local;
  st = {};
  const auto pm = rdf::PrefixMap::defaults();
  std::vector<Qald9Record> out;

  for (std::size_t qi = 0; qi < entries.size(); ++qi) {
    const auto& e = entries[qi];
    ++st.questions;
    auto base = [&](Label label) {
      Qald9Record r;
      r.question_id = e.id;
      r.question = e.question;
      r.sparql = e.sparql;
      r.keywords = e.keywords;
      r.label = label;
      return r;
    };
    std::vector<Qald9Record> batch;
    try {
      std::set<std::string> result_nodes;
      for (const auto& row : client.select(e.sparql).rows) {
        for (const auto& [_, term] : row) {
          if (term.kind == rdf::TermKind::iri) result_nodes.insert(term.value);
        }
      }
      std::vector<std::string> described(result_nodes.begin(), result_nodes.end());
      if (described.size() > options.max_positive_nodes) described.resize(options.max_positive_nodes);
      std::vector<rdf::Triple> sub;
      if (!described.empty()) {
        sub = to_triples(client.select(
            describe_query(described, filter, described.size() * options.triples_per_node)));
      }
      if (sub.empty()) {
        ++st.skipped_empty;
        continue;
      }

      if (options.mode == PositiveMode::joint) {
        auto r = base(Label::positive);
        r.kg_doc = rdf::compact_and_serialize(sub, pm);
        std::set<std::string> subjects;
        for (const auto& t : sub) subjects.insert(t.subject);
        r.subjects.assign(subjects.begin(), subjects.end());
        batch.push_back(std::move(r));
      } else {
        std::map<std::string, std::vector<rdf::Triple>> by_subject;
        for (const auto& t : sub) by_subject[t.subject].push_back(t);
        for (auto& [s, ts] : by_subject) {
          auto r = base(Label::positive);
          r.kg_doc = rdf::compact_and_serialize(std::move(ts), pm);
          r.subjects = {s};
          batch.push_back(std::move(r));
        }
      }

      std::map<std::string, std::vector<rdf::Triple>> pool;
      const kg::SearchLimits limits{
          static_cast<int>(std::max<std::size_t>(1, options.max_negatives * 20)),
          static_cast<int>(std::max<std::size_t>(1, options.max_negatives + result_nodes.size()))};
      for (const auto& kw : e.keywords) {
        const auto res = kg::execute_search(client, kg::build_sparql(kw, filter, limits), kw,
                                            filter, limits);
        for (const auto& t : res.triples) {
          if (!result_nodes.contains(t.subject)) pool[t.subject].push_back(t);
        }
      }
      std::vector<std::string> candidates;
      for (const auto& [s, _] : pool) candidates.push_back(s);
      auto rng = Rng::split(seed, qi);
      const auto picked = sample_without_replacement<std::string>(candidates, options.max_negatives, rng);
      std::vector<std::string> sorted_pick(picked.begin(), picked.end());
      std::sort(sorted_pick.begin(), sorted_pick.end());
      for (const auto& s : sorted_pick) {
        auto r = base(Label::negative);
        r.kg_doc = rdf::compact_and_serialize(pool.at(s), pm);
        r.subjects = {s};
        batch.push_back(std::move(r));
      }
    } catch (const Error& err) {
      if (err.code() != ErrorCode::HttpError && err.code() != ErrorCode::MalformedResponse) throw;
      if (options.strict) {
        throw Error(ErrorCode::EndpointError, "question " + e.id + ": " + err.what());
      }
      ++st.endpoint_errors;
      continue;
    }
    for (auto& r : batch) {
      ++(r.label == Label::positive ? st.positives : st.negatives);
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_ndjson(std::ostream& out, const std::vector<Qald9Record>& records) {
  for (const auto& r : records) {
    const json rec{{"dataset", to_string(Dataset::qald9_rdf)},
                   {"question_id", r.question_id},
                   {"question", r.question},
                   {"sparql", r.sparql},
                   {"keywords", r.keywords},
                   {"label", to_string(r.label)},
                   {"subjects", r.subjects},
                   {"kg_doc", r.kg_doc}};
    out << rec.dump() << '\n';
  }
}

}  // namespace placeorigin::pairs
