#include "placeorigin/kg_search.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "placeorigin/clock.hpp"
#include "placeorigin/error.hpp"
#include "placeorigin/hashing.hpp"
#include "placeorigin/text.hpp"

namespace placeorigin::kg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";

constexpr std::string_view kDefaultRelations = R"({
  "abstract": ["http://dbpedia.org/ontology/abstract"],
  "children": ["http://dbpedia.org/ontology/child", "http://dbpedia.org/property/children"],
  "comment": ["http://www.w3.org/2000/01/rdf-schema#comment"],
  "country": ["http://dbpedia.org/ontology/country", "http://dbpedia.org/property/country"],
  "date": ["http://dbpedia.org/ontology/birthDate", "http://dbpedia.org/ontology/deathDate",
           "http://dbpedia.org/ontology/date", "http://dbpedia.org/property/date"],
  "geo": ["http://www.w3.org/2003/01/geo/wgs84_pos#lat", "http://www.w3.org/2003/01/geo/wgs84_pos#long",
          "http://www.georss.org/georss/point", "http://www.w3.org/2003/01/geo/wgs84_pos#geometry"],
  "label": ["http://www.w3.org/2000/01/rdf-schema#label"],
  "location": ["http://dbpedia.org/ontology/location", "http://dbpedia.org/property/location"],
  "occupation": ["http://dbpedia.org/ontology/occupation", "http://dbpedia.org/property/occupation"],
  "parent": ["http://dbpedia.org/ontology/parent", "http://dbpedia.org/property/parents"],
  "place": ["http://dbpedia.org/ontology/birthPlace", "http://dbpedia.org/ontology/deathPlace",
            "http://dbpedia.org/ontology/place", "http://dbpedia.org/property/placeOfBirth"],
  "spouse": ["http://dbpedia.org/ontology/spouse", "http://dbpedia.org/property/spouse"]
})";

bool absolute_iri(std::string_view s) {
  const auto colon = s.find(':');
  return colon != std::string_view::npos && colon > 0 &&
         std::none_of(s.begin(), s.end(), [](char c) {
           return c == ' ' || c == '<' || c == '>' || c == '"';
         });
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  return ss.str();
}

void write_atomically(const fs::path& p, std::string_view data) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

bool label_contains(const rdf::Triple& t, std::string_view needle_lower) {
  return t.predicate == kRdfsLabel && t.object_kind == rdf::TermKind::literal &&
         english_or_untagged(t.object_lang) &&
         text::to_lower(t.object).find(needle_lower) != std::string::npos;
}

// Subjects whose name or English label contains the root.
std::set<std::string> matching_subjects(const std::vector<rdf::Triple>& triples,
                                        std::string_view root_name) {
  const auto needle = text::to_lower(root_name);
  std::set<std::string> out;
  for (const auto& t : triples) {
    if (t.subject_is_blank()) continue;
    if (name_contains(t.subject, root_name) || label_contains(t, needle)) out.insert(t.subject);
  }
  return out;
}

}  // namespace

RelationFilter RelationFilter::defaults() { return from_json(kDefaultRelations); }

RelationFilter RelationFilter::from_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("relation mapping: ") + e.what());
  }
  if (!doc.is_object() || doc.empty()) {
    throw Error(ErrorCode::ConfigError, "relation mapping must be a non-empty object");
  }
  RelationFilter f;
  for (const auto& [key, uris] : doc.items()) {
    if (!uris.is_array() || uris.empty()) {
      throw Error(ErrorCode::ConfigError, "relation key '" + key + "' maps to no predicate");
    }
    auto& list = f.relations_[key];
    for (const auto& u : uris) {
      if (!u.is_string() || !absolute_iri(u.get<std::string>())) {
        throw Error(ErrorCode::ConfigError, "relation key '" + key + "' has an invalid IRI");
      }
      list.push_back(u.get<std::string>());
    }
  }
  return f;
}

RelationFilter RelationFilter::load(const fs::path& file) { return from_json(read_file(file)); }

RelationFilter RelationFilter::restricted_to(const std::vector<std::string>& keys) const {
  RelationFilter out;
  for (const auto& k : keys) {
    const auto it = relations_.find(k);
    if (it == relations_.end()) throw Error(ErrorCode::ConfigError, "unknown relation key " + k);
    out.relations_.insert(*it);
  }
  if (out.relations_.empty()) throw Error(ErrorCode::ConfigError, "empty relation set");
  return out;
}

std::vector<std::string> RelationFilter::predicates() const {
  std::vector<std::string> out;
  for (const auto& [_, uris] : relations_) out.insert(out.end(), uris.begin(), uris.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<std::string> RelationFilter::key_of(std::string_view predicate) const {
  for (const auto& [key, uris] : relations_) {
    if (std::find(uris.begin(), uris.end(), predicate) != uris.end()) return key;
  }
  return std::nullopt;
}

std::string build_sparql(std::string_view root_name, const RelationFilter& filter,
                         const SearchLimits& limits) {
  const auto name = text::collapse_ws(root_name);
  if (name.empty()) throw Error(ErrorCode::EmptyName, "root name is blank");
  if (limits.k_searcher <= 0 || limits.max_subjects <= 0) {
    throw Error(ErrorCode::InvalidArgument, "search limits must be positive");
  }
  const auto lit = "LCASE(\"" + sparql::escape_string(name) + "\")";

  std::ostringstream q;
  q << "PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n"
    << "SELECT ?s ?p ?o WHERE {\n"
    << "  {\n"
    << "    SELECT DISTINCT ?s WHERE {\n"
    << "      {\n"
    << "        ?s ?anyPredicate ?anyObject .\n"
    << "        FILTER(isIRI(?s) && CONTAINS(LCASE(REPLACE(REPLACE(STR(?s), \"^.*[/#]\", \"\"), "
       "\"_\", \" \")), "
    << lit << "))\n"
    << "      }\n"
    << "      UNION\n"
    << "      {\n"
    << "        ?s rdfs:label ?subjectLabel .\n"
    << "        FILTER(isIRI(?s) && (lang(?subjectLabel) = \"\" || langMatches(lang(?subjectLabel), "
       "\"en\")) && CONTAINS(LCASE(STR(?subjectLabel)), "
    << lit << "))\n"
    << "      }\n"
    << "    }\n"
    << "    ORDER BY ?s\n"
    << "    LIMIT " << limits.max_subjects << "\n"
    << "  }\n"
    << "  VALUES ?p {";
  for (const auto& p : filter.predicates()) q << "\n    <" << p << ">";
  q << "\n  }\n"
    << "  ?s ?p ?o .\n"
    << "  FILTER(!isLiteral(?o) || lang(?o) = \"\" || langMatches(lang(?o), \"en\"))\n"
    << "}\n"
    << "ORDER BY ?s ?p ?o\n"
    << "LIMIT " << limits.k_searcher << "\n";
  return q.str();
}

bool english_or_untagged(const std::optional<std::string>& lang) {
  if (!lang || lang->empty()) return true;
  return text::iequals(*lang, "en") || text::starts_with_icase(*lang, "en-");
}

std::string readable_local_name(std::string_view iri) {
  const auto cut = iri.find_last_of("/#");
  const auto local = cut == std::string_view::npos ? iri : iri.substr(cut + 1);
  return text::replace_all(text::percent_decode(local), "_", " ");
}

bool name_contains(std::string_view subject_iri, std::string_view root_name) {
  return text::icontains(readable_local_name(subject_iri), text::collapse_ws(root_name));
}

SearchResult conform(const sparql::ResultSet& rows, std::string_view root_name,
                     const RelationFilter& filter, const SearchLimits& limits) {
  if (text::collapse_ws(root_name).empty()) throw Error(ErrorCode::EmptyName, "root name is blank");
  const auto preds = filter.predicates();

  SearchResult out;
  out.rows_received = rows.rows.size();
  std::vector<rdf::Triple> candidates;
  for (const auto& row : rows.rows) {
    const auto s = row.find("s"), p = row.find("p"), o = row.find("o");
    if (s == row.end() || p == row.end() || o == row.end()) {
      throw Error(ErrorCode::MalformedResponse, "result row lacks ?s, ?p or ?o");
    }
    rdf::Triple t;
    t.subject = s->second.value;
    t.predicate = p->second.value;
    t.object_kind = o->second.kind;
    t.object = o->second.value;
    if (t.object_kind == rdf::TermKind::literal) {
      t.object_lang = o->second.lang;
      if (!t.object_lang) t.object_datatype = o->second.datatype;
    }
    const bool keep = s->second.kind == rdf::TermKind::iri &&
                      p->second.kind == rdf::TermKind::iri &&
                      std::binary_search(preds.begin(), preds.end(), t.predicate) &&
                      english_or_untagged(t.object_lang);
    if (keep) candidates.push_back(std::move(t));
  }
  const auto subjects = matching_subjects(candidates, root_name);
  std::erase_if(candidates, [&](const rdf::Triple& t) { return !subjects.contains(t.subject); });
  rdf::sort_unique(candidates);
  out.rows_rejected = out.rows_received - candidates.size();

  std::set<std::string> kept_subjects;
  for (auto& t : candidates) {
    if (!kept_subjects.contains(t.subject)) {
      if (kept_subjects.size() >= static_cast<std::size_t>(limits.max_subjects)) {
        out.truncated = true;
        break;
      }
      kept_subjects.insert(t.subject);
    }
    if (out.triples.size() >= static_cast<std::size_t>(limits.k_searcher)) {
      out.truncated = true;
      break;
    }
    out.triples.push_back(std::move(t));
  }
  std::set<std::string> final_subjects;
  for (const auto& t : out.triples) final_subjects.insert(t.subject);
  out.subject_count = final_subjects.size();
  if (rows.rows.size() >= static_cast<std::size_t>(limits.k_searcher)) out.truncated = true;
  return out;
}

SearchResult execute_search(const sparql::Client& client, std::string_view query,
                            std::string_view root_name, const RelationFilter& filter,
                            const SearchLimits& limits) {
  const auto rows = client.select(query);
  auto out = conform(rows, root_name, filter, limits);
  out.retries = rows.retries;
  return out;
}

KGSnapshot fetch_snapshot(const sparql::Client& client, std::string_view root_name,
                          const RelationFilter& filter, const SearchLimits& limits) {
  const auto query = build_sparql(root_name, filter, limits);
  auto res = execute_search(client, query, root_name, filter, limits);
  KGSnapshot s;
  s.root_name = std::string(root_name);
  s.triples = std::move(res.triples);
  s.subject_count = res.subject_count;
  s.retrieved_at = utc_timestamp();
  s.endpoint = client.endpoint();
  s.truncated = res.truncated;
  return s;
}

fs::path snapshot_rdf_path(const fs::path& dir, std::string_view root_name) {
  return dir / (text::filename_safe(root_name) + ".rdf");
}

fs::path snapshot_meta_path(const fs::path& dir, std::string_view root_name) {
  return dir / (text::filename_safe(root_name) + ".meta");
}

void cache_snapshot(const KGSnapshot& s, const fs::path& dir, const rdf::PrefixMap& pm) {
  static std::mutex writer;
  const auto document = rdf::compact_and_serialize(s.triples, pm);
  const json meta = {
      {"root_name", s.root_name},         {"subject_count", s.subject_count},
      {"triple_count", s.triples.size()}, {"retrieved_at", s.retrieved_at},
      {"endpoint", s.endpoint},           {"truncated", s.truncated},
      {"sha256", sha256_hex(document)},
  };
  std::lock_guard lock(writer);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_atomically(snapshot_rdf_path(dir, s.root_name), document);
  write_atomically(snapshot_meta_path(dir, s.root_name), meta.dump(2) + "\n");
}

std::optional<KGSnapshot> load_snapshot(std::string_view root_name, const fs::path& dir) {
  const auto meta_path = snapshot_meta_path(dir, root_name);
  if (!fs::exists(meta_path)) return std::nullopt;
  json meta;
  try {
    meta = json::parse(read_file(meta_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptSnapshot, meta_path.string() + ": " + e.what());
  }
  const auto rdf_path = snapshot_rdf_path(dir, root_name);
  if (!fs::exists(rdf_path)) {
    throw Error(ErrorCode::CorruptSnapshot, rdf_path.string() + " is missing");
  }
  const auto document = read_file(rdf_path);
  KGSnapshot s;
  try {
    if (meta.at("sha256").get<std::string>() != sha256_hex(document)) {
      throw Error(ErrorCode::CorruptSnapshot, "checksum mismatch for " + rdf_path.string());
    }
    s.root_name = meta.at("root_name").get<std::string>();
    s.subject_count = meta.at("subject_count").get<std::size_t>();
    s.retrieved_at = meta.at("retrieved_at").get<std::string>();
    s.endpoint = meta.at("endpoint").get<std::string>();
    s.truncated = meta.value("truncated", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptSnapshot, meta_path.string() + ": " + e.what());
  }
  try {
    s.triples = rdf::parse_rdfxml(document);
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptSnapshot, rdf_path.string() + ": " + e.what());
  }
  return s;
}

std::vector<std::string> audit_snapshot(const KGSnapshot& s, const RelationFilter& filter,
                                        const SearchLimits& limits) {
  std::vector<std::string> issues;
  if (s.triples.size() > static_cast<std::size_t>(limits.k_searcher)) {
    issues.push_back("triple count " + std::to_string(s.triples.size()) + " exceeds k_searcher");
  }
  std::set<std::string> subjects;
  for (const auto& t : s.triples) subjects.insert(t.subject);
  if (subjects.size() > static_cast<std::size_t>(limits.max_subjects)) {
    issues.push_back("subject count " + std::to_string(subjects.size()) + " exceeds max_subjects");
  }
  const auto matching = matching_subjects(s.triples, s.root_name);
  for (const auto& t : s.triples) {
    const auto where = t.subject + " " + t.predicate;
    if (!matching.contains(t.subject)) issues.push_back(where + ": subject does not contain root");
    if (!filter.key_of(t.predicate)) issues.push_back(where + ": predicate outside relation set");
    if (!english_or_untagged(t.object_lang)) issues.push_back(where + ": non-English literal");
    if (t.object_lang && t.object_kind != rdf::TermKind::literal) {
      issues.push_back(where + ": language tag on a non-literal");
    }
  }
  return issues;
}

}  // namespace placeorigin::kg
