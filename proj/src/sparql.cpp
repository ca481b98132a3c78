#include "placeorigin/sparql.hpp"

#include <json.hpp>

#include "placeorigin/error.hpp"
#include "placeorigin/text.hpp"
#include "placeorigin/xml.hpp"

namespace placeorigin::sparql {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::MalformedResponse, why);
}

constexpr std::string_view kResultsNs = "http://www.w3.org/2005/sparql-results#";

}  // namespace

ResultSet parse_json_results(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    malformed(std::string("results are not JSON: ") + e.what());
  }
  ResultSet rs;
  try {
    for (const auto& v : doc.at("head").value("vars", json::array())) {
      rs.variables.push_back(v.get<std::string>());
    }
    for (const auto& b : doc.at("results").at("bindings")) {
      Binding row;
      for (const auto& [var, t] : b.items()) {
        Term term;
        const auto type = t.at("type").get<std::string>();
        term.value = t.at("value").get<std::string>();
        if (type == "uri") {
          term.kind = rdf::TermKind::iri;
        } else if (type == "bnode") {
          term.kind = rdf::TermKind::blank;
          if (!term.value.starts_with("_:")) term.value = "_:" + term.value;
        } else if (type == "literal" || type == "typed-literal") {
          term.kind = rdf::TermKind::literal;
          if (t.contains("xml:lang")) term.lang = t.at("xml:lang").get<std::string>();
          if (t.contains("datatype")) term.datatype = t.at("datatype").get<std::string>();
          if (term.lang && term.lang->empty()) term.lang.reset();
        } else {
          malformed("unknown term type " + type);
        }
        row.emplace(var, std::move(term));
      }
      rs.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    malformed(std::string("unexpected results layout: ") + e.what());
  }
  return rs;
}

ResultSet parse_xml_results(std::string_view body) {
  xml::Document doc;
  try {
    doc = xml::parse(body);
  } catch (const Error& e) {
    malformed(e.what());
  }
  const auto scope = xml::NamespaceScope{}.enter(doc.root);
  auto is = [&](const xml::NamespaceScope& s, const xml::Element& e, std::string_view local) {
    const auto iri = s.expand(e.name);
    return iri && *iri == std::string(kResultsNs) + std::string(local);
  };
  if (!is(scope, doc.root, "sparql")) malformed("root element is not sparql");

  ResultSet rs;
  for (const auto& section : doc.root.children) {
    const auto s1 = scope.enter(section);
    if (is(s1, section, "head")) {
      for (const auto& v : section.children) {
        if (const auto* name = v.attribute("name"); name && is(s1.enter(v), v, "variable")) {
          rs.variables.push_back(*name);
        }
      }
    } else if (is(s1, section, "results")) {
      for (const auto& r : section.children) {
        const auto s2 = s1.enter(r);
        if (!is(s2, r, "result")) continue;
        Binding row;
        for (const auto& b : r.children) {
          const auto s3 = s2.enter(b);
          const auto* name = b.attribute("name");
          if (!name || b.children.size() != 1) malformed("bad binding element");
          const auto& v = b.children.front();
          const auto s4 = s3.enter(v);
          Term term;
          term.value = v.text;
          if (is(s4, v, "uri")) {
            term.kind = rdf::TermKind::iri;
          } else if (is(s4, v, "bnode")) {
            term.kind = rdf::TermKind::blank;
            term.value = "_:" + term.value;
          } else if (is(s4, v, "literal")) {
            term.kind = rdf::TermKind::literal;
            if (const auto* l = v.attribute("xml:lang"); l && !l->empty()) term.lang = *l;
            if (const auto* d = v.attribute("datatype")) term.datatype = *d;
          } else {
            malformed("unknown binding value " + v.name);
          }
          row.emplace(*name, std::move(term));
        }
        rs.rows.push_back(std::move(row));
      }
    }
  }
  return rs;
}

ResultSet parse_results(std::string_view body, std::string_view content_type) {
  if (text::icontains(content_type, "json")) return parse_json_results(body);
  if (text::icontains(content_type, "xml")) return parse_xml_results(body);
  const auto t = text::trim(body);
  if (!t.empty() && t.front() == '{') return parse_json_results(body);
  if (!t.empty() && t.front() == '<') return parse_xml_results(body);
  malformed("unrecognised results format '" + std::string(content_type) + "'");
}

std::string escape_string(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

Client::Client(std::string endpoint, http::RetryPolicy policy,
               std::shared_ptr<http::RateLimiter> limiter)
    : endpoint_(std::move(endpoint)), http_(endpoint_, policy, std::move(limiter)) {}

ResultSet Client::select(std::string_view query) const {
  const http::Headers headers{
      {"Accept", "application/sparql-results+json, application/sparql-results+xml;q=0.9"}};
  http::Response res;
  try {
    if (query.size() <= 1500) {
      res = http_.get({{"query", std::string(query)}}, headers);
    } else {
      res = http_.post("query=" + http::url_encode(query),
                       "application/x-www-form-urlencoded", headers);
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::HttpError, e.what());
  }
  auto rs = parse_results(res.body, res.content_type);
  rs.retries = res.retries;
  return rs;
}

}  // namespace placeorigin::sparql
