#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "placeorigin/http.hpp"
#include "placeorigin/rdf.hpp"

namespace placeorigin::sparql {

struct Term {
  rdf::TermKind kind = rdf::TermKind::iri;
  std::string value;
  std::optional<std::string> lang;
  std::optional<std::string> datatype;
};

using Binding = std::map<std::string, Term, std::less<>>;

struct ResultSet {
  std::vector<std::string> variables;
  std::vector<Binding> rows;
  int retries = 0;
};

/// application/sparql-results+json. Throws Error(MalformedResponse).
ResultSet parse_json_results(std::string_view body);
/// application/sparql-results+xml. Throws Error(MalformedResponse).
ResultSet parse_xml_results(std::string_view body);
/// Dispatches on content type, sniffing the body when it is missing.
ResultSet parse_results(std::string_view body, std::string_view content_type);

/// Body of a double-quoted SPARQL string literal (without the quotes).
std::string escape_string(std::string_view s);

/// SPARQL 1.1 Protocol client. Short queries go out as GET, longer ones as
/// form-encoded POST.
class Client {
 public:
  Client(std::string endpoint, http::RetryPolicy policy = {},
         std::shared_ptr<http::RateLimiter> limiter = nullptr);

  ResultSet select(std::string_view query) const;
  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
  http::Client http_;
};

}  // namespace placeorigin::sparql
