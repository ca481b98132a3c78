#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "placeorigin/kg_search.hpp"
#include "placeorigin/pairs.hpp"
#include "placeorigin/sparql.hpp"

namespace placeorigin::pairs {

struct QaldEntry {
  std::string id;
  std::string question;  ///< English string
  std::string sparql;
  std::vector<std::string> keywords;
};

/// Reads the QALD JSON layout ({"questions": [{"id", "question": [{"language",
/// "string", "keywords"}], "query": {"sparql"}}]}). Entries without an
/// English question or a query are skipped. Throws Error(ParseError).
std::vector<QaldEntry> read_qald(std::istream& in);

struct Qald9Record {
  std::string question_id;
  std::string question;
  std::string sparql;
  std::vector<std::string> keywords;
  std::string kg_doc;                 ///< RDF/XML
  std::vector<std::string> subjects;  ///< nodes the document describes
  Label label = Label::positive;
};

enum class PositiveMode {
  joint,     ///< one positive holding the whole result set's sub-graph
  per_node,  ///< one positive per result node
};

struct QaldOptions {
  PositiveMode mode = PositiveMode::joint;
  std::size_t max_positive_nodes = 50;  ///< result nodes described per question
  std::size_t max_negatives = 100;      ///< per question
  std::size_t triples_per_node = 200;
  /// Throw Error(EndpointError) on the first failed request instead of
  /// skipping the question.
  bool strict = false;
};

struct QaldStats {
  std::size_t questions = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t skipped_empty = 0;
  std::size_t endpoint_errors = 0;
};

/// Runs each gold query, describes its result nodes through the relation
/// filter, and draws negatives among nodes whose name or label contains a
/// keyword but which the gold query does not return.
std::vector<Qald9Record> build_qald9_dataset(const std::vector<QaldEntry>& entries,
                                             const sparql::Client& client,
                                             const kg::RelationFilter& filter,
                                             const QaldOptions& options, std::uint64_t seed,
                                             QaldStats* stats = nullptr);

void write_ndjson(std::ostream& out, const std::vector<Qald9Record>& records);

}  // namespace placeorigin::pairs
