#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace placeorigin::rdf {

inline constexpr std::string_view kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfsNs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kXsdNs = "http://www.w3.org/2001/XMLSchema#";

enum class TermKind { iri, literal, blank };

/// Subjects are IRIs or blank nodes ("_:label"); objects additionally may be
/// literals. `object_lang` is only ever set on literals.
struct Triple {
  std::string subject;
  std::string predicate;
  TermKind object_kind = TermKind::iri;
  std::string object;
  std::optional<std::string> object_lang;
  std::optional<std::string> object_datatype;

  bool subject_is_blank() const { return subject.starts_with("_:"); }

  auto operator<=>(const Triple&) const = default;
  bool operator==(const Triple&) const = default;
};

/// Bijective prefix <-> namespace table.
class PrefixMap {
 public:
  PrefixMap() = default;

  /// rdf, rdfs, xsd, owl, foaf, geo, georss, dct, dbo, dbp, dbr.
  static PrefixMap defaults();

  /// Throws Error(InvalidArgument) when the prefix or the namespace is
  /// already bound to something else. Re-adding an identical pair is a no-op.
  void add(std::string prefix, std::string ns);

  std::optional<std::string> namespace_of(std::string_view prefix) const;
  std::optional<std::string> prefix_of(std::string_view ns) const;
  bool has_prefix(std::string_view prefix) const;

  /// Longest registered namespace that is a proper prefix of `iri`.
  std::optional<std::pair<std::string, std::string>> longest_match(std::string_view iri) const;

  const std::map<std::string, std::string, std::less<>>& entries() const {
    return by_prefix_;
  }

  /// "prefix:local" when a namespace matches, the IRI itself otherwise.
  std::string compact(std::string_view iri) const;

 private:
  std::map<std::string, std::string, std::less<>> by_prefix_;
  std::map<std::string, std::string, std::less<>> by_ns_;
};

/// Canonical order used everywhere: subject, then predicate, then object.
void sort_unique(std::vector<Triple>& triples);

/// Compaction plan for one document: the prefix table actually used,
/// including generated ns<N> prefixes for namespaces `pm` does not cover.
class Compactor {
 public:
  Compactor(const std::vector<Triple>& triples, const PrefixMap& pm);

  /// Element name for a predicate ("dbo:abstract").
  const std::string& predicate_qname(const std::string& iri) const;
  /// Attribute form for a node IRI ("&dbr;John_Batman"), already escaped.
  std::string attribute_iri(std::string_view iri) const;

  /// Prefixes declared as xmlns (element names) and as DTD entities
  /// (attribute values).
  const std::map<std::string, std::string>& element_namespaces() const { return xmlns_; }
  const std::map<std::string, std::string>& entity_namespaces() const { return entities_; }

 private:
  std::string assign(std::string_view ns);

  PrefixMap pm_;
  int generated_ = 0;
  std::map<std::string, std::string> qnames_;
  std::map<std::string, std::string> xmlns_;
  std::map<std::string, std::string> entities_;
};

/// RDF/XML with every IRI in prefixed form: predicates as qualified element
/// names, node IRIs through DTD entities. Triples are emitted in canonical
/// order, one rdf:Description per subject; output is byte-deterministic.
std::string compact_and_serialize(std::vector<Triple> triples, const PrefixMap& pm);

struct SubjectFragment {
  std::string subject;
  std::string text;  ///< the subject's rdf:Description element
  std::vector<Triple> triples;
};

/// The per-subject rdf:Description blocks exactly as they appear inside
/// compact_and_serialize's output, in the same order.
std::vector<SubjectFragment> subject_fragments(std::vector<Triple> triples,
                                               const PrefixMap& pm);

/// Parses RDF/XML: node elements (rdf:Description or typed), rdf:about /
/// rdf:nodeID, property attributes, property elements with rdf:resource,
/// rdf:nodeID, rdf:datatype, nested node elements and literals, with
/// xml:lang inheritance. Result is in canonical order. Throws
/// Error(ParseError).
std::vector<Triple> parse_rdfxml(std::string_view document);

}  // namespace placeorigin::rdf
