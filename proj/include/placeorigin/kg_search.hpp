#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "placeorigin/rdf.hpp"
#include "placeorigin/sparql.hpp"

namespace placeorigin::kg {

/// Relation keys and the predicate IRIs each key stands for.
class RelationFilter {
 public:
  /// The twelve default keys with the mapping shipped in config/relations.json.
  static RelationFilter defaults();
  /// {"key": ["iri", ...], ...}. Throws Error(ConfigError) on an empty key
  /// list or a relative IRI.
  static RelationFilter from_json(std::string_view json_text);
  static RelationFilter load(const std::filesystem::path& file);

  /// Keeps only the listed keys. Throws Error(ConfigError) on unknown keys.
  RelationFilter restricted_to(const std::vector<std::string>& keys) const;

  const std::map<std::string, std::vector<std::string>>& relations() const { return relations_; }
  /// Every predicate IRI, sorted and deduplicated.
  std::vector<std::string> predicates() const;
  std::optional<std::string> key_of(std::string_view predicate) const;

 private:
  std::map<std::string, std::vector<std::string>> relations_;
};

struct SearchLimits {
  int k_searcher = 10000;
  int max_subjects = 1000;
};

/// SELECT ?s ?p ?o for subjects whose local name or rdfs:label contains
/// `root_name` (case-insensitive), predicates in `filter`, objects that are
/// not literals or are English/untagged literals. Throws Error(EmptyName) on a
/// blank name and Error(InvalidArgument) on non-positive limits.
std::string build_sparql(std::string_view root_name, const RelationFilter& filter,
                         const SearchLimits& limits);

/// True for untagged literals and tags "en" / "en-*" in any case.
bool english_or_untagged(const std::optional<std::string>& lang);

/// Local name of an IRI with percent escapes decoded and underscores turned
/// into spaces.
std::string readable_local_name(std::string_view iri);

/// Containment test on the subject's readable local name.
bool name_contains(std::string_view subject_iri, std::string_view root_name);

struct SearchResult {
  std::vector<rdf::Triple> triples;  ///< canonical order
  std::size_t subject_count = 0;
  std::size_t rows_received = 0;
  std::size_t rows_rejected = 0;
  bool truncated = false;
  int retries = 0;
};

/// Keeps the rows that satisfy the containment, relation and language rules,
/// then applies the subject and triple limits in canonical order. Rows must
/// bind ?s, ?p and ?o.
SearchResult conform(const sparql::ResultSet& rows, std::string_view root_name,
                     const RelationFilter& filter, const SearchLimits& limits);

/// Runs `query` and passes the rows through conform().
SearchResult execute_search(const sparql::Client& client, std::string_view query,
                            std::string_view root_name, const RelationFilter& filter,
                            const SearchLimits& limits);

struct KGSnapshot {
  std::string root_name;
  std::vector<rdf::Triple> triples;
  std::size_t subject_count = 0;
  std::string retrieved_at;
  std::string endpoint;
  bool truncated = false;

  bool operator==(const KGSnapshot&) const = default;
};

/// Search + snapshot in one step; retrieved_at follows utc_timestamp().
KGSnapshot fetch_snapshot(const sparql::Client& client, std::string_view root_name,
                          const RelationFilter& filter, const SearchLimits& limits);

std::filesystem::path snapshot_rdf_path(const std::filesystem::path& dir,
                                        std::string_view root_name);
std::filesystem::path snapshot_meta_path(const std::filesystem::path& dir,
                                         std::string_view root_name);

/// Writes <dir>/<name>.rdf and <dir>/<name>.meta atomically. The name is made
/// filename-safe first. Throws Error(IoError).
void cache_snapshot(const KGSnapshot& s, const std::filesystem::path& dir,
                    const rdf::PrefixMap& pm = rdf::PrefixMap::defaults());

/// std::nullopt when no snapshot is cached under that name. Throws
/// Error(CorruptSnapshot) when the stored checksum does not match and
/// Error(IoError) on read failures.
std::optional<KGSnapshot> load_snapshot(std::string_view root_name,
                                        const std::filesystem::path& dir);

/// Violations of the containment / relation / language rules and the limits,
/// one message per offending triple or limit.
std::vector<std::string> audit_snapshot(const KGSnapshot& s, const RelationFilter& filter,
                                        const SearchLimits& limits);

}  // namespace placeorigin::kg
