#pragma once

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace placeorigin {

struct Toponym {
  std::string raw_name;
  std::string root_name;
  std::string feature_type;
  std::string city;
  std::string state;
  std::string country;
};

enum class OriginKind { named_person, unnamed_person, non_person, unknown };

std::string_view to_string(OriginKind kind) noexcept;
std::optional<OriginKind> parse_origin_kind(std::string_view s);

struct GazetteerEntry {
  Toponym toponym;
  std::optional<std::string> origin_text;
  OriginKind origin_kind = OriginKind::unknown;
};

struct AnchorQuestion {
  std::string text;
  std::string toponym_ref;
};

/// Word lists stripped from raw names. Matching is case-insensitive; a
/// street type may span several words ("Street North").
struct RootVocabulary {
  std::vector<std::string> prefixes;
  std::vector<std::string> street_types;

  static RootVocabulary defaults();
};

/// Strips every leading prefix word and every trailing street-type phrase.
/// Retained words keep their original casing and spacing. Throws
/// Error(EmptyRoot) when nothing is left.
std::string extract_root(std::string_view raw_name,
                         std::span<const std::string> prefixes,
                         std::span<const std::string> street_types);

/// Throws Error(MissingContext) when the name, city or country is blank.
AnchorQuestion build_anchor_question(const Toponym& t);

enum class Delimiter { comma, tab };

/// Reads a gazetteer table with a header row. Recognised columns: name, type,
/// city, state, country, origin_text, origin_kind; name, city and country are
/// required. Row order is preserved and homonyms are kept. When a row has a
/// non-empty type, that type is the only street type stripped for the row;
/// otherwise the vocabulary's list is used.
std::vector<GazetteerEntry> load_gazetteer(
    std::istream& in, Delimiter delimiter,
    const RootVocabulary& vocab = RootVocabulary::defaults());

/// Splits one delimited table into rows of fields. Comma tables follow
/// RFC 4180 quoting; tab tables are split verbatim. Line numbers of each row's
/// first physical line are returned alongside.
struct TableRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};
std::vector<TableRow> read_table(std::istream& in, Delimiter delimiter);

}  // namespace placeorigin
