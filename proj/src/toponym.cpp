#include "placeorigin/toponym.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "placeorigin/error.hpp"
#include "placeorigin/text.hpp"

namespace placeorigin {

std::string_view to_string(OriginKind kind) noexcept {
  switch (kind) {
    case OriginKind::named_person: return "named_person";
    case OriginKind::unnamed_person: return "unnamed_person";
    case OriginKind::non_person: return "non_person";
    case OriginKind::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<OriginKind> parse_origin_kind(std::string_view s) {
  static constexpr std::array kinds{OriginKind::named_person,
                                    OriginKind::unnamed_person,
                                    OriginKind::non_person, OriginKind::unknown};
  const auto t = text::trim(s);
  for (auto k : kinds) {
    if (text::iequals(t, to_string(k))) return k;
  }
  return std::nullopt;
}

RootVocabulary RootVocabulary::defaults() {
  return RootVocabulary{
      {"Little", "Upper", "Lower", "Old", "New"},
      {"Street", "Road", "Lane", "Alley", "Place", "Walk", "Court", "Avenue",
       "Way", "Parade", "Square", "Terrace"}};
}

std::string extract_root(std::string_view raw_name,
                         std::span<const std::string> prefixes,
                         std::span<const std::string> street_types) {
  auto words = text::split_ws(raw_name);
  if (words.empty()) throw Error(ErrorCode::EmptyRoot, "blank place name");

  std::size_t first = 0;
  std::size_t last = words.size();  // one past

  auto strip_type = [&]() {
    for (const auto& type : street_types) {
      const auto type_words = text::split_ws(type);
      if (type_words.empty() || type_words.size() > last - first) continue;
      const std::size_t offset = last - type_words.size();
      bool match = true;
      for (std::size_t i = 0; i < type_words.size(); ++i) {
        if (!text::iequals(words[offset + i], type_words[i])) {
          match = false;
          break;
        }
      }
      if (match) {
        last = offset;
        return true;
      }
    }
    return false;
  };
  auto strip_prefix = [&]() {
    if (first == last) return false;
    for (const auto& p : prefixes) {
      if (text::iequals(words[first], text::trim(p))) {
        ++first;
        return true;
      }
    }
    return false;
  };

  while (first < last && strip_type()) {
  }
  while (first < last && strip_prefix()) {
  }
  // A trailing type can surface only when the whole remainder was prefixes,
  // which already emptied the range; no second pass needed.
  if (first >= last) {
    throw Error(ErrorCode::EmptyRoot,
                "nothing left of '" + std::string(raw_name) + "'");
  }
  const char* begin = words[first].data();
  const char* end = words[last - 1].data() + words[last - 1].size();
  return std::string(begin, end);
}

AnchorQuestion build_anchor_question(const Toponym& t) {
  const auto name = text::trim(t.raw_name);
  const auto city = text::trim(t.city);
  const auto country = text::trim(t.country);
  if (name.empty()) throw Error(ErrorCode::MissingContext, "place name is blank");
  if (city.empty()) throw Error(ErrorCode::MissingContext, "city is blank");
  if (country.empty()) throw Error(ErrorCode::MissingContext, "country is blank");

  AnchorQuestion q;
  q.text.reserve(96 + name.size() + city.size() + country.size());
  q.text.append("Who is ").append(name).append(" most likely named after, in ");
  q.text.append(city).append(", ").append(country);
  q.text.append("? If it is not a person, find any other origin.");
  q.toponym_ref = std::string(name) + ", " + std::string(city) + ", " +
                  std::string(country);
  return q;
}

std::vector<TableRow> read_table(std::istream& in, Delimiter delimiter) {
  std::vector<TableRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first_line = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (first_line) {
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      first_line = false;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    TableRow row;
    row.line = line_no;

    if (delimiter == Delimiter::tab) {
      if (line.empty()) continue;
      for (auto f : text::split(line, '\t')) row.fields.emplace_back(f);
      rows.push_back(std::move(row));
      continue;
    }

    if (line.empty()) continue;
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    for (;;) {
      if (i == line.size()) {
        if (quoted) {
          // Quoted field spans a newline.
          std::string next;
          if (!std::getline(in, next)) {
            throw RowError(row.line, "unterminated quoted field");
          }
          ++line_no;
          if (!next.empty() && next.back() == '\r') next.pop_back();
          field.push_back('\n');
          line = std::move(next);
          i = 0;
          continue;
        }
        row.fields.push_back(std::move(field));
        break;
      }
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          quoted = false;
          ++i;
          continue;
        }
        field.push_back(c);
        ++i;
        continue;
      }
      if (c == '"' && field.empty()) {
        quoted = true;
        ++i;
      } else if (c == ',') {
        row.fields.push_back(std::move(field));
        field.clear();
        ++i;
      } else {
        field.push_back(c);
        ++i;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<GazetteerEntry> load_gazetteer(std::istream& in,
                                           Delimiter delimiter,
                                           const RootVocabulary& vocab) {
  const auto rows = read_table(in, delimiter);
  if (rows.empty()) {
    throw Error(ErrorCode::MalformedRow, "missing header row");
  }

  static constexpr std::array kKnown{"name",    "type",        "city",
                                     "state",   "country",     "origin_text",
                                     "origin_kind"};
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
    const auto key = text::to_lower(text::trim(rows[0].fields[i]));
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw RowError(rows[0].line, "unknown column '" + key + "'");
    }
    if (!col.emplace(key, i).second) {
      throw RowError(rows[0].line, "duplicate column '" + key + "'");
    }
  }
  for (const char* required : {"name", "city", "country"}) {
    if (!col.contains(required)) {
      throw RowError(rows[0].line,
                     std::string("header lacks column '") + required + "'");
    }
  }
  const std::size_t width = rows[0].fields.size();

  std::vector<GazetteerEntry> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() > width) {
      throw RowError(row.line, "expected at most " + std::to_string(width) +
                                   " fields, got " +
                                   std::to_string(row.fields.size()));
    }
    auto get = [&](const char* name) -> std::string {
      const auto it = col.find(name);
      if (it == col.end() || it->second >= row.fields.size()) return {};
      return std::string(text::trim(row.fields[it->second]));
    };

    GazetteerEntry e;
    e.toponym.raw_name = get("name");
    e.toponym.feature_type = get("type");
    e.toponym.city = get("city");
    e.toponym.state = get("state");
    e.toponym.country = get("country");
    if (e.toponym.raw_name.empty()) throw RowError(row.line, "empty name");

    std::vector<std::string> row_types;
    if (!e.toponym.feature_type.empty()) row_types.push_back(e.toponym.feature_type);
    try {
      e.toponym.root_name =
          extract_root(e.toponym.raw_name, vocab.prefixes,
                       row_types.empty() ? std::span<const std::string>(vocab.street_types)
                                         : std::span<const std::string>(row_types));
    } catch (const Error& err) {
      throw RowError(row.line, err.what());
    }

    const auto origin = get("origin_text");
    const auto kind_text = get("origin_kind");
    std::optional<OriginKind> kind;
    if (!kind_text.empty()) {
      kind = parse_origin_kind(kind_text);
      if (!kind) throw RowError(row.line, "unknown origin_kind '" + kind_text + "'");
    }
    if (origin.empty()) {
      if (kind && *kind != OriginKind::unknown) {
        throw RowError(row.line, "origin_kind given without origin_text");
      }
      e.origin_kind = OriginKind::unknown;
    } else {
      if (!kind || *kind == OriginKind::unknown) {
        throw RowError(row.line, "origin_text requires a known origin_kind");
      }
      e.origin_text = origin;
      e.origin_kind = *kind;
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace placeorigin
