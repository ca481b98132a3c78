#include <doctest.h>

#include <fstream>
#include <sstream>

#include "placeorigin/error.hpp"
#include "placeorigin/rng.hpp"
#include "placeorigin/text.hpp"
#include "placeorigin/toponym.hpp"
#include "support/helpers.hpp"

using namespace placeorigin;

namespace {

std::string root(std::string_view raw) {
  const auto v = RootVocabulary::defaults();
  return extract_root(raw, v.prefixes, v.street_types);
}

}  // namespace

TEST_CASE("extract_root strips prefixes and street types") {
  CHECK(root("Little Bourke Street") == "Bourke");
  CHECK(root("Batman Street") == "Batman");
  CHECK(root("Rainbow Alley") == "Rainbow");
  CHECK(root("little  Lonsdale   STREET") == "Lonsdale");
  CHECK(root("Nancy Adams Place") == "Nancy Adams");
  CHECK(root("Upper Old Mill Lane") == "Mill");
  CHECK_THROWS_AS(root("Little Street"), Error);
  CHECK_THROWS_AS(root("   "), Error);
  try {
    root("Little Street");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyRoot);
  }
}

TEST_CASE("extract_root is idempotent and yields a substring of the raw name") {
  const auto v = RootVocabulary::defaults();
  std::vector<std::string> words = {"Bourke", "Little", "Street", "Lane", "Old", "Swan", "Hill", "Way"};
  for (const auto& w : v.prefixes) words.push_back(w);
  Rng rng(11);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string raw;
    const auto n = 1 + rng.below(5);
    for (std::size_t j = 0; j < n; ++j) raw += (j ? " " : "") + words[rng.below(words.size())];
    std::string r;
    try {
      r = root(raw);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyRoot);
      continue;
    }
    ++checked;
    CHECK(root(r) == r);
    CHECK(raw.find(r) != std::string::npos);
    const auto toks = text::split_ws(r);
    for (const auto& p : v.prefixes) CHECK_FALSE(text::iequals(toks.front(), p));
    for (const auto& t : v.street_types) CHECK_FALSE(text::iequals(toks.back(), t));
  }
  CHECK(checked > 500);
}

TEST_CASE("anchor question follows the template") {
  Toponym t{"Batman Street", "Batman", "Street", "Melbourne", "Victoria", "Australia"};
  const auto q = build_anchor_question(t);
  CHECK(q.text ==
        "Who is Batman Street most likely named after, in Melbourne, Australia? If it is not a "
        "person, find any other origin.");
  CHECK(q.toponym_ref == "Batman Street, Melbourne, Australia");

  Toponym fr{"Avenue Simone Veil", "Simone Veil", "", "Nice", "", "France"};
  CHECK(build_anchor_question(fr).text ==
        "Who is Avenue Simone Veil most likely named after, in Nice, France? If it is not a "
        "person, find any other origin.");

  const std::string bare = "Who is  most likely named after, in , ? If it is not a person, find any other origin.";
  CHECK(build_anchor_question(fr).text.size() <= bare.size() + 18 + 4 + 6);

  Toponym missing{"X Street", "X", "Street", "", "", "Australia"};
  try {
    build_anchor_question(missing);
    FAIL("expected MissingContext");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingContext);
  }
}

TEST_CASE("the 248-row Melbourne fixture loads with its origin breakdown") {
  std::ifstream in(testsupport::fixture("melbourne_gazetteer.csv"));
  const auto entries = load_gazetteer(in, Delimiter::comma);
  REQUIRE(entries.size() == 248);
  std::map<OriginKind, int> by_kind;
  for (const auto& e : entries) {
    ++by_kind[e.origin_kind];
    CHECK(e.origin_text.has_value() == (e.origin_kind != OriginKind::unknown));
    CHECK_FALSE(e.toponym.root_name.empty());
  }
  CHECK(248 - by_kind[OriginKind::unknown] == 230);
  CHECK(by_kind[OriginKind::named_person] == 143);
  CHECK(by_kind[OriginKind::unnamed_person] == 68);
  CHECK(by_kind[OriginKind::non_person] == 19);
}

TEST_CASE("gazetteer edge cases") {
  {
    std::istringstream in("name,type,city,state,country,origin_text,origin_kind\n");
    CHECK(load_gazetteer(in, Delimiter::comma).empty());
  }
  {
    std::istringstream in("name,city,country\nBatman Street,Melbourne,Australia\n");
    const auto e = load_gazetteer(in, Delimiter::comma);
    REQUIRE(e.size() == 1);
    CHECK(e[0].origin_kind == OriginKind::unknown);
    CHECK_FALSE(e[0].origin_text);
    CHECK(e[0].toponym.root_name == "Batman");
  }
  {
    std::istringstream in(
        "name\ttype\tcity\tcountry\nBatman Street\tStreet\tMelbourne\tAustralia\n"
        "Batman Street\tStreet\tMelbourne\tAustralia\n");
    CHECK(load_gazetteer(in, Delimiter::tab).size() == 2);
  }
  {
    std::istringstream in("name,city,country\n\"Smith, Upper Lane\",Melbourne,Australia\n");
    const auto e = load_gazetteer(in, Delimiter::comma);
    CHECK(e[0].toponym.root_name == "Smith, Upper");
  }
  {
    // The row's own type column decides what is stripped.
    std::istringstream in("name,type,city,country\nThe Avenue Walk,Walk,Melbourne,Australia\n");
    CHECK(load_gazetteer(in, Delimiter::comma)[0].toponym.root_name == "The Avenue");
  }
  {
    std::istringstream in("name,city,country\nA Street,Melbourne,Australia,extra\n");
    try {
      load_gazetteer(in, Delimiter::comma);
      FAIL("expected MalformedRow");
    } catch (const RowError& e) {
      CHECK(e.row() == 2);
    }
  }
  {
    std::istringstream in("name,city,country,origin_text,origin_kind\nA Street,M,AU,someone,\n");
    CHECK_THROWS_AS(load_gazetteer(in, Delimiter::comma), RowError);
  }
}
