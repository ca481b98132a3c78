#include <doctest.h>

#include <set>

#include "placeorigin/error.hpp"
#include "placeorigin/hashing.hpp"
#include "placeorigin/rng.hpp"
#include "placeorigin/text.hpp"

using namespace placeorigin;

TEST_CASE("text helpers") {
  CHECK(text::to_lower("BaTMAN") == "batman");
  CHECK(text::iequals("Melbourne", "MELBOURNE"));
  CHECK_FALSE(text::iequals("Melbourne", "Melbourn"));
  CHECK(text::icontains("John_Batman", "batman"));
  CHECK(text::icontains("anything", ""));
  CHECK(text::trim("  a b \t") == "a b");
  CHECK(text::split("a,,b", ',').size() == 3);
  CHECK(text::split_ws("  one two\tthree ").size() == 3);
  CHECK(text::collapse_ws("  a \n  b  ") == "a b");
  CHECK(text::replace_all("a_b_c", "_", " ") == "a b c");
  CHECK(text::starts_with_icase("Little Bourke", "little"));
  CHECK(text::percent_decode("Batman%27s_Hill") == "Batman's_Hill");
  CHECK(text::percent_decode("100%") == "100%");
  CHECK(text::percent_decode("%zz") == "%zz");
  CHECK(text::filename_safe("Batman's Hill") == "Batman%27s%20Hill");
}

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("rng is deterministic and split streams differ") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  auto s0 = Rng::split(7, 0), s1 = Rng::split(7, 1);
  CHECK(s0.next_u64() != s1.next_u64());

  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.below(13);
    CHECK(v < 13);
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("sampling without replacement draws distinct elements") {
  std::vector<int> pool(50);
  for (int i = 0; i < 50; ++i) pool[i] = i;
  Rng rng(9);
  for (std::size_t n : {0u, 1u, 10u, 50u, 80u}) {
    const auto got = sample_without_replacement<int>(pool, n, rng);
    CHECK(got.size() == std::min<std::size_t>(n, 50));
    CHECK(std::set<int>(got.begin(), got.end()).size() == got.size());
  }
}

TEST_CASE("error messages carry the code name") {
  const Error e(ErrorCode::EmptyRoot, "x");
  CHECK(std::string(e.what()).find("EmptyRoot") != std::string::npos);
  const RowError r(7, "bad");
  CHECK(r.row() == 7);
  CHECK(r.code() == ErrorCode::MalformedRow);
}
