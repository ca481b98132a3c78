#include <doctest.h>

#include <cmath>

#include "placeorigin/encoder.hpp"
#include "placeorigin/error.hpp"
#include "placeorigin/rng.hpp"
#include "support/helpers.hpp"
#include "support/mock_servers.hpp"

using namespace placeorigin;

namespace {

double row_norm(std::span<const float> r) {
  double s = 0;
  for (float x : r) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("test encoder: repeated tokens, empty text, unit rows") {
  const enc::TestEncoder e(32, 256);
  const auto m = e.encode("Batman batman,");
  REQUIRE(m.rows == 2);
  CHECK(m.dim == 32);
  CHECK(std::equal(m.row(0).begin(), m.row(0).end(), m.row(1).begin()));
  CHECK(e.encode("").rows == 0);
  CHECK(e.encode("   \t ").rows == 0);

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto text = testsupport::random_sentence(rng, 1 + i % 40);
    const auto a = e.encode(text);
    CHECK(a == e.encode(text));
    CHECK(a.rows == e.tokenize(text).size());
    for (std::size_t r = 0; r < a.rows; ++r) CHECK(row_norm(a.row(r)) == doctest::Approx(1.0).epsilon(1e-5));
  }
  CHECK(enc::TestEncoder(32, 256, 1).encode("batman") != e.encode("batman"));
  CHECK(e.fingerprint() != enc::TestEncoder(32, 256, 1).fingerprint());
  CHECK_THROWS_AS(enc::TestEncoder(1, 10), Error);
  CHECK_THROWS_AS(enc::TestEncoder(8, 0), Error);
}

TEST_CASE("test encoder caps rows at max_length") {
  const enc::TestEncoder e(16, 5);
  CHECK(e.encode("a b c d e f g h").rows == 5);
  CHECK(e.encode("a b").rows == 2);
}

TEST_CASE("truncate_tokens cuts after the last kept token") {
  const enc::TestEncoder e(16, 512);
  const auto t = enc::truncate_tokens(e, "one two  three four", 2);
  CHECK(t.text == "one two");
  CHECK(t.token_count == 2);
  CHECK(t.truncated);
  const auto whole = enc::truncate_tokens(e, "one two", 5);
  CHECK(whole.text == "one two");
  CHECK(whole.token_count == 2);
  CHECK_FALSE(whole.truncated);
}

TEST_CASE("normalize_rows and mean_pool") {
  enc::TokenMatrix m{2, 2, {3, 4, 0, 0}};
  enc::normalize_rows(m);
  CHECK(m.data[0] == doctest::Approx(0.6));
  CHECK(m.data[1] == doctest::Approx(0.8));
  CHECK(m.data[2] == 0.0f);
  const auto p = enc::mean_pool(enc::TokenMatrix{2, 2, {1, 0, 0, 1}});
  CHECK(p[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(p[1] == doctest::Approx(std::sqrt(0.5)));
  const auto z = enc::mean_pool(enc::TokenMatrix{2, 2, {1, 0, -1, 0}});
  CHECK(z[0] == 0.0f);
  CHECK(z[1] == 0.0f);
}

TEST_CASE("http encoder matches the local encoder it fronts") {
  testsupport::EncoderMock server(24, 64);
  http::RetryPolicy policy;
  policy.base_delay = std::chrono::milliseconds(1);
  const enc::HttpEncoder remote(server.base_url(), 24, 64, policy, nullptr, 3);
  const enc::TestEncoder local(24, 64);
  std::vector<std::string> texts;
  Rng rng(9);
  for (int i = 0; i < 10; ++i) texts.push_back(testsupport::random_sentence(rng, 3 + i));
  texts.push_back("");
  const auto got = remote.encode_batch(texts);
  const auto want = local.encode_batch(texts);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    REQUIRE(got[i].rows == want[i].rows);
    for (std::size_t j = 0; j < got[i].data.size(); ++j) CHECK(got[i].data[j] == doctest::Approx(want[i].data[j]));
  }
  CHECK(server.requests() == 4);
  const auto spans = remote.tokenize("hello  world");
  REQUIRE(spans.size() == 2);
  CHECK(spans[1].begin == 7);
  CHECK(spans[1].end == 12);

  testsupport::EncoderMock wrong(24, 64, 12);
  const enc::HttpEncoder bad(wrong.base_url(), 24, 64, policy);
  try {
    bad.encode("batman");
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}
