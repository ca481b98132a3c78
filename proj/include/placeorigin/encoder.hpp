#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "placeorigin/http.hpp"

namespace placeorigin::enc {

/// Row-major per-token embeddings.
struct TokenMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> data;

  std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  bool operator==(const TokenMatrix&) const = default;
};

/// Byte range of one token in the encoded text.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Token-level text encoder. Implementations must be deterministic and must
/// return unit-norm rows, min(token count, max_length()) of them per text.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t max_length() const = 0;
  virtual std::vector<TokenSpan> tokenize(std::string_view text) const = 0;
  virtual std::vector<TokenMatrix> encode_batch(const std::vector<std::string>& texts) const = 0;
  /// Identifies the backend and its parameters; used in cache keys.
  virtual std::string fingerprint() const = 0;

  TokenMatrix encode(std::string_view text) const;
};

struct Truncated {
  std::string text;
  std::size_t token_count = 0;
  bool truncated = false;
};

/// Cuts `text` right after its `max_tokens`-th token.
Truncated truncate_tokens(const Encoder& encoder, std::string_view text, std::size_t max_tokens);

/// Deterministic stand-in for a neural encoder. Tokens are whitespace
/// separated, lowercased and stripped of surrounding punctuation; each
/// distinct token maps to a fixed pseudo-random unit vector.
class TestEncoder final : public Encoder {
 public:
  /// Throws Error(InvalidArgument) for dim < 2 or max_length == 0.
  explicit TestEncoder(std::size_t dim = 128, std::size_t max_length = 256,
                       std::uint64_t seed = 0);

  std::size_t dim() const override { return dim_; }
  std::size_t max_length() const override { return max_length_; }
  std::vector<TokenSpan> tokenize(std::string_view text) const override;
  std::vector<TokenMatrix> encode_batch(const std::vector<std::string>& texts) const override;
  std::string fingerprint() const override;

  static std::string normalize_token(std::string_view token);
  std::vector<float> token_vector(std::string_view normalized) const;

 private:
  std::size_t dim_;
  std::size_t max_length_;
  std::uint64_t seed_;
};

/// Remote encoder speaking JSON over HTTP:
///   POST <url>/encode   {"texts": [...]} -> {"matrices": [[[f, ...], ...], ...]}
///   POST <url>/tokenize {"texts": [...]} -> {"tokens": [[[begin, end], ...], ...]}
/// Returned rows are re-normalized; a wrong width is a DimensionMismatch.
class HttpEncoder final : public Encoder {
 public:
  HttpEncoder(std::string base_url, std::size_t dim, std::size_t max_length,
              http::RetryPolicy policy = {}, std::shared_ptr<http::RateLimiter> limiter = nullptr,
              std::size_t batch_size = 32);

  std::size_t dim() const override { return dim_; }
  std::size_t max_length() const override { return max_length_; }
  std::vector<TokenSpan> tokenize(std::string_view text) const override;
  std::vector<TokenMatrix> encode_batch(const std::vector<std::string>& texts) const override;
  std::string fingerprint() const override;

 private:
  std::string base_url_;
  std::size_t dim_;
  std::size_t max_length_;
  std::size_t batch_size_;
  http::Client client_;
};

/// Scales every row to unit length; zero rows are left as they are.
void normalize_rows(TokenMatrix& m);

/// Mean of the rows, then scaled to unit length (zero stays zero).
std::vector<float> mean_pool(const TokenMatrix& m);

}  // namespace placeorigin::enc
