#include "placeorigin/encoder.hpp"

#include <cctype>
#include <cmath>

#include <json.hpp>

#include "placeorigin/error.hpp"
#include "placeorigin/hashing.hpp"
#include "placeorigin/kernels/kernels.hpp"
#include "placeorigin/rng.hpp"
#include "placeorigin/text.hpp"

namespace placeorigin::enc {

using nlohmann::json;

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<TokenSpan> whitespace_spans(std::string_view text) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) break;
    const std::size_t begin = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    out.push_back({begin, i});
  }
  return out;
}

}  // namespace

TokenMatrix Encoder::encode(std::string_view text) const {
  auto out = encode_batch({std::string(text)});
  if (out.size() != 1) throw Error(ErrorCode::EncoderFailure, "encoder returned no matrix");
  return std::move(out.front());
}

Truncated truncate_tokens(const Encoder& encoder, std::string_view text, std::size_t max_tokens) {
  const auto spans = encoder.tokenize(text);
  Truncated out;
  if (spans.size() <= max_tokens) {
    out.text = std::string(text);
    out.token_count = spans.size();
    return out;
  }
  out.truncated = true;
  out.token_count = max_tokens;
  out.text = max_tokens == 0 ? std::string() : std::string(text.substr(0, spans[max_tokens - 1].end));
  return out;
}

void normalize_rows(TokenMatrix& m) {
  const auto& k = kernels::active();
  for (std::size_t r = 0; r < m.rows; ++r) {
    float* row = m.data.data() + r * m.dim;
    const double norm = std::sqrt(k.dot(row, row, m.dim));
    if (norm == 0.0) continue;
    for (std::size_t c = 0; c < m.dim; ++c) row[c] = static_cast<float>(row[c] / norm);
  }
}

std::vector<float> mean_pool(const TokenMatrix& m) {
  std::vector<double> acc(m.dim, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.dim; ++c) acc[c] += m.data[r * m.dim + c];
  }
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<float> out(m.dim, 0.0f);
  if (norm > 0.0) {
    for (std::size_t c = 0; c < m.dim; ++c) out[c] = static_cast<float>(acc[c] / norm);
  }
  return out;
}

TestEncoder::TestEncoder(std::size_t dim, std::size_t max_length, std::uint64_t seed)
    : dim_(dim), max_length_(max_length), seed_(seed) {
  if (dim < 2) throw Error(ErrorCode::InvalidArgument, "test encoder needs dim >= 2");
  if (max_length == 0) throw Error(ErrorCode::InvalidArgument, "max_length must be positive");
}

std::vector<TokenSpan> TestEncoder::tokenize(std::string_view text) const {
  return whitespace_spans(text);
}

std::string TestEncoder::normalize_token(std::string_view token) {
  std::size_t b = 0, e = token.size();
  auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (b < e && punct(token[b])) ++b;
  while (e > b && punct(token[e - 1])) --e;
  return text::to_lower(b == e ? token : token.substr(b, e - b));
}

std::vector<float> TestEncoder::token_vector(std::string_view normalized) const {
  Rng rng(splitmix64(fnv1a64(normalized) ^ splitmix64(seed_)));
  std::vector<double> v(dim_);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  std::vector<float> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

std::vector<TokenMatrix> TestEncoder::encode_batch(const std::vector<std::string>& texts) const {
  std::vector<TokenMatrix> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto spans = whitespace_spans(t);
    if (spans.size() > max_length_) spans.resize(max_length_);
    TokenMatrix m;
    m.rows = spans.size();
    m.dim = dim_;
    m.data.reserve(m.rows * dim_);
    for (const auto& s : spans) {
      const auto v = token_vector(normalize_token(std::string_view(t).substr(s.begin, s.end - s.begin)));
      m.data.insert(m.data.end(), v.begin(), v.end());
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::string TestEncoder::fingerprint() const {
  return "test-encoder;dim=" + std::to_string(dim_) + ";max_length=" + std::to_string(max_length_) +
         ";seed=" + std::to_string(seed_);
}

HttpEncoder::HttpEncoder(std::string base_url, std::size_t dim, std::size_t max_length,
                         http::RetryPolicy policy, std::shared_ptr<http::RateLimiter> limiter,
                         std::size_t batch_size)
    : base_url_(std::move(base_url)),
      dim_(dim),
      max_length_(max_length),
      batch_size_(batch_size == 0 ? 1 : batch_size),
      client_(base_url_, policy, std::move(limiter)) {
  if (dim == 0 || max_length == 0) {
    throw Error(ErrorCode::InvalidArgument, "encoder dim and max_length must be positive");
  }
}

std::vector<TokenSpan> HttpEncoder::tokenize(std::string_view text) const {
  const json req = {{"texts", json::array({std::string(text)})}};
  http::Response res;
  try {
    res = client_.post(req.dump(), "application/json", {}, "/tokenize");
  } catch (const Error& e) {
    throw Error(ErrorCode::EncoderFailure, e.what());
  }
  std::vector<TokenSpan> out;
  try {
    const auto doc = json::parse(res.body);
    for (const auto& span : doc.at("tokens").at(0)) {
      TokenSpan s{span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
      if (s.begin > s.end || s.end > text.size()) {
        throw Error(ErrorCode::EncoderFailure, "token span outside the text");
      }
      out.push_back(s);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::EncoderFailure, std::string("malformed tokenize response: ") + e.what());
  }
  return out;
}

std::vector<TokenMatrix> HttpEncoder::encode_batch(const std::vector<std::string>& texts) const {
  std::vector<TokenMatrix> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    const auto stop = std::min(texts.size(), start + batch_size_);
    json req = {{"texts", json::array()}};
    for (std::size_t i = start; i < stop; ++i) req["texts"].push_back(texts[i]);
    http::Response res;
    try {
      res = client_.post(req.dump(), "application/json", {}, "/encode");
    } catch (const Error& e) {
      throw Error(ErrorCode::EncoderFailure, e.what());
    }
    json doc;
    try {
      doc = json::parse(res.body);
      const auto& mats = doc.at("matrices");
      if (mats.size() != stop - start) {
        throw Error(ErrorCode::EncoderFailure, "encoder returned " + std::to_string(mats.size()) +
                                                   " matrices for " +
                                                   std::to_string(stop - start) + " texts");
      }
      for (const auto& mat : mats) {
        TokenMatrix m;
        m.dim = dim_;
        m.rows = std::min<std::size_t>(mat.size(), max_length_);
        m.data.reserve(m.rows * dim_);
        for (std::size_t r = 0; r < m.rows; ++r) {
          if (mat[r].size() != dim_) {
            throw Error(ErrorCode::DimensionMismatch,
                        "encoder row has width " + std::to_string(mat[r].size()) + ", expected " +
                            std::to_string(dim_));
          }
          for (const auto& x : mat[r]) m.data.push_back(x.get<float>());
        }
        normalize_rows(m);
        out.push_back(std::move(m));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::EncoderFailure, std::string("malformed encode response: ") + e.what());
    }
  }
  return out;
}

std::string HttpEncoder::fingerprint() const {
  return "http-encoder;url=" + base_url_ + ";dim=" + std::to_string(dim_) +
         ";max_length=" + std::to_string(max_length_);
}

}  // namespace placeorigin::enc
