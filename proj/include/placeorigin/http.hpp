#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "placeorigin/error.hpp"

namespace placeorigin::http {

/// Non-retryable HTTP status (or the last retryable one once attempts run
/// out), with the response body kept for diagnosis.
class StatusError : public Error {
 public:
  StatusError(int status, std::string body, const std::string& message)
      : Error(ErrorCode::HttpError, message), status_(status), body_(std::move(body)) {}

  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

/// Bounded exponential backoff. Connection failures, 5xx and 429 are
/// retried; other statuses fail immediately.
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{8000};
  std::chrono::milliseconds timeout{60000};
};

/// Enforces a minimum spacing between request starts; shared by every client
/// talking to the same backend.
class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds min_interval) : interval_(min_interval) {}
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::milliseconds interval_;
  std::chrono::steady_clock::time_point next_{};
};

struct Response {
  int status = 0;
  std::string body;
  std::string content_type;
  int retries = 0;
};

struct Url {
  std::string origin;  ///< scheme://host[:port]
  std::string path;    ///< starts with '/'
};

/// Throws Error(InvalidArgument) for anything but http(s)://host[:port][/path].
Url parse_url(std::string_view url);

using Headers = std::multimap<std::string, std::string>;

class Client {
 public:
  Client(std::string_view base_url, RetryPolicy policy = {},
         std::shared_ptr<RateLimiter> limiter = nullptr);

  /// GET base path with a URL-encoded query string.
  Response get(const std::map<std::string, std::string>& params,
               const Headers& headers = {}) const;
  /// POST to base path, or to base path + `subpath` when given.
  Response post(std::string_view body, std::string_view content_type,
                const Headers& headers = {}, std::string_view subpath = {}) const;

  const Url& url() const { return url_; }

 private:
  template <typename Send>
  Response with_retries(Send&& send) const;

  Url url_;
  RetryPolicy policy_;
  std::shared_ptr<RateLimiter> limiter_;
};

std::string url_encode(std::string_view s);

}  // namespace placeorigin::http
