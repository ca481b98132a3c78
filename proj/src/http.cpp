#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "placeorigin/http.hpp"

#include <httplib.h>

#include <algorithm>
#include <thread>

#include "placeorigin/error.hpp"

namespace placeorigin::http {

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point wait_until;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    wait_until = std::max(now, next_);
    next_ = wait_until + interval_;
  }
  std::this_thread::sleep_until(wait_until);
}

Url parse_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "url without scheme: " + std::string(url));
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::InvalidArgument, "unsupported scheme: " + std::string(url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Url out;
  if (path_start == std::string_view::npos) {
    out.origin = std::string(url);
    out.path = "/";
  } else {
    out.origin = std::string(url.substr(0, path_start));
    out.path = std::string(url.substr(path_start));
  }
  if (out.origin.size() <= scheme_end + 3) {
    throw Error(ErrorCode::InvalidArgument, "url without host: " + std::string(url));
  }
  return out;
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

Client::Client(std::string_view base_url, RetryPolicy policy,
               std::shared_ptr<RateLimiter> limiter)
    : url_(parse_url(base_url)), policy_(policy), limiter_(std::move(limiter)) {
  if (policy_.max_attempts < 1) policy_.max_attempts = 1;
}

namespace {

httplib::Headers to_httplib(const Headers& h) {
  return httplib::Headers(h.begin(), h.end());
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

template <typename Send>
Response Client::with_retries(Send&& send) const {
  auto delay = policy_.base_delay;
  std::string last_error;
  for (int attempt = 1;; ++attempt) {
    if (limiter_) limiter_->acquire();
    httplib::Client cli(url_.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(policy_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        policy_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    cli.set_follow_location(true);

    httplib::Result res = send(cli);
    if (res) {
      if (res->status >= 200 && res->status < 300) {
        return Response{res->status, res->body, res->get_header_value("Content-Type"),
                        attempt - 1};
      }
      last_error = "HTTP " + std::to_string(res->status) + " from " + url_.origin + url_.path;
      if (!retryable(res->status)) throw StatusError(res->status, res->body, last_error);
      if (attempt >= policy_.max_attempts) {
        throw StatusError(res->status, res->body,
                          last_error + " after " + std::to_string(attempt) + " attempt(s)");
      }
    } else {
      last_error = httplib::to_string(res.error()) + " for " + url_.origin + url_.path;
      if (attempt >= policy_.max_attempts) {
        throw Error(ErrorCode::HttpError,
                    last_error + " after " + std::to_string(attempt) + " attempt(s)");
      }
    }
    std::this_thread::sleep_for(delay);
    delay = std::min(policy_.max_delay,
                     std::chrono::milliseconds(static_cast<std::int64_t>(
                         static_cast<double>(delay.count()) * policy_.multiplier)));
  }
}

Response Client::get(const std::map<std::string, std::string>& params,
                     const Headers& headers) const {
  std::string target = url_.path;
  char sep = target.find('?') == std::string::npos ? '?' : '&';
  for (const auto& [k, v] : params) {
    target += sep + url_encode(k) + "=" + url_encode(v);
    sep = '&';
  }
  const auto h = to_httplib(headers);
  return with_retries([&](httplib::Client& cli) { return cli.Get(target, h); });
}

Response Client::post(std::string_view body, std::string_view content_type,
                      const Headers& headers, std::string_view subpath) const {
  std::string target = url_.path;
  if (!subpath.empty()) {
    if (target.ends_with('/') && subpath.starts_with('/')) target.pop_back();
    target += subpath;
  }
  const auto h = to_httplib(headers);
  return with_retries([&](httplib::Client& cli) {
    return cli.Post(target, h, body.data(), body.size(), std::string(content_type));
  });
}

}  // namespace placeorigin::http
