#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace mdaudit {

struct HttpResponse {
    int status = 0;
    std::string body;
    std::map<std::string, std::string> headers;  // lowercase names

    std::optional<std::string> header(const std::string& lower_name) const;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    // Throws NetworkError when no HTTP response was obtained.
    virtual HttpResponse get(const std::string& url) = 0;
};

// cpp-httplib backed; http and https.
std::shared_ptr<HttpTransport> make_default_transport(std::chrono::seconds timeout = std::chrono::seconds(60));

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{1000};
    double multiplier = 2.0;
    std::chrono::milliseconds max_wait{300000};
};

// Enforces a minimum interval between successive acquire() calls.
class RateLimiter {
public:
    explicit RateLimiter(std::chrono::milliseconds min_interval) : interval_(min_interval) {}
    void acquire();
    std::chrono::milliseconds interval() const { return interval_; }

private:
    std::chrono::milliseconds interval_;
    std::mutex mu_;
    std::optional<std::chrono::steady_clock::time_point> last_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

// Retries on NetworkError, 429 and 5xx; waits Retry-After when present, the
// exponential backoff otherwise. Other statuses are returned to the caller.
HttpResponse get_with_retry(HttpTransport& transport, const std::string& url, const RetryPolicy& policy,
                            RateLimiter* limiter = nullptr, const Sleeper& sleep = real_sleeper());

// Retry-After as delta-seconds or HTTP-date.
std::optional<std::chrono::milliseconds> parse_retry_after(std::string_view value);

std::string url_encode(std::string_view s);

}  // namespace mdaudit
