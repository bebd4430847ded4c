#include "mdaudit/http.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ctime>
#include <thread>

#include "mdaudit/error.hpp"

namespace mdaudit {

std::optional<std::string> HttpResponse::header(const std::string& lower_name) const {
    auto it = headers.find(lower_name);
    if (it == headers.end()) return std::nullopt;
    return it->second;
}

namespace {

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

class HttplibTransport : public HttpTransport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

    HttpResponse get(const std::string& url) override {
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw NetworkError("not an absolute URL: " + url);
        auto path_start = url.find('/', scheme_end + 3);
        std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
        std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client cli(origin);
        if (!cli.is_valid()) throw NetworkError("unsupported URL: " + url);
        cli.set_url_encode(false);
        cli.set_follow_location(true);
        cli.set_connection_timeout(timeout_);
        cli.set_read_timeout(timeout_);
        cli.set_write_timeout(timeout_);
        auto res = cli.Get(path);
        if (!res) throw NetworkError("GET " + url + ": " + httplib::to_string(res.error()));
        HttpResponse out;
        out.status = res->status;
        out.body = std::move(res->body);
        for (const auto& [k, v] : res->headers) out.headers[lower(k)] = v;
        return out;
    }

private:
    std::chrono::seconds timeout_;
};

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport(std::chrono::seconds timeout) {
    return std::make_shared<HttplibTransport>(timeout);
}

void RateLimiter::acquire() {
    std::unique_lock lk(mu_);
    auto now = std::chrono::steady_clock::now();
    if (last_) {
        auto ready = *last_ + interval_;
        if (now < ready) {
            std::this_thread::sleep_until(ready);
            now = std::chrono::steady_clock::now();
        }
    }
    last_ = now;
}

Sleeper real_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::optional<std::chrono::milliseconds> parse_retry_after(std::string_view value) {
    std::string v(value);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.erase(v.begin());
    if (v.empty()) return std::nullopt;
    if (std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); }))
        return std::chrono::seconds(std::stoll(v));
    std::tm tm{};
    if (!strptime(v.c_str(), "%a, %d %b %Y %H:%M:%S GMT", &tm)) return std::nullopt;
    auto when = std::chrono::system_clock::from_time_t(timegm(&tm));
    auto delta = std::chrono::duration_cast<std::chrono::milliseconds>(when - std::chrono::system_clock::now());
    return delta.count() > 0 ? delta : std::chrono::milliseconds(0);
}

HttpResponse get_with_retry(HttpTransport& transport, const std::string& url, const RetryPolicy& policy,
                            RateLimiter* limiter, const Sleeper& sleep) {
    auto backoff = policy.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        std::optional<std::chrono::milliseconds> wait;
        if (limiter) limiter->acquire();
        try {
            HttpResponse r = transport.get(url);
            bool retryable = r.status == 429 || (r.status >= 500 && r.status <= 599);
            if (!retryable) return r;
            last_error = "HTTP " + std::to_string(r.status);
            if (auto ra = r.header("retry-after")) wait = parse_retry_after(*ra);
        } catch (const NetworkError& e) {
            last_error = e.what();
        }
        if (attempt == policy.max_attempts) break;
        auto d = wait.value_or(backoff);
        if (d > policy.max_wait) d = policy.max_wait;
        sleep(d);
        backoff = std::chrono::milliseconds(
            static_cast<long long>(std::llround(static_cast<double>(backoff.count()) * policy.multiplier)));
    }
    throw NetworkError("GET " + url + " failed after " + std::to_string(policy.max_attempts) +
                       " attempts: " + last_error);
}

std::string url_encode(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xf];
        }
    }
    return out;
}

}  // namespace mdaudit
