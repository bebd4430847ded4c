#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mdaudit/http.hpp"
#include "mdaudit/types.hpp"

namespace mdaudit {

inline constexpr const char* kOaiNs = "http://www.openarchives.org/OAI/2.0/";

struct OaiEndpoint {
    std::string base_url;
    std::string metadata_prefix;
    std::optional<std::string> set_spec;
    std::chrono::milliseconds polite_delay{0};
    std::string repository_id;  // endpoint id carried by each record
    SchemaId schema_id = SchemaId::ddi_2_5;
};

struct HarvestPage {
    std::vector<RawRecord> records;
    std::optional<std::string> resumption_token;
    Timestamp response_date{};
};

struct MetadataFormat {
    std::string prefix;
    std::string schema_location;
};

using RecordSink = std::function<void(RawRecord&&)>;

struct HarvestStats {
    std::size_t pages = 0;
    std::size_t token_followups = 0;
    std::size_t records = 0;
    std::size_t deleted = 0;
};

class OaiClient {
public:
    OaiClient(OaiEndpoint endpoint, std::shared_ptr<HttpTransport> transport, RetryPolicy retry = {});

    std::vector<MetadataFormat> list_metadata_formats();

    // One ListRecords request; token empty for the first page.
    HarvestPage list_records(const std::optional<std::string>& token);

    // Follows resumption tokens to completion, optionally starting from a
    // stored token. Throws HarvestError carrying the last good token.
    HarvestStats harvest_all(const RecordSink& sink, const std::optional<std::string>& resume_token = {});
    std::vector<RawRecord> harvest_all();

    const OaiEndpoint& endpoint() const { return endpoint_; }

private:
    OaiEndpoint endpoint_;
    std::shared_ptr<HttpTransport> transport_;
    RetryPolicy retry_;
    RateLimiter limiter_;

    std::string fetch(const std::string& query);
};

// Parses a ListRecords response body; exposed for testing.
HarvestPage parse_list_records(const std::string& body, const OaiEndpoint& endpoint);
std::vector<MetadataFormat> parse_list_metadata_formats(const std::string& body);

// Keeps a uniform random sample of at most `capacity` records (Algorithm R).
class ReservoirSampler {
public:
    ReservoirSampler(std::size_t capacity, std::uint64_t seed);
    void offer(RawRecord&& r);
    std::vector<RawRecord> take();
    std::uint64_t seen() const { return seen_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::size_t capacity_;
    std::uint64_t seed_;
    std::uint64_t seen_ = 0;
    std::vector<RawRecord> items_;
    std::mt19937_64 rng_;
};

}  // namespace mdaudit
