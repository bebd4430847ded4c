#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mdaudit/diagnostics.hpp"
#include "mdaudit/http.hpp"
#include "mdaudit/oai_client.hpp"
#include "mdaudit/types.hpp"

namespace mdaudit {

inline constexpr const char* kDefaultDataCiteApi = "https://api.datacite.org";

struct DataCiteQuery {
    enum class Selector { client_id, doi_prefix, doi_list };
    Selector selector = Selector::client_id;
    std::string client_id;
    std::string doi_prefix;
    std::vector<std::string> doi_list;
    int page_size = 100;
    std::string api_base = kDefaultDataCiteApi;
    std::string repository_id;

    static DataCiteQuery for_client(std::string id);
    static DataCiteQuery for_prefix(std::string prefix);
    static DataCiteQuery for_dois(std::vector<std::string> dois);
    void validate() const;
};

struct FetchSummary {
    std::size_t records = 0;
    std::size_t pages = 0;
    std::vector<std::string> missing;  // explicit DOIs answered with 404
    Diagnostics errors;                // record-level decode errors, duplicates
};

class DataCiteClient {
public:
    // The limiter is shared by every in-flight DataCite request.
    DataCiteClient(std::shared_ptr<HttpTransport> transport, std::shared_ptr<RateLimiter> limiter,
                   RetryPolicy retry = {});

    FetchSummary fetch(const DataCiteQuery& query, const RecordSink& sink);

private:
    std::shared_ptr<HttpTransport> transport_;
    std::shared_ptr<RateLimiter> limiter_;
    RetryPolicy retry_;
};

// "4.6" from a schemaLocation such as http://schema.datacite.org/meta/kernel-4.6/metadata.xsd.
std::optional<std::string> declared_kernel_version(const std::string& xml);

// The API base, honoring the DATACITE_API_BASE environment variable.
std::string datacite_api_base(const std::string& configured = kDefaultDataCiteApi);

}  // namespace mdaudit
