#include "mdaudit/datacite_client.hpp"

#include <cstdlib>
#include <json.hpp>
#include <regex>
#include <set>

#include "mdaudit/codec.hpp"
#include "mdaudit/error.hpp"
#include "mdaudit/schema_registry.hpp"
#include "mdaudit/timeutil.hpp"

using json = nlohmann::json;

namespace mdaudit {

DataCiteQuery DataCiteQuery::for_client(std::string id) {
    DataCiteQuery q;
    q.selector = Selector::client_id;
    q.client_id = std::move(id);
    return q;
}

DataCiteQuery DataCiteQuery::for_prefix(std::string prefix) {
    DataCiteQuery q;
    q.selector = Selector::doi_prefix;
    q.doi_prefix = std::move(prefix);
    return q;
}

DataCiteQuery DataCiteQuery::for_dois(std::vector<std::string> dois) {
    DataCiteQuery q;
    q.selector = Selector::doi_list;
    q.doi_list = std::move(dois);
    return q;
}

void DataCiteQuery::validate() const {
    int populated = !client_id.empty() + !doi_prefix.empty() + !doi_list.empty();
    if (populated != 1) throw ConfigError("DataCite query needs exactly one of client id, prefix, DOI list");
    bool matches = (selector == Selector::client_id && !client_id.empty()) ||
                   (selector == Selector::doi_prefix && !doi_prefix.empty()) ||
                   (selector == Selector::doi_list && !doi_list.empty());
    if (!matches) throw ConfigError("DataCite query selector does not match the populated field");
    if (page_size < 1 || page_size > 1000) throw ConfigError("page_size must be in 1..1000");
    if (api_base.find("://") == std::string::npos) throw ConfigError("api_base must be absolute");
}

std::optional<std::string> declared_kernel_version(const std::string& xml) {
    static const std::regex loc(R"(schemaLocation\s*=\s*["'][^"']*kernel-(\d+(?:\.\d+)*))");
    static const std::regex ns(R"(datacite\.org/schema/kernel-(\d+(?:\.\d+)*))");
    std::smatch m;
    if (std::regex_search(xml, m, loc)) return m[1].str();
    if (std::regex_search(xml, m, ns)) return m[1].str();
    return std::nullopt;
}

std::string datacite_api_base(const std::string& configured) {
    if (const char* env = std::getenv("DATACITE_API_BASE"); env && *env) return env;
    return configured;
}

DataCiteClient::DataCiteClient(std::shared_ptr<HttpTransport> transport, std::shared_ptr<RateLimiter> limiter,
                               RetryPolicy retry)
    : transport_(std::move(transport)), limiter_(std::move(limiter)), retry_(retry) {}

namespace {

std::string strip_slash(std::string s) {
    while (!s.empty() && s.back() == '/') s.pop_back();
    return s;
}

// Returns false when the item was rejected and recorded in summary.errors.
bool to_record(const json& item, const DataCiteQuery& q, FetchSummary& summary, RawRecord& out) {
    const auto& attrs = item.contains("attributes") ? item["attributes"] : json::object();
    std::string doi = attrs.value("doi", item.value("id", ""));
    if (doi.empty()) {
        summary.errors.push_back({"", "missing_doi", "API item without a DOI"});
        return false;
    }
    std::string b64 = attrs.contains("xml") && attrs["xml"].is_string() ? attrs["xml"].get<std::string>() : "";
    if (b64.empty()) {
        summary.errors.push_back({doi, "missing_xml", "API item without an xml attribute"});
        return false;
    }
    try {
        out.payload = base64_decode(b64);
    } catch (const ParseError& e) {
        summary.errors.push_back({doi, "decode_error", e.what()});
        return false;
    }
    out.repository_id = q.repository_id;
    out.source = Source::datacite;
    out.schema_id = SchemaId::datacite_4_6;
    out.identifier = normalize_doi(doi);
    out.deleted = false;
    out.harvested_at = now_seconds();
    out.provenance["doi"] = out.identifier;
    if (attrs.contains("created") && attrs["created"].is_string())
        out.provenance["created"] = attrs["created"].get<std::string>();
    auto ver = declared_kernel_version(out.payload);
    out.provenance["schema_version"] = ver.value_or("");
    if (ver != "4.6")
        out.provenance["warning"] = "declared kernel version " + ver.value_or("unknown") +
                                    " extracted against the 4.6 registry";
    return true;
}

}  // namespace

FetchSummary DataCiteClient::fetch(const DataCiteQuery& q, const RecordSink& sink) {
    q.validate();
    FetchSummary summary;
    std::set<std::string> seen;
    std::string base = strip_slash(q.api_base);
    auto emit = [&](const json& item) {
        RawRecord r;
        if (!to_record(item, q, summary, r)) return;
        if (!seen.insert(r.identifier).second) {
            summary.errors.push_back({r.identifier, "duplicate_doi", "DOI served twice; later copy dropped"});
            return;
        }
        ++summary.records;
        sink(std::move(r));
    };

    if (q.selector == DataCiteQuery::Selector::doi_list) {
        for (const auto& raw : q.doi_list) {
            std::string doi = normalize_doi(raw);
            if (doi.empty()) continue;
            auto r = get_with_retry(*transport_, base + "/dois/" + url_encode(doi), retry_, limiter_.get());
            ++summary.pages;
            if (r.status == 404) {
                summary.missing.push_back(doi);
                continue;
            }
            if (r.status != 200) throw NetworkError("DataCite /dois/" + doi + ": HTTP " + std::to_string(r.status));
            json body;
            try {
                body = json::parse(r.body);
            } catch (const std::exception& e) {
                throw ParseError("DataCite response for " + doi + ": " + e.what());
            }
            if (body.contains("data") && body["data"].is_object()) emit(body["data"]);
        }
        return summary;
    }

    std::string url = base + "/dois?";
    if (q.selector == DataCiteQuery::Selector::client_id) url += "client-id=" + url_encode(q.client_id);
    else url += "prefix=" + url_encode(q.doi_prefix);
    url += "&page%5Bsize%5D=" + std::to_string(q.page_size) + "&page%5Bcursor%5D=1";

    std::set<std::string> visited;
    while (!url.empty()) {
        if (!visited.insert(url).second) throw ProtocolError("cursorLoop", "next link repeats " + url);
        auto r = get_with_retry(*transport_, url, retry_, limiter_.get());
        if (r.status != 200) throw NetworkError("DataCite " + url + ": HTTP " + std::to_string(r.status));
        ++summary.pages;
        json body;
        try {
            body = json::parse(r.body);
        } catch (const std::exception& e) {
            throw ParseError("DataCite page " + url + ": " + e.what());
        }
        if (body.contains("data") && body["data"].is_array())
            for (const auto& item : body["data"]) emit(item);
        url.clear();
        if (body.contains("links") && body["links"].contains("next") && body["links"]["next"].is_string()) {
            bool empty_page = !body.contains("data") || body["data"].empty();
            if (!empty_page) url = body["links"]["next"].get<std::string>();
        }
    }
    return summary;
}

}  // namespace mdaudit
