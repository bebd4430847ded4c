#include "mdaudit/oai_client.hpp"

#include <cctype>

#include "mdaudit/error.hpp"
#include "mdaudit/timeutil.hpp"
#include "mdaudit/xml.hpp"

namespace mdaudit {

namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

int oai_child(const xml::Document& doc, int parent, const char* local) {
    return doc.first_child(parent, kOaiNs, local);
}

// Returns the OAI error code if the response carries one.
std::optional<std::pair<std::string, std::string>> oai_error(const xml::Document& doc) {
    int e = oai_child(doc, doc.root, "error");
    if (e < 0) return std::nullopt;
    const auto* code = doc.attr(e, "", "code");
    return std::make_pair(code ? code->value : std::string("unknown"), trimmed(doc.text_content(e)));
}

xml::Document parse_oai(const std::string& body) {
    auto doc = xml::parse(body);
    const auto& root = doc.node(doc.root);
    if (root.local != "OAI-PMH" || root.ns != kOaiNs)
        throw ProtocolError("badResponse", "document element is not OAI-PMH");
    return doc;
}

Timestamp response_date(const xml::Document& doc) {
    int rd = oai_child(doc, doc.root, "responseDate");
    if (rd < 0) return {};
    try {
        return parse_timestamp(trimmed(doc.text_content(rd)));
    } catch (const ParseError&) {
        return {};
    }
}

}  // namespace

std::vector<MetadataFormat> parse_list_metadata_formats(const std::string& body) {
    auto doc = parse_oai(body);
    if (auto err = oai_error(doc)) {
        if (err->first == "noMetadataFormats") return {};
        throw ProtocolError(err->first, err->second);
    }
    std::vector<MetadataFormat> out;
    int list = oai_child(doc, doc.root, "ListMetadataFormats");
    if (list < 0) return out;
    for (int f : doc.children_named(list, kOaiNs, "metadataFormat")) {
        MetadataFormat mf;
        if (int p = oai_child(doc, f, "metadataPrefix"); p >= 0) mf.prefix = trimmed(doc.text_content(p));
        if (int s = oai_child(doc, f, "schema"); s >= 0) mf.schema_location = trimmed(doc.text_content(s));
        out.push_back(std::move(mf));
    }
    return out;
}

HarvestPage parse_list_records(const std::string& body, const OaiEndpoint& endpoint) {
    auto doc = parse_oai(body);
    HarvestPage page;
    page.response_date = response_date(doc);
    if (auto err = oai_error(doc)) {
        if (err->first == "noRecordsMatch") return page;
        throw ProtocolError(err->first, err->second);
    }
    int list = oai_child(doc, doc.root, "ListRecords");
    if (list < 0) throw ProtocolError("badResponse", "ListRecords element missing");
    Timestamp now = now_seconds();
    for (int rec : doc.children_named(list, kOaiNs, "record")) {
        int header = oai_child(doc, rec, "header");
        if (header < 0) throw ProtocolError("badResponse", "record without header");
        RawRecord r;
        r.repository_id = endpoint.repository_id;
        r.source = Source::oai;
        r.schema_id = endpoint.schema_id;
        r.harvested_at = now;
        if (int id = oai_child(doc, header, "identifier"); id >= 0) r.identifier = trimmed(doc.text_content(id));
        if (int ds = oai_child(doc, header, "datestamp"); ds >= 0)
            r.provenance["datestamp"] = trimmed(doc.text_content(ds));
        const auto* status = doc.attr(header, "", "status");
        r.deleted = status && status->value == "deleted";
        r.provenance["endpoint"] = endpoint.base_url;
        r.provenance["metadata_prefix"] = endpoint.metadata_prefix;
        if (endpoint.set_spec) r.provenance["set"] = *endpoint.set_spec;
        if (!r.deleted) {
            int md = oai_child(doc, rec, "metadata");
            if (md < 0 || doc.node(md).children.empty())
                throw ProtocolError("badResponse", "record " + r.identifier + " has no metadata payload");
            const auto& payload = doc.node(doc.node(md).children.front());
            r.payload = body.substr(payload.begin, payload.end - payload.begin);
        }
        page.records.push_back(std::move(r));
    }
    if (int tok = oai_child(doc, list, "resumptionToken"); tok >= 0) {
        std::string t = trimmed(doc.text_content(tok));
        if (!t.empty()) page.resumption_token = t;
    }
    return page;
}

OaiClient::OaiClient(OaiEndpoint endpoint, std::shared_ptr<HttpTransport> transport, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)), retry_(retry),
      limiter_(endpoint_.polite_delay) {
    if (endpoint_.base_url.find("://") == std::string::npos)
        throw ConfigError("OAI base_url must be absolute: " + endpoint_.base_url);
    if (endpoint_.metadata_prefix.empty()) throw ConfigError("metadata_prefix must not be empty");
}

std::string OaiClient::fetch(const std::string& query) {
    std::string url = endpoint_.base_url;
    url += url.find('?') == std::string::npos ? '?' : '&';
    url += query;
    auto r = get_with_retry(*transport_, url, retry_, &limiter_);
    if (r.status != 200) throw NetworkError("GET " + url + ": HTTP " + std::to_string(r.status));
    return r.body;
}

std::vector<MetadataFormat> OaiClient::list_metadata_formats() {
    return parse_list_metadata_formats(fetch("verb=ListMetadataFormats"));
}

HarvestPage OaiClient::list_records(const std::optional<std::string>& token) {
    std::string q = "verb=ListRecords";
    if (token) {
        q += "&resumptionToken=" + url_encode(*token);
    } else {
        q += "&metadataPrefix=" + url_encode(endpoint_.metadata_prefix);
        if (endpoint_.set_spec) q += "&set=" + url_encode(*endpoint_.set_spec);
    }
    return parse_list_records(fetch(q), endpoint_);
}

HarvestStats OaiClient::harvest_all(const RecordSink& sink, const std::optional<std::string>& resume_token) {
    HarvestStats st;
    std::optional<std::string> token = resume_token;
    std::string last_good = resume_token.value_or("");
    for (;;) {
        HarvestPage page;
        try {
            page = list_records(token);
        } catch (const ProtocolError& e) {
            if (e.code() == "badResumptionToken")
                throw HarvestError("badResumptionToken '" + token.value_or("") + "': " + e.what(), last_good);
            throw HarvestError(e.what(), last_good);
        } catch (const NetworkError& e) {
            throw HarvestError(e.what(), last_good);
        } catch (const ParseError& e) {
            throw HarvestError(e.what(), last_good);
        }
        ++st.pages;
        if (token) ++st.token_followups;
        for (auto& r : page.records) {
            ++st.records;
            if (r.deleted) ++st.deleted;
            sink(std::move(r));
        }
        if (!page.resumption_token) break;
        token = page.resumption_token;
        last_good = *token;
    }
    return st;
}

std::vector<RawRecord> OaiClient::harvest_all() {
    std::vector<RawRecord> out;
    harvest_all([&](RawRecord&& r) { out.push_back(std::move(r)); });
    return out;
}

ReservoirSampler::ReservoirSampler(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), seed_(seed), rng_(seed) {}

void ReservoirSampler::offer(RawRecord&& r) {
    ++seen_;
    if (items_.size() < capacity_) {
        items_.push_back(std::move(r));
        return;
    }
    std::uniform_int_distribution<std::uint64_t> dist(0, seen_ - 1);
    auto j = dist(rng_);
    if (j < capacity_) items_[static_cast<std::size_t>(j)] = std::move(r);
}

std::vector<RawRecord> ReservoirSampler::take() { return std::move(items_); }

}  // namespace mdaudit
