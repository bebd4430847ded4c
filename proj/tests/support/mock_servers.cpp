#include "mock_servers.hpp"

#include <json.hpp>
#include <stdexcept>

#include "mdaudit/codec.hpp"

namespace mock {

ServerBase::ServerBase() = default;

ServerBase::~ServerBase() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
}

void ServerBase::start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("mock server: bind failed");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
}

void ServerBase::log(const httplib::Request& req) {
    ++requests_;
    std::lock_guard lk(mu_);
    std::string line = req.path;
    if (!req.params.empty()) {
        line += "?";
        for (const auto& [k, v] : req.params) line += k + "=" + v + "&";
        line.pop_back();
    }
    log_.push_back(line);
}

std::vector<std::string> ServerBase::request_log() const {
    std::lock_guard lk(mu_);
    return log_;
}

namespace {

const char* kHead =
    "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    "<OAI-PMH xmlns=\"http://www.openarchives.org/OAI/2.0/\">"
    "<responseDate>2024-06-01T12:00:00Z</responseDate>";

std::string oai_error(const std::string& code, const std::string& msg) {
    return std::string(kHead) + "<request>http://mock/oai</request><error code=\"" + code + "\">" + msg +
           "</error></OAI-PMH>";
}

}  // namespace

std::string oai_envelope_ok(const std::string& inner) {
    return std::string(kHead) + "<request verb=\"ListRecords\">http://mock/oai</request>" + inner + "</OAI-PMH>";
}

OaiServer::OaiServer(std::vector<OaiItem> items, std::size_t page_size, std::string metadata_prefix)
    : items_(std::move(items)), page_size_(page_size), prefix_(std::move(metadata_prefix)) {
    server_.Get("/oai", [this](const httplib::Request& req, httplib::Response& res) {
        log(req);
        std::string verb = req.get_param_value("verb");
        res.set_header("Content-Type", "text/xml");
        if (verb == "ListMetadataFormats") {
            res.set_content(std::string(kHead) + "<request>x</request><ListMetadataFormats><metadataFormat>"
                                                 "<metadataPrefix>" + prefix_ +
                                "</metadataPrefix><schema>http://example.org/schema.xsd</schema>"
                                "<metadataNamespace>urn:x</metadataNamespace></metadataFormat>"
                                "</ListMetadataFormats></OAI-PMH>",
                            "text/xml");
            return;
        }
        if (verb != "ListRecords") {
            res.set_content(oai_error("badVerb", "unsupported verb"), "text/xml");
            return;
        }
        std::size_t n = ++list_requests_;
        if (fail_at_ && n == fail_at_) {
            res.status = 503;
            res.set_header("Retry-After", retry_after_);
            res.set_content("busy", "text/plain");
            return;
        }
        std::size_t page = 0;
        if (req.has_param("resumptionToken")) {
            std::string tok = req.get_param_value("resumptionToken");
            if (tok.rfind("page-", 0) != 0) {
                res.set_content(oai_error("badResumptionToken", "unknown token"), "text/xml");
                return;
            }
            page = std::stoul(tok.substr(5));
            if (expire_from_ && page >= expire_from_) {
                res.set_content(oai_error("badResumptionToken", "token expired"), "text/xml");
                return;
            }
        } else if (req.get_param_value("metadataPrefix") != prefix_) {
            res.set_content(oai_error("cannotDisseminateFormat", "unknown prefix"), "text/xml");
            return;
        }
        if (items_.empty()) {
            res.set_content(oai_error("noRecordsMatch", "empty"), "text/xml");
            return;
        }
        res.set_content(page_xml(page), "text/xml");
    });
    start();
}

std::string OaiServer::page_xml(std::size_t page) const {
    std::string inner = "<ListRecords>";
    std::size_t begin = page * page_size_;
    std::size_t end = std::min(items_.size(), begin + page_size_);
    for (std::size_t i = begin; i < end; ++i) {
        const auto& it = items_[i];
        inner += "<record><header";
        if (it.deleted) inner += " status=\"deleted\"";
        inner += "><identifier>" + it.identifier + "</identifier><datestamp>" + it.datestamp +
                 "</datestamp></header>";
        if (!it.deleted) {
            std::string p = it.payload;
            if (p.rfind("<?xml", 0) == 0) p = p.substr(p.find("?>") + 2);
            while (!p.empty() && (p.front() == '\n' || p.front() == ' ')) p.erase(0, 1);
            inner += "<metadata>" + p + "</metadata>";
        }
        inner += "</record>";
    }
    if (end < items_.size())
        inner += "<resumptionToken completeListSize=\"" + std::to_string(items_.size()) + "\" cursor=\"" +
                 std::to_string(begin) + "\">page-" + std::to_string(page + 1) + "</resumptionToken>";
    else if (page > 0)
        inner += "<resumptionToken completeListSize=\"" + std::to_string(items_.size()) + "\"/>";
    inner += "</ListRecords>";
    return oai_envelope_ok(inner);
}

DataCiteServer::DataCiteServer(std::vector<DataCiteItem> items) : items_(std::move(items)) {
    using nlohmann::json;
    auto item_json = [](const DataCiteItem& it) {
        return json{{"id", it.doi},
                    {"type", "dois"},
                    {"attributes",
                     {{"doi", it.doi}, {"created", it.created}, {"xml", mdaudit::base64_encode(it.xml)}}}};
    };
    auto throttled = [this](httplib::Response& res) {
        std::size_t n = ++seq_;
        if (throttle_at_ && n == throttle_at_) {
            res.status = 429;
            res.set_header("Retry-After", retry_after_);
            res.set_content("{\"errors\":[{\"status\":\"429\"}]}", "application/json");
            return true;
        }
        return false;
    };
    server_.Get("/dois", [this, item_json, throttled](const httplib::Request& req, httplib::Response& res) {
        log(req);
        if (throttled(res)) return;
        std::size_t size = req.has_param("page[size]") ? std::stoul(req.get_param_value("page[size]")) : 25;
        std::size_t cursor = req.has_param("page[cursor]") ? std::stoul(req.get_param_value("page[cursor]")) : 1;
        max_page_size_ = std::max<std::size_t>(max_page_size_.load(), size);
        std::string selector = req.has_param("client-id") ? "client-id=" + req.get_param_value("client-id")
                                                          : "prefix=" + req.get_param_value("prefix");
        std::size_t begin = (cursor - 1) * size;
        std::size_t end = std::min(items_.size(), begin + size);
        json data = json::array();
        for (std::size_t i = begin; i < end; ++i) {
            data.push_back(item_json(items_[i]));
            std::lock_guard lk(served_mu_);
            served_.insert(items_[i].doi);
        }
        if (duplicate_ && begin > 0 && begin < items_.size()) data.push_back(item_json(items_[0]));
        json body{{"data", data}, {"meta", {{"total", items_.size()}}}, {"links", json::object()}};
        if (end < items_.size())
            body["links"]["next"] = base_url() + "/dois?" + selector + "&page%5Bsize%5D=" + std::to_string(size) +
                                    "&page%5Bcursor%5D=" + std::to_string(cursor + 1);
        res.set_content(body.dump(), "application/json");
    });
    server_.Get(R"(/dois/(.+))", [this, item_json, throttled](const httplib::Request& req, httplib::Response& res) {
        log(req);
        if (throttled(res)) return;
        std::string doi = httplib::detail::decode_url(req.matches[1], false);
        for (const auto& it : items_) {
            if (it.doi == doi) {
                {
                    std::lock_guard lk(served_mu_);
                    served_.insert(doi);
                }
                res.set_content(json{{"data", item_json(it)}}.dump(), "application/json");
                return;
            }
        }
        res.status = 404;
        res.set_content("{\"errors\":[{\"status\":\"404\",\"title\":\"not found\"}]}", "application/json");
    });
    start();
}

std::multiset<std::string> DataCiteServer::served_dois() const {
    std::lock_guard lk(served_mu_);
    return served_;
}

}  // namespace mock
