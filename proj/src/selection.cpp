#include "mdaudit/selection.hpp"

#include <algorithm>
#include <cctype>
#include <json.hpp>
#include <map>

#include "mdaudit/csv.hpp"
#include "mdaudit/error.hpp"
#include "mdaudit/xml.hpp"

using json = nlohmann::json;

namespace mdaudit {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

bool has_ci(const std::set<std::string>& values, std::string_view wanted) {
    auto w = lower(wanted);
    return std::any_of(values.begin(), values.end(), [&](auto& v) { return lower(trim(v)) == w; });
}

}  // namespace

std::string first_failed_criterion(const RepositoryDescription& r) {
    if (!has_ci(r.api_types, "OAI-PMH")) return "apiType";
    if (r.end_date && !trim(*r.end_date).empty()) return "endDate";
    if (!has_ci(r.provider_types, "dataProvider")) return "providerType";
    if (!has_ci(r.repo_types, "disciplinary")) return "type";
    if (has_ci(r.access_types, "closed") || has_ci(r.access_types, "restricted")) return "databaseAccessType";
    return {};
}

CandidateList filter_candidates(const std::vector<RepositoryDescription>& dump) {
    CandidateList out;
    for (const auto& r : dump) {
        auto c = first_failed_criterion(r);
        if (c.empty()) out.accepted.push_back(r);
        else out.rejected.push_back({r, std::move(c)});
    }
    return out;
}

// ------------------------------------------------------------------- JSON

namespace {

const json* field(const json& obj, std::initializer_list<const char*> names) {
    for (const char* n : names)
        if (obj.contains(n) && !obj[n].is_null()) return &obj[n];
    return nullptr;
}

// Strings, arrays of strings, or arrays of objects carrying `inner`.
std::set<std::string> string_set(const json* v, const char* inner) {
    std::set<std::string> out;
    if (!v) return out;
    auto take = [&](const json& x) {
        if (x.is_string()) out.insert(x.get<std::string>());
        else if (x.is_object() && x.contains(inner) && x[inner].is_string()) out.insert(x[inner].get<std::string>());
        else throw ParseError("unexpected value for " + std::string(inner));
    };
    if (v->is_array())
        for (const auto& x : *v) take(x);
    else
        take(*v);
    return out;
}

}  // namespace

DumpParseResult parse_dump_json(std::string_view text) {
    DumpParseResult res;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("registry dump is not valid JSON: ") + e.what());
    }
    const json* list = &doc;
    if (doc.is_object() && doc.contains("repositories")) list = &doc["repositories"];
    if (!list->is_array()) throw ParseError("registry dump must be an array of repositories");
    std::set<std::string> ids;
    std::size_t index = 0;
    for (const auto& e : *list) {
        ++index;
        std::string where = "entry " + std::to_string(index);
        try {
            if (!e.is_object()) throw ParseError("not an object");
            RepositoryDescription r;
            const json* id = field(e, {"id", "re3data.orgIdentifier", "repositoryIdentifier", "identifier"});
            if (!id || !id->is_string() || id->get<std::string>().empty()) throw ParseError("missing id");
            r.id = id->get<std::string>();
            where = r.id;
            r.api_types = string_set(field(e, {"api_types", "apiTypes", "api"}), "apiType");
            r.provider_types = string_set(field(e, {"provider_types", "providerTypes", "providerType"}), "providerType");
            r.repo_types = string_set(field(e, {"repo_types", "types", "type"}), "type");
            r.access_types = string_set(field(e, {"access_types", "databaseAccessTypes", "databaseAccess"}),
                                        "databaseAccessType");
            if (const json* d = field(e, {"end_date", "endDate"}); d && d->is_string() && !d->get<std::string>().empty())
                r.end_date = d->get<std::string>();
            if (const json* c = field(e, {"country", "institutionCountry"}); c && c->is_string())
                r.country = c->get<std::string>();
            if (!ids.insert(r.id).second) throw ParseError("duplicate id");
            res.entries.push_back(std::move(r));
        } catch (const std::exception& ex) {
            res.errors.push_back({where, "malformed_entry", ex.what()});
        }
    }
    return res;
}

// -------------------------------------------------------------------- XML

namespace {

void collect(const xml::Document& doc, int n, const char* local, std::vector<int>& out) {
    if (doc.node(n).local == local) {
        out.push_back(n);
        return;
    }
    for (int c : doc.node(n).children) collect(doc, c, local, out);
}

std::vector<std::string> texts(const xml::Document& doc, int n, const char* local) {
    std::vector<int> hits;
    for (int c : doc.node(n).children) collect(doc, c, local, hits);
    std::vector<std::string> out;
    for (int h : hits) {
        auto t = trim(doc.text_content(h));
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

}  // namespace

DumpParseResult parse_dump_xml(std::string_view text) {
    auto doc = xml::parse(text);
    std::vector<int> repos;
    collect(doc, doc.root, "repository", repos);
    DumpParseResult res;
    std::set<std::string> ids;
    std::size_t index = 0;
    for (int n : repos) {
        ++index;
        std::string where = "entry " + std::to_string(index);
        try {
            RepositoryDescription r;
            auto id = texts(doc, n, "re3data.orgIdentifier");
            if (id.empty()) id = texts(doc, n, "identifier");
            if (id.empty()) throw ParseError("missing re3data.orgIdentifier");
            r.id = id.front();
            where = r.id;
            std::vector<int> apis;
            for (int c : doc.node(n).children) collect(doc, c, "api", apis);
            for (int a : apis) {
                const xml::Attribute* t = nullptr;
                for (const auto& at : doc.node(a).attrs)
                    if (at.local == "apiType") t = &at;
                if (t) r.api_types.insert(t->value);
            }
            for (auto& s : texts(doc, n, "providerType")) r.provider_types.insert(s);
            for (auto& s : texts(doc, n, "type")) r.repo_types.insert(s);
            for (auto& s : texts(doc, n, "databaseAccessType")) r.access_types.insert(s);
            if (auto d = texts(doc, n, "endDate"); !d.empty()) r.end_date = d.front();
            if (auto c = texts(doc, n, "institutionCountry"); !c.empty()) r.country = c.front();
            if (!ids.insert(r.id).second) throw ParseError("duplicate id");
            res.entries.push_back(std::move(r));
        } catch (const std::exception& ex) {
            res.errors.push_back({where, "malformed_entry", ex.what()});
        }
    }
    return res;
}

DumpParseResult parse_dump(std::string_view text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '<') return parse_dump_xml(text);
        break;
    }
    return parse_dump_json(text);
}

std::string candidates_csv(const CandidateList& list) {
    csv::Writer w;
    w.row({"id", "status", "failed_criterion", "country"});
    std::vector<csv::Row> rows;
    for (const auto& r : list.accepted) rows.push_back({r.id, "accepted", "", r.country.value_or("")});
    for (const auto& r : list.rejected)
        rows.push_back({r.repository.id, "rejected", r.criterion, r.repository.country.value_or("")});
    std::sort(rows.begin(), rows.end());
    for (const auto& r : rows) w.row(r);
    return w.str();
}

}  // namespace mdaudit
