#include "mdaudit/schema_registry.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>

#include "embedded_data.hpp"
#include "mdaudit/csv.hpp"
#include "mdaudit/error.hpp"

namespace mdaudit {

namespace {

const csv::Row kHeader{"element_id", "schema_id", "xml_path", "required",
                       "identifier_flag", "recommended_flag", "parent"};

bool parse_bool(const std::string& s, std::size_t line) {
    std::string v;
    for (char c : s) v += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
    throw ValidationError("line " + std::to_string(line) + ": bad boolean '" + s + "'", line);
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

const ElementDescriptor* ElementRegistry::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &descriptors[it->second];
}

std::size_t ElementRegistry::count_required() const {
    return static_cast<std::size_t>(
        std::count_if(descriptors.begin(), descriptors.end(), [](auto& d) { return d.required; }));
}

std::size_t ElementRegistry::count_identifier() const {
    return static_cast<std::size_t>(
        std::count_if(descriptors.begin(), descriptors.end(), [](auto& d) { return d.identifier_flag; }));
}

std::vector<std::string> ElementRegistry::ids() const {
    std::vector<std::string> out;
    out.reserve(descriptors.size());
    for (auto& d : descriptors) out.push_back(d.element_id);
    return out;
}

void ElementRegistry::finalize() {
    index_.clear();
    paths_.clear();
    root_ns_.clear();
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        auto& d = descriptors[i];
        if (d.element_id.empty()) throw ValidationError("empty element_id");
        if (!index_.emplace(d.element_id, i).second)
            throw ValidationError("duplicate element_id '" + d.element_id + "'");
        if (d.schema_id != schema_id)
            throw ValidationError("element '" + d.element_id + "' has schema " + to_string(d.schema_id));
        if (d.required && d.identifier_flag)
            throw ValidationError("element '" + d.element_id + "' is both required and identifier-flagged");
        if (d.xml_paths.empty()) throw ValidationError("element '" + d.element_id + "' has no xml_path");
    }
    for (auto& d : descriptors) {
        if (d.parent.empty()) continue;
        if (!index_.count(d.parent))
            throw ValidationError("element '" + d.element_id + "' has unknown parent '" + d.parent + "'");
        std::string cur = d.parent;
        for (std::size_t hops = 0; !cur.empty(); ++hops) {
            if (hops > descriptors.size())
                throw ValidationError("parent cycle through '" + d.element_id + "'");
            cur = descriptors[index_.at(cur)].parent;
        }
    }
    for (auto& d : descriptors) {
        std::vector<xml::Path> compiled;
        for (auto& p : d.xml_paths) {
            compiled.push_back(xml::Path::compile(p, namespaces));
            if (p.size() < 2 || p[0] != '/' || p[1] == '/')
                throw ValidationError("path of '" + d.element_id + "' must be absolute: " + p);
            auto colon = p.find(':');
            auto slash = p.find('/', 1);
            std::string ns;
            if (colon != std::string::npos && colon < slash) ns = namespaces.at(p.substr(1, colon - 1));
            if (root_ns_.empty()) root_ns_ = ns;
            else if (ns != root_ns_)
                throw ValidationError("path of '" + d.element_id + "' starts in a different namespace");
        }
        paths_.push_back(std::move(compiled));
    }
    if (schema_id == SchemaId::datacite_4_6) {
        if (descriptors.size() != 85 || count_required() != 8 || count_identifier() != 12)
            throw ValidationError("datacite-4.6 registry must have 85 elements, 8 required, 12 identifiers; got " +
                                  std::to_string(descriptors.size()) + "/" + std::to_string(count_required()) +
                                  "/" + std::to_string(count_identifier()));
    }
}

ElementRegistry parse_registry(std::string_view csv_text) {
    auto doc = csv::parse(csv_text);
    if (doc.header != kHeader) throw ValidationError("registry header must be " + csv::format_row(kHeader));
    ElementRegistry reg;
    for (auto& c : doc.comments) {
        if (c.rfind("xmlns:", 0) == 0) {
            auto eq = c.find('=');
            if (eq == std::string::npos) throw ValidationError("bad xmlns comment: " + c);
            reg.namespaces[c.substr(6, eq - 6)] = std::string(trim(c.substr(eq + 1)));
        } else {
            reg.header_comments.push_back(c);
        }
    }
    if (doc.rows.empty()) throw ValidationError("registry has no rows");
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        std::size_t line = doc.line_numbers[r];
        if (row.size() != kHeader.size())
            throw ValidationError("line " + std::to_string(line) + ": expected 7 fields", line);
        SchemaId sid;
        try {
            sid = schema_from_string(row[1]);
        } catch (const ConfigError& e) {
            throw ValidationError("line " + std::to_string(line) + ": " + e.what(), line);
        }
        if (r == 0) reg.schema_id = sid;
        else if (sid != reg.schema_id)
            throw ValidationError("line " + std::to_string(line) + ": mixed schema ids", line);
        ElementDescriptor d;
        d.element_id = std::string(trim(row[0]));
        d.schema_id = sid;
        d.xml_paths.push_back(std::string(trim(row[2])));
        d.required = parse_bool(row[3], line);
        d.identifier_flag = parse_bool(row[4], line);
        d.recommended_flag = parse_bool(row[5], line);
        d.parent = std::string(trim(row[6]));
        auto it = seen.find(d.element_id);
        if (it != seen.end()) {
            auto& prev = reg.descriptors[it->second];
            if (prev.required != d.required || prev.identifier_flag != d.identifier_flag ||
                prev.recommended_flag != d.recommended_flag || prev.parent != d.parent)
                throw ValidationError("line " + std::to_string(line) + ": conflicting rows for '" +
                                      d.element_id + "'", line);
            prev.xml_paths.push_back(d.xml_paths.front());
            continue;
        }
        seen.emplace(d.element_id, reg.descriptors.size());
        reg.descriptors.push_back(std::move(d));
    }
    reg.finalize();
    return reg;
}

ElementRegistry load_registry(const std::string& path) { return parse_registry(read_file(path)); }

const ElementRegistry& registry(SchemaId id) {
    static std::once_flag flags[4];
    static ElementRegistry regs[4];
    auto i = static_cast<std::size_t>(id);
    std::call_once(flags[i], [&] { regs[i] = parse_registry(embedded::registry_csv(id)); });
    return regs[i];
}

const ElementRegistry& registry(std::string_view schema_id) { return registry(schema_from_string(schema_id)); }

// ------------------------------------------------------------ occurrences

namespace {

constexpr std::string_view kDataCiteNsStem = "http://datacite.org/schema/kernel-";

void remap_namespace(xml::Document& doc, const std::string& from, const std::string& to) {
    for (auto& n : doc.nodes)
        if (n.ns == from) n.ns = to;
}

// Older DataCite kernels use their own namespace; count them against 4.6.
void harmonize_datacite(xml::Document& doc, const ElementRegistry& reg) {
    if (reg.schema_id != SchemaId::datacite_4_6 || doc.root < 0) return;
    const auto& ns = doc.node(doc.root).ns;
    if (ns != reg.root_namespace() && ns.rfind(kDataCiteNsStem, 0) == 0) {
        std::string from = ns;
        remap_namespace(doc, from, reg.root_namespace());
    }
}

}  // namespace

OccurrenceVector extract_occurrences(const xml::Document& doc, const std::string& record_id,
                                     const ElementRegistry& reg, Diagnostics* diag) {
    OccurrenceVector v;
    v.record_id = record_id;
    v.schema_id = reg.schema_id;
    if (doc.root < 0) return v;
    const auto& root_ns = doc.node(doc.root).ns;
    if (root_ns != reg.root_namespace()) {
        note(diag, record_id, "namespace_mismatch",
             "document element namespace '" + root_ns + "' does not match " + to_string(reg.schema_id) +
                 " namespace '" + reg.root_namespace() + "'");
        return v;
    }
    std::vector<xml::Match> hits;
    for (std::size_t i = 0; i < reg.descriptors.size(); ++i) {
        const auto& paths = reg.compiled(i);
        hits.clear();
        for (const auto& p : paths) {
            auto m = p.evaluate(doc);
            hits.insert(hits.end(), m.begin(), m.end());
        }
        if (paths.size() > 1) {
            std::sort(hits.begin(), hits.end());
            hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
        }
        if (!hits.empty()) v.counts[reg.descriptors[i].element_id] = hits.size();
    }
    return v;
}

OccurrenceVector extract_occurrences(const RawRecord& record, const ElementRegistry& reg, Diagnostics* diag) {
    if (record.schema_id != reg.schema_id)
        throw ConfigError("record " + record.record_id + " is " + to_string(record.schema_id) +
                          " but registry is " + to_string(reg.schema_id));
    if (record.deleted || record.payload.empty()) {
        OccurrenceVector v;
        v.record_id = record.record_id;
        v.schema_id = reg.schema_id;
        note(diag, record.record_id, "empty_payload", "deleted or empty record");
        return v;
    }
    auto doc = parse_record(record);
    return extract_occurrences(doc, record.record_id, reg, diag);
}

xml::Document parse_record(const RawRecord& record) {
    auto doc = xml::parse(record.payload);
    if (record.schema_id == SchemaId::datacite_4_6) harmonize_datacite(doc, registry(SchemaId::datacite_4_6));
    return doc;
}

std::size_t distinct_elements(const OccurrenceVector& v) {
    return static_cast<std::size_t>(
        std::count_if(v.counts.begin(), v.counts.end(), [](auto& kv) { return kv.second >= 1; }));
}

// ------------------------------------------------------------------ dates

namespace {

const std::string kDdiNs = "ddi:codebook:2_5";
const std::string kDifNs = "http://gcmd.gsfc.nasa.gov/Aboutus/xml/dif/";
const std::string kGmdNs = "http://www.isotc211.org/2005/gmd";
const std::string kGcoNs = "http://www.isotc211.org/2005/gco";
const std::string kDataCiteNs = "http://datacite.org/schema/kernel-4";

struct DatePaths {
    xml::NsMap ns{{"ddi", kDdiNs}, {"dif", kDifNs}, {"gmd", kGmdNs}, {"gco", kGcoNs}};
    xml::Path ddi_dist = xml::Path::compile(
        "/ddi:codeBook/ddi:docDscr/ddi:citation/ddi:distStmt/ddi:distDate", ns);
    xml::Path ddi_version = xml::Path::compile(
        "/ddi:codeBook/ddi:stdyDscr/ddi:citation/ddi:verStmt/ddi:version/@date", ns);
    xml::Path dif_creation = xml::Path::compile("/dif:DIF/dif:Metadata_Dates/dif:Metadata_Creation", ns);
    xml::Path dif_release = xml::Path::compile("/dif:DIF/dif:Dataset_Citation/dif:Dataset_Release_Date", ns);
    xml::Path iso_dates = xml::Path::compile(
        "/gmd:MD_Metadata/gmd:identificationInfo/gmd:MD_DataIdentification/gmd:citation/gmd:CI_Citation/"
        "gmd:date/gmd:CI_Date",
        ns);
};

const DatePaths& date_paths() {
    static const DatePaths p;
    return p;
}

struct Candidate {
    std::string value;
    std::string element;
};

bool earlier(const PartialDate& a, const PartialDate& b) {
    if (a.day != b.day) return a.day < b.day;
    return a.granularity < b.granularity;
}

std::optional<RecordDate> pick_earliest(const std::string& record_id, const std::vector<Candidate>& cands,
                                        Diagnostics* diag) {
    std::optional<RecordDate> best;
    PartialDate best_pd;
    for (const auto& c : cands) {
        auto v = trim(c.value);
        if (v.empty()) continue;
        PartialDate pd;
        try {
            pd = parse_partial_date(v);
        } catch (const ParseError& e) {
            throw ParseError("record " + record_id + ", " + c.element + ": " + e.what());
        }
        if (!best || earlier(pd, best_pd)) {
            best_pd = pd;
            best = RecordDate{record_id, pd.day, pd.granularity, c.element};
        }
    }
    if (!best) note(diag, record_id, "no_date", "no date element present");
    else if (best->granularity == Granularity::month)
        note(diag, record_id, "month_granularity", "month-only date " + format_day(best->date) + " from " + best->source_element);
    return best;
}

}  // namespace

std::optional<RecordDate> extract_date(const RawRecord& record, const xml::Document& doc, Diagnostics* diag) {
    const auto& P = date_paths();
    std::vector<Candidate> cands;
    switch (record.schema_id) {
        case SchemaId::datacite_4_6: {
            auto it = record.provenance.find("created");
            if (it != record.provenance.end()) cands.push_back({it->second, "created"});
            break;
        }
        case SchemaId::ddi_2_5: {
            for (auto& m : P.ddi_dist.evaluate(doc)) {
                const auto* a = doc.attr(m.node, "", "date");
                std::string v = (a && !trim(a->value).empty()) ? a->value : doc.text_content(m.node);
                cands.push_back({v, "docDscr_citation_distStmt_distDate"});
            }
            for (auto& m : P.ddi_version.evaluate(doc))
                cands.push_back({xml::value_of(doc, m), "stdyDscr_citation_verStmt_version_date"});
            break;
        }
        case SchemaId::dif_10: {
            for (auto& m : P.dif_creation.evaluate(doc))
                cands.push_back({xml::value_of(doc, m), "Metadata_Creation"});
            for (auto& m : P.dif_release.evaluate(doc))
                cands.push_back({xml::value_of(doc, m), "Dataset_Release_Date"});
            break;
        }
        case SchemaId::iso_19139: {
            for (auto& m : P.iso_dates.evaluate(doc)) {
                int type = doc.first_child(m.node, kGmdNs, "dateType");
                int code = type < 0 ? -1 : doc.first_child(type, kGmdNs, "CI_DateTypeCode");
                if (code < 0) continue;
                const auto* clv = doc.attr(code, "", "codeListValue");
                std::string t = clv ? clv->value : doc.text_content(code);
                if (lower(trim(t)) != "publication") continue;
                int date = doc.first_child(m.node, kGmdNs, "date");
                if (date < 0) continue;
                int val = doc.first_child(date, kGcoNs, "Date");
                if (val < 0) val = doc.first_child(date, kGcoNs, "DateTime");
                if (val < 0) continue;
                cands.push_back({doc.text_content(val), "MD_DataIdentification_citation_date"});
            }
            break;
        }
    }
    return pick_earliest(record.record_id, cands, diag);
}

std::optional<RecordDate> extract_date(const RawRecord& record, Diagnostics* diag) {
    if (record.schema_id == SchemaId::datacite_4_6 || record.payload.empty()) {
        xml::Document empty;
        if (record.schema_id != SchemaId::datacite_4_6) {
            note(diag, record.record_id, "no_date", "empty payload");
            return std::nullopt;
        }
        return extract_date(record, empty, diag);
    }
    auto doc = parse_record(record);
    return extract_date(record, doc, diag);
}

// ------------------------------------------------------------------- DOIs

std::string normalize_doi(std::string_view raw) {
    static const std::string_view prefixes[] = {"https://doi.org/", "http://doi.org/",
                                                "https://dx.doi.org/", "http://dx.doi.org/",
                                                "doi.org/", "dx.doi.org/", "doi:"};
    std::string s = lower(trim(raw));
    bool again = true;
    while (again) {
        again = false;
        for (auto p : prefixes) {
            if (s.rfind(p, 0) == 0) {
                s = std::string(trim(std::string_view(s).substr(p.size())));
                again = true;
            }
        }
    }
    return s;
}

std::optional<std::string> find_doi(std::string_view text) {
    static const std::regex re(R"(10\.\d{4,9}/\S+)");
    std::string s = lower(trim(text));
    std::smatch m;
    if (!std::regex_search(s, m, re)) return std::nullopt;
    return normalize_doi(m.str());
}

const DoiLocatorSet& default_doi_locators(SchemaId id) {
    static const DoiLocatorSet ddi{
        {{"ddi", kDdiNs}},
        {{"/ddi:codeBook/ddi:docDscr/ddi:citation/ddi:titlStmt/ddi:IDNo", "@agency", "DOI", ""},
         {"/ddi:codeBook/ddi:stdyDscr/ddi:citation/ddi:titlStmt/ddi:IDNo", "@agency", "DOI", ""},
         {"/ddi:codeBook/ddi:docDscr/ddi:citation/ddi:holdings/@URI", "", "", "doi.org"},
         {"/ddi:codeBook/ddi:stdyDscr/ddi:citation/ddi:holdings/@URI", "", "", "doi.org"}}};
    static const DoiLocatorSet dif{
        {{"dif", kDifNs}},
        {{"/dif:DIF/dif:Dataset_Citation/dif:Persistent_Identifier/dif:Identifier", "dif:Type", "DOI", ""},
         {"/dif:DIF/dif:Dataset_Citation/dif:Dataset_DOI", "", "", ""}}};
    static const DoiLocatorSet iso{
        {{"gmd", kGmdNs}},
        {{"//gmd:identifier/*/gmd:code", "", "", ""}}};
    static const DoiLocatorSet datacite{
        {{"dc", kDataCiteNs}},
        {{"/dc:resource/dc:identifier[@identifierType='DOI']", "", "", ""}}};
    switch (id) {
        case SchemaId::ddi_2_5: return ddi;
        case SchemaId::dif_10: return dif;
        case SchemaId::iso_19139: return iso;
        case SchemaId::datacite_4_6: break;
    }
    return datacite;
}

std::optional<std::string> extract_doi(const RawRecord& record, const xml::Document& doc,
                                       const DoiLocatorSet& locators) {
    if (record.schema_id == SchemaId::datacite_4_6) {
        auto it = record.provenance.find("doi");
        if (it != record.provenance.end() && find_doi(it->second)) return find_doi(it->second);
    }
    if (doc.root < 0) return std::nullopt;
    for (const auto& loc : locators.locators) {
        auto path = xml::Path::compile(loc.path, locators.namespaces);
        std::optional<xml::Path> guard;
        if (!loc.guard_path.empty()) guard = xml::Path::compile(loc.guard_path, locators.namespaces);
        for (const auto& m : path.evaluate(doc)) {
            if (guard) {
                int ctx = loc.guard_path[0] == '@' ? m.node : doc.node(m.node).parent;
                bool ok = false;
                for (const auto& g : guard->evaluate_from(doc, ctx))
                    if (lower(trim(xml::value_of(doc, g))) == lower(loc.guard_value)) ok = true;
                if (!ok) continue;
            }
            std::string value = xml::value_of(doc, m);
            if (!loc.contains.empty() && lower(value).find(lower(loc.contains)) == std::string::npos) continue;
            if (auto d = find_doi(value)) return d;
        }
    }
    return std::nullopt;
}

std::optional<std::string> extract_doi(const RawRecord& record) {
    if (record.schema_id == SchemaId::datacite_4_6) {
        auto it = record.provenance.find("doi");
        if (it != record.provenance.end()) {
            if (auto d = find_doi(it->second)) return d;
        }
        if (auto d = find_doi(record.identifier)) return d;
    }
    if (record.payload.empty()) return std::nullopt;
    auto doc = parse_record(record);
    return extract_doi(record, doc, default_doi_locators(record.schema_id));
}

}  // namespace mdaudit
