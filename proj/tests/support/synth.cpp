#include "synth.hpp"

#include <stdexcept>

namespace synth {

std::vector<XmlTree::Step> XmlTree::split(const std::string& path) {
    std::vector<Step> out;
    std::size_t i = 0;
    if (path.rfind("//", 0) == 0) throw std::invalid_argument("descendant steps unsupported: " + path);
    while (i < path.size()) {
        if (path[i] == '/') ++i;
        std::size_t j = i;
        int depth = 0;
        while (j < path.size() && (depth > 0 || path[j] != '/')) {
            if (path[j] == '[') ++depth;
            if (path[j] == ']') --depth;
            ++j;
        }
        std::string tok = path.substr(i, j - i);
        i = j;
        Step s;
        auto br = tok.find('[');
        s.qname = tok.substr(0, br);
        while (br != std::string::npos) {
            auto close = tok.find(']', br);
            std::string pred = tok.substr(br + 1, close - br - 1);  // @a='v'
            auto eq = pred.find('=');
            s.preds.emplace_back(pred.substr(1, eq - 1), pred.substr(eq + 2, pred.size() - eq - 3));
            br = tok.find('[', close);
        }
        if (s.qname[0] == '@') {
            s.attribute = true;
            s.qname = s.qname.substr(1);
        }
        s.any = s.qname == "*";
        out.push_back(std::move(s));
    }
    return out;
}

bool XmlTree::matches(const Node& n, const Step& s) {
    if (!s.any && n.qname != s.qname) return false;
    for (const auto& [k, v] : s.preds) {
        bool ok = false;
        for (const auto& a : n.attrs)
            if (a.first == k && a.second == v) ok = true;
        if (!ok) return false;
    }
    return true;
}

void XmlTree::build(const std::string& path, const std::string& text, bool fresh) {
    auto steps = split(path);
    Node* cur = nullptr;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        Step s = steps[i];
        if (s.any) {
            std::string next = i + 1 < steps.size() ? steps[i + 1].qname : "x:y";
            s.qname = next.substr(0, next.find(':')) + ":AnyElement";
            s.any = false;
        }
        if (s.attribute) {
            bool found = false;
            for (auto& a : cur->attrs)
                if (a.first == s.qname) found = true;
            if (!found) cur->attrs.emplace_back(s.qname, text.empty() ? "2001-02-03" : text);
            return;
        }
        bool last = i + 1 == steps.size() || steps[i + 1].attribute;
        if (!cur) {
            if (!root_) {
                root_ = std::make_unique<Node>();
                root_->qname = s.qname;
            }
            if (root_->qname != s.qname) throw std::invalid_argument("root mismatch: " + path);
            cur = root_.get();
            continue;
        }
        Node* next = nullptr;
        if (!(fresh && last))
            for (auto& k : cur->kids)
                if (matches(*k, s)) next = k.get();
        if (!next) {
            cur->kids.push_back(std::make_unique<Node>());
            next = cur->kids.back().get();
            next->qname = s.qname;
            next->attrs = s.preds;
        }
        cur = next;
        if (last && i + 1 == steps.size() && !text.empty()) cur->text = text;
    }
}

void XmlTree::ensure(const std::string& path, const std::string& text) { build(path, text, false); }
void XmlTree::append(const std::string& path, const std::string& text) { build(path, text, true); }

namespace {

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else if (c == '"') o += "&quot;";
        else o += c;
    }
    return o;
}

}  // namespace

void XmlTree::write(const Node& n, std::string& out, const std::string& decls) {
    out += "<" + n.qname + decls;
    for (const auto& [k, v] : n.attrs) out += " " + k + "=\"" + esc(v) + "\"";
    if (n.kids.empty() && n.text.empty()) {
        out += "/>";
        return;
    }
    out += ">" + esc(n.text);
    for (const auto& k : n.kids) write(*k, out, "");
    out += "</" + n.qname + ">";
}

std::string XmlTree::serialize() const {
    std::string decls;
    for (const auto& [p, uri] : ns_)
        if (p != "xml") decls += " xmlns:" + p + "=\"" + uri + "\"";
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (root_) write(*root_, out, decls);
    return out;
}

std::uint64_t XmlTree::count_from(const Node& n, const std::vector<Step>& steps, std::size_t i) const {
    const Step& s = steps[i];
    if (s.attribute) {
        std::uint64_t c = 0;
        for (const auto& a : n.attrs)
            if (a.first == s.qname) ++c;
        return c;
    }
    if (!matches(n, s)) return 0;
    if (i + 1 == steps.size()) return 1;
    if (steps[i + 1].attribute) return count_from(n, steps, i + 1);
    std::uint64_t c = 0;
    for (const auto& k : n.kids) c += count_from(*k, steps, i + 1);
    return c;
}

std::uint64_t XmlTree::count(const std::string& path) const {
    if (!root_) return 0;
    return count_from(*root_, split(path), 0);
}

SynthRecord make_record(mdaudit::SchemaId schema, const std::set<std::string>& present,
                        const std::vector<Extra>& extras) {
    const auto& reg = mdaudit::registry(schema);
    auto ns = reg.namespaces;
    if (schema == mdaudit::SchemaId::iso_19139) ns["gco"] = "http://www.isotc211.org/2005/gco";
    XmlTree tree(ns);
    tree.ensure(reg.descriptors.front().xml_paths.front().substr(
        0, reg.descriptors.front().xml_paths.front().find('/', 1)));
    for (const auto& d : reg.descriptors)
        if (present.count(d.element_id)) tree.ensure(d.xml_paths.front());
    for (const auto& e : extras) {
        if (e.fresh) tree.append(e.path, e.text);
        else tree.ensure(e.path, e.text);
    }
    SynthRecord r;
    r.xml = tree.serialize();
    for (const auto& d : reg.descriptors) {
        std::uint64_t c = 0;
        for (const auto& p : d.xml_paths) c += tree.count(p);
        if (c) r.expected[d.element_id] = c;
    }
    return r;
}

Extra doi_extra(mdaudit::SchemaId schema, const std::string& doi) {
    using mdaudit::SchemaId;
    switch (schema) {
        case SchemaId::ddi_2_5:
            return {"/ddi:codeBook/ddi:stdyDscr/ddi:citation/ddi:titlStmt/ddi:IDNo[@agency='DOI']", "doi:" + doi};
        case SchemaId::dif_10:
            return {"/dif:DIF/dif:Dataset_Citation/dif:Dataset_DOI", doi};
        case SchemaId::iso_19139:
            return {"/gmd:MD_Metadata/gmd:identificationInfo/gmd:MD_DataIdentification/gmd:citation/"
                    "gmd:CI_Citation/gmd:identifier/gmd:MD_Identifier/gmd:code",
                    "https://doi.org/" + doi};
        case SchemaId::datacite_4_6:
            break;
    }
    return {"/dc:resource/dc:identifier[@identifierType='DOI']", doi};
}

std::vector<Extra> date_extras(mdaudit::SchemaId schema, const std::string& date) {
    using mdaudit::SchemaId;
    switch (schema) {
        case SchemaId::ddi_2_5:
            return {{"/ddi:codeBook/ddi:docDscr/ddi:citation/ddi:distStmt/ddi:distDate", date}};
        case SchemaId::dif_10:
            return {{"/dif:DIF/dif:Metadata_Dates/dif:Metadata_Creation", date}};
        case SchemaId::iso_19139: {
            const std::string base =
                "/gmd:MD_Metadata/gmd:identificationInfo/gmd:MD_DataIdentification/gmd:citation/gmd:CI_Citation/"
                "gmd:date/gmd:CI_Date";
            return {{base + "/gmd:date/gco:Date", date},
                    {base + "/gmd:dateType/gmd:CI_DateTypeCode[@codeListValue='publication']", ""}};
        }
        case SchemaId::datacite_4_6:
            break;
    }
    return {{"/dc:resource/dc:dates/dc:date[@dateType='Created']", date}};
}

std::set<std::string> random_subset(const mdaudit::ElementRegistry& reg, std::mt19937& rng, double p) {
    std::bernoulli_distribution coin(p);
    std::set<std::string> out;
    for (const auto& d : reg.descriptors)
        if (coin(rng)) out.insert(d.element_id);
    return out;
}

}  // namespace synth
