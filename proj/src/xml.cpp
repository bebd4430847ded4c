#include "mdaudit/xml.hpp"

#include <expat.h>

#include <algorithm>
#include <memory>

#include "mdaudit/error.hpp"

namespace mdaudit::xml {

namespace {

constexpr char kSep = ' ';

void split_name(const XML_Char* raw, std::string& ns, std::string& local) {
    std::string_view s(raw);
    auto p = s.rfind(kSep);
    if (p == std::string_view::npos) {
        ns.clear();
        local.assign(s);
    } else {
        ns.assign(s.substr(0, p));
        local.assign(s.substr(p + 1));
    }
}

struct Builder {
    Document doc;
    std::vector<int> stack;
    XML_Parser parser = nullptr;
};

void XMLCALL on_start(void* ud, const XML_Char* name, const XML_Char** atts) {
    auto* b = static_cast<Builder*>(ud);
    Node n;
    split_name(name, n.ns, n.local);
    for (int i = 0; atts[i]; i += 2) {
        Attribute a;
        split_name(atts[i], a.ns, a.local);
        a.value = atts[i + 1];
        n.attrs.push_back(std::move(a));
    }
    n.begin = static_cast<std::size_t>(XML_GetCurrentByteIndex(b->parser));
    int idx = static_cast<int>(b->doc.nodes.size());
    if (b->stack.empty()) {
        b->doc.root = idx;
    } else {
        n.parent = b->stack.back();
        b->doc.nodes[static_cast<std::size_t>(n.parent)].children.push_back(idx);
    }
    b->doc.nodes.push_back(std::move(n));
    b->stack.push_back(idx);
}

void XMLCALL on_end(void* ud, const XML_Char*) {
    auto* b = static_cast<Builder*>(ud);
    auto& n = b->doc.nodes[static_cast<std::size_t>(b->stack.back())];
    // For <a/> expat reports count 0 at the end of the start tag.
    n.end = static_cast<std::size_t>(XML_GetCurrentByteIndex(b->parser)) +
            static_cast<std::size_t>(XML_GetCurrentByteCount(b->parser));
    b->stack.pop_back();
}

void XMLCALL on_text(void* ud, const XML_Char* s, int len) {
    auto* b = static_cast<Builder*>(ud);
    if (b->stack.empty()) return;
    b->doc.nodes[static_cast<std::size_t>(b->stack.back())].text.append(s, static_cast<std::size_t>(len));
}

}  // namespace

Document parse(std::string_view bytes) {
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> p(
        XML_ParserCreateNS(nullptr, kSep), XML_ParserFree);
    if (!p) throw Error("XML_ParserCreateNS failed");
    Builder b;
    b.parser = p.get();
    XML_SetUserData(p.get(), &b);
    XML_SetElementHandler(p.get(), on_start, on_end);
    XML_SetCharacterDataHandler(p.get(), on_text);
    if (XML_Parse(p.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE) == XML_STATUS_ERROR) {
        throw ParseError(std::string("XML parse error: ") + XML_ErrorString(XML_GetErrorCode(p.get())) +
                         " at line " + std::to_string(XML_GetCurrentLineNumber(p.get())) + ", column " +
                         std::to_string(XML_GetCurrentColumnNumber(p.get())));
    }
    if (b.doc.root < 0) throw ParseError("XML document has no root element");
    return std::move(b.doc);
}

const Attribute* Document::attr(int i, std::string_view ns, std::string_view local) const {
    for (const auto& a : node(i).attrs)
        if (a.local == local && a.ns == ns) return &a;
    return nullptr;
}

std::string Document::text_content(int i) const {
    std::string out = node(i).text;
    for (int c : node(i).children) out += text_content(c);
    return out;
}

std::vector<int> Document::children_named(int i, std::string_view ns, std::string_view local) const {
    std::vector<int> out;
    for (int c : node(i).children)
        if (node(c).local == local && node(c).ns == ns) out.push_back(c);
    return out;
}

int Document::first_child(int i, std::string_view ns, std::string_view local) const {
    for (int c : node(i).children)
        if (node(c).local == local && node(c).ns == ns) return c;
    return -1;
}

// ---------------------------------------------------------------- paths

namespace {

void resolve_qname(std::string_view q, const NsMap& ns, bool is_attr, std::string& uri, std::string& local,
                   std::string_view expr) {
    auto colon = q.find(':');
    if (colon == std::string_view::npos) {
        uri.clear();
        local.assign(q);
        (void)is_attr;
        return;
    }
    std::string prefix(q.substr(0, colon));
    local.assign(q.substr(colon + 1));
    if (prefix == "xml") {
        uri = kXmlNs;
        return;
    }
    auto it = ns.find(prefix);
    if (it == ns.end())
        throw ConfigError("unbound namespace prefix '" + prefix + "' in path " + std::string(expr));
    uri = it->second;
}

}  // namespace

Path Path::compile(std::string_view expr, const NsMap& ns) {
    Path p;
    p.source_.assign(expr);
    std::size_t i = 0;
    auto fail = [&](const std::string& why) {
        throw ConfigError("bad path '" + std::string(expr) + "': " + why);
    };
    if (expr.empty()) fail("empty");
    while (i < expr.size()) {
        Step s;
        if (expr.compare(i, 2, "//") == 0) {
            s.descendant = true;
            i += 2;
        } else if (expr[i] == '/') {
            i += 1;
        } else if (i != 0) {
            fail("expected '/'");
        }
        std::size_t j = i;
        int depth = 0;
        char quote = 0;
        while (j < expr.size()) {
            char c = expr[j];
            if (quote) {
                if (c == quote) quote = 0;
            } else if (c == '\'' || c == '"') {
                quote = c;
            } else if (c == '[') {
                ++depth;
            } else if (c == ']') {
                --depth;
            } else if (c == '/' && depth == 0) {
                break;
            }
            ++j;
        }
        std::string_view tok = expr.substr(i, j - i);
        i = j;
        if (tok.empty()) fail("empty step");
        std::string_view name = tok;
        std::string_view preds;
        if (auto b = tok.find('['); b != std::string_view::npos) {
            name = tok.substr(0, b);
            preds = tok.substr(b);
        }
        if (!name.empty() && name[0] == '@') {
            s.attribute = true;
            name.remove_prefix(1);
            if (s.descendant) fail("descendant attribute steps are not supported");
        }
        if (name == "*") {
            s.any = true;
        } else {
            if (name.empty()) fail("missing name");
            resolve_qname(name, ns, s.attribute, s.ns, s.local, expr);
        }
        while (!preds.empty()) {
            if (preds.size() < 2 || preds[0] != '[' || preds[1] != '@') fail("predicate must be [@name='value']");
            auto close = preds.find(']');
            auto eq = preds.find('=');
            if (close == std::string_view::npos || eq == std::string_view::npos || eq > close) fail("bad predicate");
            std::string_view an = preds.substr(2, eq - 2);
            std::string_view val = preds.substr(eq + 1, close - eq - 1);
            if (val.size() < 2 || (val.front() != '\'' && val.front() != '"') || val.back() != val.front())
                fail("predicate value must be quoted");
            Pred pr;
            resolve_qname(an, ns, true, pr.ns, pr.local, expr);
            pr.value.assign(val.substr(1, val.size() - 2));
            s.preds.push_back(std::move(pr));
            preds.remove_prefix(close + 1);
        }
        p.steps_.push_back(std::move(s));
    }
    for (std::size_t k = 0; k + 1 < p.steps_.size(); ++k)
        if (p.steps_[k].attribute) fail("attribute step must be last");
    return p;
}

bool Path::step_matches(const Document& doc, int n, const Step& s) const {
    const Node& nd = doc.node(n);
    if (!s.any && (nd.local != s.local || nd.ns != s.ns)) return false;
    for (const auto& pr : s.preds) {
        const Attribute* a = doc.attr(n, pr.ns, pr.local);
        if (!a || a->value != pr.value) return false;
    }
    return true;
}

void Path::walk(const Document& doc, int n, std::size_t k, std::vector<Match>& out) const {
    if (step_matches(doc, n, steps_[k])) apply(doc, n, k + 1, out);
    for (int c : doc.node(n).children) walk(doc, c, k, out);
}

void Path::apply(const Document& doc, int ctx, std::size_t k, std::vector<Match>& out) const {
    if (k == steps_.size()) {
        out.push_back({ctx, -1});
        return;
    }
    const Step& s = steps_[k];
    if (s.attribute) {
        if (ctx < 0) return;
        const auto& attrs = doc.node(ctx).attrs;
        for (std::size_t a = 0; a < attrs.size(); ++a)
            if (s.any || (attrs[a].local == s.local && attrs[a].ns == s.ns))
                out.push_back({ctx, static_cast<int>(a)});
        return;
    }
    std::vector<int> kids;
    if (ctx < 0) {
        if (doc.root >= 0) kids.push_back(doc.root);
    } else {
        kids = doc.node(ctx).children;
    }
    for (int c : kids) {
        if (s.descendant) {
            walk(doc, c, k, out);
        } else if (step_matches(doc, c, s)) {
            apply(doc, c, k + 1, out);
        }
    }
}

std::vector<Match> Path::evaluate(const Document& doc) const { return evaluate_from(doc, -1); }

std::vector<Match> Path::evaluate_from(const Document& doc, int ctx) const {
    std::vector<Match> out;
    if (steps_.empty() || (ctx < 0 && doc.root < 0)) return out;
    apply(doc, ctx, 0, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string value_of(const Document& doc, const Match& m) {
    if (m.attr >= 0) return doc.node(m.node).attrs[static_cast<std::size_t>(m.attr)].value;
    return doc.text_content(m.node);
}

}  // namespace mdaudit::xml
