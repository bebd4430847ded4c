#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mdaudit::xml {

inline constexpr const char* kXmlNs = "http://www.w3.org/XML/1998/namespace";

struct Attribute {
    std::string ns;
    std::string local;
    std::string value;
};

struct Node {
    std::string ns;
    std::string local;
    std::vector<Attribute> attrs;
    std::vector<int> children;
    int parent = -1;
    std::string text;  // direct character data only
    std::size_t begin = 0;  // byte offset of '<'
    std::size_t end = 0;    // one past the closing '>'
};

class Document {
public:
    std::vector<Node> nodes;
    int root = -1;

    const Node& node(int i) const { return nodes[static_cast<std::size_t>(i)]; }
    const Attribute* attr(int i, std::string_view ns, std::string_view local) const;
    // Concatenated character data of the subtree.
    std::string text_content(int i) const;
    std::vector<int> children_named(int i, std::string_view ns, std::string_view local) const;
    int first_child(int i, std::string_view ns, std::string_view local) const;
};

// Namespace-aware parse. Throws ParseError with line/column on malformed input.
Document parse(std::string_view bytes);

using NsMap = std::map<std::string, std::string>;

// One hit of a path: an element node, or attribute `attr` of that node.
struct Match {
    int node = -1;
    int attr = -1;
    bool operator<(const Match& o) const { return node != o.node ? node < o.node : attr < o.attr; }
    bool operator==(const Match& o) const { return node == o.node && attr == o.attr; }
};

// Location paths of the form /p:a/p:b//p:c/*/p:d[@x='v']/@p:attr.
// Unprefixed names are in no namespace; xml: is always bound.
class Path {
public:
    Path() = default;
    static Path compile(std::string_view expr, const NsMap& ns);

    std::vector<Match> evaluate(const Document& doc) const;
    // Evaluate relative to context node `ctx`; the first step matches ctx's children.
    std::vector<Match> evaluate_from(const Document& doc, int ctx) const;
    const std::string& source() const { return source_; }
    bool targets_attribute() const { return !steps_.empty() && steps_.back().attribute; }

private:
    struct Pred {
        std::string ns, local, value;
    };
    struct Step {
        bool descendant = false;
        bool attribute = false;
        bool any = false;
        std::string ns, local;
        std::vector<Pred> preds;
    };
    std::vector<Step> steps_;
    std::string source_;

    bool step_matches(const Document& doc, int n, const Step& s) const;
    void walk(const Document& doc, int n, std::size_t step, std::vector<Match>& out) const;
    void apply(const Document& doc, int n, std::size_t step, std::vector<Match>& out) const;
};

std::string value_of(const Document& doc, const Match& m);

}  // namespace mdaudit::xml
