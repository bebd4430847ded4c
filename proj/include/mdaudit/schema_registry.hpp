#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mdaudit/diagnostics.hpp"
#include "mdaudit/timeutil.hpp"
#include "mdaudit/types.hpp"
#include "mdaudit/xml.hpp"

namespace mdaudit {

struct ElementDescriptor {
    std::string element_id;
    SchemaId schema_id = SchemaId::datacite_4_6;
    std::vector<std::string> xml_paths;
    bool required = false;
    bool identifier_flag = false;
    bool recommended_flag = false;
    std::string parent;  // empty for roots
};

class ElementRegistry {
public:
    SchemaId schema_id = SchemaId::datacite_4_6;
    std::vector<ElementDescriptor> descriptors;
    xml::NsMap namespaces;
    std::vector<std::string> header_comments;

    const ElementDescriptor* find(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id) != nullptr; }
    std::size_t size() const { return descriptors.size(); }
    std::size_t count_required() const;
    std::size_t count_identifier() const;
    std::vector<std::string> ids() const;
    // Namespace URI of the document element all paths start from.
    const std::string& root_namespace() const { return root_ns_; }
    const std::vector<xml::Path>& compiled(std::size_t descriptor_index) const { return paths_[descriptor_index]; }

    // Validates invariants and compiles paths. Throws ValidationError/ConfigError.
    void finalize();

private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<xml::Path>> paths_;
    std::string root_ns_;
};

ElementRegistry parse_registry(std::string_view csv_text);
ElementRegistry load_registry(const std::string& path);
// Built-in registry from shipped data; cached, immutable.
const ElementRegistry& registry(SchemaId id);
const ElementRegistry& registry(std::string_view schema_id);

struct OccurrenceVector {
    std::string record_id;
    SchemaId schema_id = SchemaId::datacite_4_6;
    std::map<std::string, std::uint64_t> counts;

    std::uint64_t count(const std::string& e) const {
        auto it = counts.find(e);
        return it == counts.end() ? 0 : it->second;
    }
    bool has(const std::string& e) const { return counts.count(e) != 0; }
};

// Throws ParseError on malformed XML. A document element outside the
// registry namespace yields an empty vector and a diagnostic.
OccurrenceVector extract_occurrences(const RawRecord& record, const ElementRegistry& reg,
                                     Diagnostics* diag = nullptr);
OccurrenceVector extract_occurrences(const xml::Document& doc, const std::string& record_id,
                                     const ElementRegistry& reg, Diagnostics* diag = nullptr);

std::size_t distinct_elements(const OccurrenceVector& v);

// Parses a payload; older DataCite kernel namespaces are mapped onto kernel-4.
xml::Document parse_record(const RawRecord& record);

struct RecordDate {
    std::string record_id;
    Day date{};
    Granularity granularity = Granularity::day;
    std::string source_element;
};

// Absent with a diagnostic when no date element exists; ParseError when a
// date string is present but unparseable.
std::optional<RecordDate> extract_date(const RawRecord& record, Diagnostics* diag = nullptr);
std::optional<RecordDate> extract_date(const RawRecord& record, const xml::Document& doc,
                                       Diagnostics* diag = nullptr);

// Strips resolver prefixes, lowercases, trims.
std::string normalize_doi(std::string_view raw);
// First DOI-shaped substring of text, normalized.
std::optional<std::string> find_doi(std::string_view text);

struct DoiLocator {
    std::string path;
    // Optional guard: value at guard_path (relative to the matched node's
    // parent, or '@attr' on the matched node) must equal guard_value, case-insensitively.
    std::string guard_path;
    std::string guard_value;
    // Optional substring the raw value must contain.
    std::string contains;
};

struct DoiLocatorSet {
    xml::NsMap namespaces;
    std::vector<DoiLocator> locators;
};

const DoiLocatorSet& default_doi_locators(SchemaId id);

std::optional<std::string> extract_doi(const RawRecord& record);
std::optional<std::string> extract_doi(const RawRecord& record, const xml::Document& doc,
                                       const DoiLocatorSet& locators);

}  // namespace mdaudit
