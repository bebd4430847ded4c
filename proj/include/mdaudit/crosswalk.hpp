#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mdaudit/schema_registry.hpp"

namespace mdaudit {

struct CrosswalkEntry {
    SchemaId source_schema = SchemaId::ddi_2_5;
    std::string source_element;
    std::string target_element;
};

struct OneToNGroup {
    std::string target_element;
    std::vector<std::string> source_elements;  // sorted
    std::optional<std::string> primary_source;
    bool unused = false;  // no source occurs in the corpus
};

class CrosswalkTable {
public:
    SchemaId source_schema = SchemaId::ddi_2_5;
    std::vector<CrosswalkEntry> entries;

    std::set<std::string> sources() const;
    std::set<std::string> targets() const;
    std::vector<std::string> sources_for(const std::string& target) const;
    bool maps_source(const std::string& source) const;
    bool maps_target(const std::string& target) const;

    // Set by resolve_primary_sources; keyed by target.
    std::map<std::string, OneToNGroup> resolved;
    bool is_resolved() const { return resolved_flag_; }
    void mark_resolved() { resolved_flag_ = true; }
    // The one effective source per target once resolved; all sources otherwise.
    std::vector<std::string> effective_sources(const std::string& target) const;

private:
    bool resolved_flag_ = false;
};

struct CrosswalkLoadOptions {
    // Reject tables in which a source element maps to more than one target.
    bool one_target_per_source = false;
};

CrosswalkTable load_crosswalk(std::string_view csv_text, const ElementRegistry& source_registry,
                              const ElementRegistry& datacite_registry, CrosswalkLoadOptions opts = {});
CrosswalkTable load_crosswalk_file(const std::string& path, const ElementRegistry& source_registry,
                                   const ElementRegistry& datacite_registry, CrosswalkLoadOptions opts = {});
// Reads source_schema from the first data row.
std::optional<SchemaId> peek_crosswalk_schema(std::string_view csv_text);
// Shipped table for a disciplinary schema.
const CrosswalkTable& builtin_crosswalk(SchemaId source_schema);

struct CoverageCounts {
    std::size_t n_sources = 0;
    std::size_t n_targets = 0;
    std::size_t n_required_targets = 0;
    bool operator==(const CoverageCounts&) const = default;
};

CoverageCounts coverage_counts(const CrosswalkTable& table, const ElementRegistry& datacite_registry);
std::vector<OneToNGroup> one_to_n_groups(const CrosswalkTable& table);

// Number of records in which each element occurs at least once.
std::map<std::string, std::uint64_t> record_frequencies(const std::vector<OccurrenceVector>& corpus);
void merge_frequencies(std::map<std::string, std::uint64_t>& into,
                       const std::map<std::string, std::uint64_t>& from);

CrosswalkTable resolve_primary_sources(const CrosswalkTable& table, const std::vector<OccurrenceVector>& corpus);
CrosswalkTable resolve_primary_sources(const CrosswalkTable& table,
                                       const std::map<std::string, std::uint64_t>& frequencies);

}  // namespace mdaudit
