#include "mdaudit/crosswalk.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include "embedded_data.hpp"
#include "mdaudit/csv.hpp"
#include "mdaudit/error.hpp"

namespace mdaudit {

namespace {

const csv::Row kHeader{"source_schema", "source_element", "target_element"};

std::string row_prefix(std::size_t line) { return "row at line " + std::to_string(line) + ": "; }

}  // namespace

std::set<std::string> CrosswalkTable::sources() const {
    std::set<std::string> s;
    for (auto& e : entries) s.insert(e.source_element);
    return s;
}

std::set<std::string> CrosswalkTable::targets() const {
    std::set<std::string> s;
    for (auto& e : entries) s.insert(e.target_element);
    return s;
}

std::vector<std::string> CrosswalkTable::sources_for(const std::string& target) const {
    std::vector<std::string> out;
    for (auto& e : entries)
        if (e.target_element == target) out.push_back(e.source_element);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool CrosswalkTable::maps_source(const std::string& source) const {
    return std::any_of(entries.begin(), entries.end(), [&](auto& e) { return e.source_element == source; });
}

bool CrosswalkTable::maps_target(const std::string& target) const {
    return std::any_of(entries.begin(), entries.end(), [&](auto& e) { return e.target_element == target; });
}

std::vector<std::string> CrosswalkTable::effective_sources(const std::string& target) const {
    auto it = resolved.find(target);
    if (it != resolved.end() && it->second.primary_source) return {*it->second.primary_source};
    return sources_for(target);
}

CrosswalkTable load_crosswalk(std::string_view csv_text, const ElementRegistry& source_registry,
                              const ElementRegistry& datacite_registry, CrosswalkLoadOptions opts) {
    if (datacite_registry.schema_id != SchemaId::datacite_4_6)
        throw ConfigError("crosswalk target registry must be datacite-4.6");
    CrosswalkTable table;
    table.source_schema = source_registry.schema_id;
    auto doc = csv::parse(csv_text);
    if (doc.header.empty() && doc.rows.empty()) return table;
    if (doc.header != kHeader) throw ValidationError("crosswalk header must be " + csv::format_row(kHeader));
    std::set<std::pair<std::string, std::string>> pairs;
    std::map<std::string, std::size_t> source_line;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        std::size_t line = doc.line_numbers[r];
        if (row.size() != 3) throw ValidationError(row_prefix(line) + "expected 3 fields", line);
        if (row[0] != to_string(source_registry.schema_id))
            throw ValidationError(row_prefix(line) + "source_schema '" + row[0] + "' does not match registry " +
                                      to_string(source_registry.schema_id),
                                  line);
        if (!source_registry.contains(row[1]))
            throw ValidationError(row_prefix(line) + "unknown source element '" + row[1] + "'", line);
        if (!datacite_registry.contains(row[2]))
            throw ValidationError(row_prefix(line) + "unknown target element '" + row[2] + "'", line);
        if (!pairs.emplace(row[1], row[2]).second)
            throw ValidationError(row_prefix(line) + "duplicate mapping " + row[1] + " -> " + row[2], line);
        auto [it, fresh] = source_line.emplace(row[1], line);
        if (!fresh && opts.one_target_per_source)
            throw ValidationError(row_prefix(line) + "duplicate source '" + row[1] + "' (first at line " +
                                      std::to_string(it->second) + ")",
                                  line);
        table.entries.push_back({source_registry.schema_id, row[1], row[2]});
    }
    return table;
}

CrosswalkTable load_crosswalk_file(const std::string& path, const ElementRegistry& source_registry,
                                   const ElementRegistry& datacite_registry, CrosswalkLoadOptions opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open crosswalk " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_crosswalk(ss.str(), source_registry, datacite_registry, opts);
}

std::optional<SchemaId> peek_crosswalk_schema(std::string_view csv_text) {
    auto doc = csv::parse(csv_text);
    if (doc.rows.empty() || doc.rows.front().empty()) return std::nullopt;
    return schema_from_string(doc.rows.front()[0]);
}

const CrosswalkTable& builtin_crosswalk(SchemaId source_schema) {
    if (source_schema == SchemaId::datacite_4_6) throw ConfigError("no crosswalk for datacite-4.6");
    static std::once_flag flags[4];
    static CrosswalkTable tables[4];
    auto i = static_cast<std::size_t>(source_schema);
    std::call_once(flags[i], [&] {
        tables[i] = load_crosswalk(embedded::crosswalk_csv(source_schema), registry(source_schema),
                                   registry(SchemaId::datacite_4_6));
    });
    return tables[i];
}

CoverageCounts coverage_counts(const CrosswalkTable& table, const ElementRegistry& datacite_registry) {
    CoverageCounts c;
    auto targets = table.targets();
    c.n_sources = table.sources().size();
    c.n_targets = targets.size();
    for (auto& t : targets) {
        const auto* d = datacite_registry.find(t);
        if (d && d->required) ++c.n_required_targets;
    }
    return c;
}

std::vector<OneToNGroup> one_to_n_groups(const CrosswalkTable& table) {
    std::vector<OneToNGroup> out;
    for (auto& t : table.targets()) {
        auto src = table.sources_for(t);
        if (src.size() < 2) continue;
        OneToNGroup g;
        g.target_element = t;
        g.source_elements = std::move(src);
        auto it = table.resolved.find(t);
        if (it != table.resolved.end()) {
            g.primary_source = it->second.primary_source;
            g.unused = it->second.unused;
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::map<std::string, std::uint64_t> record_frequencies(const std::vector<OccurrenceVector>& corpus) {
    std::map<std::string, std::uint64_t> f;
    for (auto& v : corpus)
        for (auto& [e, n] : v.counts)
            if (n > 0) ++f[e];
    return f;
}

void merge_frequencies(std::map<std::string, std::uint64_t>& into,
                       const std::map<std::string, std::uint64_t>& from) {
    for (auto& [e, n] : from) into[e] += n;
}

CrosswalkTable resolve_primary_sources(const CrosswalkTable& table,
                                       const std::map<std::string, std::uint64_t>& frequencies) {
    CrosswalkTable out = table;
    out.resolved.clear();
    for (auto g : one_to_n_groups(table)) {
        std::string best;
        std::uint64_t best_f = 0;
        for (auto& s : g.source_elements) {  // sorted ascending
            auto it = frequencies.find(s);
            std::uint64_t f = it == frequencies.end() ? 0 : it->second;
            if (best.empty() || f > best_f) {
                best = s;
                best_f = f;
            }
        }
        g.primary_source = best;
        g.unused = best_f == 0;
        out.resolved.emplace(g.target_element, std::move(g));
    }
    out.mark_resolved();
    return out;
}

CrosswalkTable resolve_primary_sources(const CrosswalkTable& table, const std::vector<OccurrenceVector>& corpus) {
    return resolve_primary_sources(table, record_frequencies(corpus));
}

}  // namespace mdaudit
