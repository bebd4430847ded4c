#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mdaudit/crosswalk.hpp"
#include "mdaudit/diagnostics.hpp"
#include "mdaudit/schema_registry.hpp"

namespace mdaudit {

// One side of the pairing input.
struct PairInput {
    std::string doi;  // normalized
    OccurrenceVector vector;
    std::optional<RecordDate> date;
    Timestamp harvested_at{};
    bool deleted = false;
};

struct RecordPair {
    std::string doi;
    OccurrenceVector disciplinary;
    OccurrenceVector datacite;
    std::optional<RecordDate> disciplinary_date;
    std::optional<RecordDate> datacite_date;
    bool disciplinary_deleted = false;
};

struct PairingResult {
    std::vector<RecordPair> pairs;             // sorted by DOI
    std::vector<std::string> unpaired_oai;      // DOIs, sorted
    std::vector<std::string> unpaired_datacite;
};

// Duplicates within a side collapse to the most recently harvested record.
PairingResult pair_records(const std::vector<PairInput>& oai, const std::vector<PairInput>& datacite,
                           Diagnostics* diag = nullptr);

enum class SdConvention { population, sample };
std::string to_string(SdConvention c);
SdConvention sd_convention_from_string(std::string_view s);

struct UsageProfile {
    std::string repository_id;
    std::size_t n_records = 0;
    std::map<std::string, std::uint64_t> records_with;  // exact counts
    std::map<std::string, double> per_element_coverage; // every registry element
    double mean_distinct = 0.0;
    double sd_distinct = 0.0;
    SdConvention sd_convention = SdConvention::population;

    double coverage(const std::string& e) const {
        auto it = per_element_coverage.find(e);
        return it == per_element_coverage.end() ? 0.0 : it->second;
    }
};

UsageProfile usage_profile(const std::string& repository_id, const std::vector<OccurrenceVector>& records,
                           const ElementRegistry& reg, SdConvention sd = SdConvention::population);

struct CrossRepoUsage {
    std::set<std::string> used_by_all;
    std::set<std::string> used_by_none;
};

CrossRepoUsage cross_repo_usage(const std::vector<UsageProfile>& profiles, const ElementRegistry& reg);

// Identifier-flagged elements, descending coverage, ties lexicographic.
std::vector<std::pair<std::string, double>> identifier_usage(const UsageProfile& profile,
                                                             const ElementRegistry& reg);

struct ElementImprovement {
    std::uint64_t current_count = 0;  // pairs whose DataCite record has the element
    std::uint64_t added_count = 0;    // pairs lacking it whose disciplinary record has an effective source
    std::uint64_t n_pairs = 0;
    std::vector<std::string> effective_sources;

    double current() const { return n_pairs ? static_cast<double>(current_count) / n_pairs : 0.0; }
    double added() const { return n_pairs ? static_cast<double>(added_count) / n_pairs : 0.0; }
    bool improvable() const { return added_count > 0; }
    bool above_ten_percent() const { return 10 * added_count > n_pairs; }
    bool reaches_full() const { return added_count > 0 && current_count + added_count == n_pairs; }
};

struct ImprovementCounts {
    std::size_t n_any = 0, n_gt10 = 0, n_full = 0;
    bool operator==(const ImprovementCounts&) const = default;
};

struct ImprovementReport {
    std::string repository_id;
    std::uint64_t n_pairs = 0;
    std::uint64_t excluded_deleted = 0;
    std::map<std::string, ElementImprovement> per_element;       // optional targets
    std::map<std::string, ElementImprovement> required_elements;  // reported separately
    ImprovementCounts counts;
};

ImprovementReport improvement_potential(const std::string& repository_id, const std::vector<RecordPair>& pairs,
                                        const CrosswalkTable& resolved_table, const ElementRegistry& reg,
                                        Diagnostics* diag = nullptr);

// Rounds num/den to hundredths of a percent, half up, formatted "91.46".
std::string format_percent(std::uint64_t num, std::uint64_t den);

struct RecommendedImprovement {
    std::string element_id;
    double added_coverage = 0.0;
    std::string percent;
};

// Descending added coverage, ties lexicographic.
std::vector<RecommendedImprovement> recommended_improvement(const ImprovementReport& report,
                                                            const ElementRegistry& reg);

std::set<std::string> unmatched_source_usage(const std::vector<OccurrenceVector>& vectors,
                                             const CrosswalkTable& table);
std::set<std::string> unmatched_target_usage(const std::vector<OccurrenceVector>& datacite_vectors,
                                             const CrosswalkTable& table);

struct AccumulationSeries {
    std::string repository_id;
    Source source = Source::oai;
    std::vector<std::pair<Day, std::uint64_t>> points;
    std::uint64_t n_included = 0;
    std::uint64_t n_excluded = 0;
};

// Dates coarser than min_granularity are excluded and reported in diagnostics.
AccumulationSeries accumulation_series(const std::string& repository_id, Source source,
                                       const std::vector<RecordDate>& dates, Granularity min_granularity,
                                       Diagnostics* diag = nullptr);

}  // namespace mdaudit
