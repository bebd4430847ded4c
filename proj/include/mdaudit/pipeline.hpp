#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mdaudit/analysis.hpp"
#include "mdaudit/corpus_store.hpp"
#include "mdaudit/datacite_client.hpp"
#include "mdaudit/http.hpp"
#include "mdaudit/oai_client.hpp"
#include "mdaudit/stats.hpp"

namespace mdaudit {

inline constexpr const char* kToolVersion = "1.0.0";

enum class ResolutionScope { per_repository, per_schema };
std::string to_string(ResolutionScope s);

struct RepositoryConfig {
    std::string id;
    SchemaId schema_id = SchemaId::ddi_2_5;
    std::string oai_endpoint;
    std::string metadata_prefix;
    std::string set_spec;
    std::string datacite_client_id;
    std::string datacite_prefix;
    std::string datacite_doi_file;
};

struct RunConfig {
    std::vector<RepositoryConfig> repositories;
    std::filesystem::path store_path;
    std::filesystem::path output_path;
    std::map<SchemaId, std::string> crosswalk_paths;  // "builtin" or a file
    double alpha = 0.05;
    Granularity min_date_granularity = Granularity::day;
    SdConvention sd_convention = SdConvention::population;
    stats::TTestKind ttest = stats::TTestKind::welch;
    ResolutionScope resolution = ResolutionScope::per_repository;
    std::string group_a_label = "a", group_b_label = "b";
    std::vector<std::string> group_a, group_b;
    std::string datacite_api = kDefaultDataCiteApi;
    std::chrono::milliseconds polite_delay{1000};
    int page_size = 100;
    std::size_t max_records = 0;
    std::uint64_t seed = 42;
};

// INI text; relative paths resolve against base_dir.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
// Throws ConfigError: crosswalks present for every schema, files exist.
void validate_config(const RunConfig& config);

struct HarvestOptions {
    std::shared_ptr<HttpTransport> transport;
    RetryPolicy retry;
    std::shared_ptr<RateLimiter> datacite_limiter;
};

struct OaiHarvestResult {
    HarvestStats stats;
    std::size_t stored = 0;
};

OaiHarvestResult harvest_oai_into(CorpusStore& store, const OaiEndpoint& endpoint, const HarvestOptions& opts,
                                  std::size_t max_records = 0, std::uint64_t seed = 0);
FetchSummary harvest_datacite_into(CorpusStore& store, const DataCiteQuery& query, const HarvestOptions& opts);

// Per-record extraction output.
struct ExtractedRecord {
    std::string record_id;
    Source source = Source::oai;
    bool deleted = false;
    Timestamp harvested_at{};
    OccurrenceVector vector;
    std::optional<RecordDate> date;
    std::optional<std::string> doi;
};

std::vector<ExtractedRecord> extract_repository(const CorpusStore& store, const std::string& repository_id,
                                                Diagnostics* diag);

struct AuditOptions {
    bool harvest = false;
    bool dry_run = false;
    HarvestOptions harvest_options;
};

struct AuditOutcome {
    std::vector<std::string> files;  // relative to output_path, sorted
    std::vector<std::string> failed_repositories;
    std::string plan;
    bool ok() const { return failed_repositories.empty(); }
};

AuditOutcome run_audit(const RunConfig& config, const AuditOptions& options = {});

std::string emit_plot_series(const AccumulationSeries& series);
AccumulationSeries parse_plot_series(const std::string& csv_text);

// Shortest round-trip decimal.
std::string format_number(double v);

}  // namespace mdaudit
