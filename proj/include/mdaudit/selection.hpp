#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mdaudit/diagnostics.hpp"

namespace mdaudit {

struct RepositoryDescription {
    std::string id;
    std::set<std::string> api_types;
    std::optional<std::string> end_date;
    std::set<std::string> provider_types;
    std::set<std::string> repo_types;
    std::set<std::string> access_types;
    std::optional<std::string> country;
};

struct Rejection {
    RepositoryDescription repository;
    std::string criterion;
};

struct CandidateList {
    std::vector<RepositoryDescription> accepted;
    std::vector<Rejection> rejected;
};

// Criterion names in evaluation order.
inline const std::vector<std::string>& selection_criteria() {
    static const std::vector<std::string> c{"apiType", "endDate", "providerType", "type", "databaseAccessType"};
    return c;
}

// The first failed criterion, or empty when all pass.
std::string first_failed_criterion(const RepositoryDescription& r);
CandidateList filter_candidates(const std::vector<RepositoryDescription>& dump);

struct DumpParseResult {
    std::vector<RepositoryDescription> entries;
    Diagnostics errors;  // malformed entries, not fatal
};

// JSON: an array of objects, or an object holding one under "repositories".
DumpParseResult parse_dump_json(std::string_view text);
// re3data XML export; every element named "repository" is one entry.
DumpParseResult parse_dump_xml(std::string_view text);
// Chooses by the first non-space byte.
DumpParseResult parse_dump(std::string_view text);

std::string candidates_csv(const CandidateList& list);

}  // namespace mdaudit
