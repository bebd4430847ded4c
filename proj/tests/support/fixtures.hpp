#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdaudit/schema_registry.hpp"

namespace fixtures {

struct HandCounted {
    std::string name;
    mdaudit::RawRecord record;
    std::map<std::string, std::uint64_t> counts;
    std::optional<std::string> date;  // YYYY-MM-DD
    std::string granularity;
    std::string date_source;
    std::optional<std::string> doi;
    std::vector<std::string> diagnostics;
};

std::vector<HandCounted> load_all();
HandCounted load(const std::string& name);

}  // namespace fixtures
