#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mdaudit {

enum class SchemaId { datacite_4_6, ddi_2_5, dif_10, iso_19139 };
enum class Source { oai, datacite };

std::string to_string(SchemaId s);
std::string to_string(Source s);
SchemaId schema_from_string(std::string_view s);
Source source_from_string(std::string_view s);

const std::vector<SchemaId>& all_schemas();

using Timestamp = std::chrono::sys_seconds;
using Day = std::chrono::sys_days;

struct RawRecord {
    std::string record_id;
    std::string repository_id;
    Source source = Source::oai;
    SchemaId schema_id = SchemaId::datacite_4_6;
    std::string payload;
    std::string identifier;
    Timestamp harvested_at{};
    bool deleted = false;
    // datestamp, created, schema_version, warning, endpoint ...
    std::map<std::string, std::string> provenance;
};

}  // namespace mdaudit
