#include "mdaudit/types.hpp"

#include "mdaudit/error.hpp"

namespace mdaudit {

std::string to_string(SchemaId s) {
    switch (s) {
        case SchemaId::datacite_4_6: return "datacite-4.6";
        case SchemaId::ddi_2_5: return "ddi-2.5";
        case SchemaId::dif_10: return "dif-10";
        case SchemaId::iso_19139: return "iso-19139";
    }
    return "unknown";
}

std::string to_string(Source s) {
    return s == Source::oai ? "oai" : "datacite";
}

SchemaId schema_from_string(std::string_view s) {
    for (auto id : all_schemas())
        if (to_string(id) == s) return id;
    throw ConfigError("unknown schema_id '" + std::string(s) + "'");
}

Source source_from_string(std::string_view s) {
    if (s == "oai") return Source::oai;
    if (s == "datacite") return Source::datacite;
    throw ConfigError("unknown source '" + std::string(s) + "'");
}

const std::vector<SchemaId>& all_schemas() {
    static const std::vector<SchemaId> v{SchemaId::datacite_4_6, SchemaId::ddi_2_5,
                                         SchemaId::dif_10, SchemaId::iso_19139};
    return v;
}

}  // namespace mdaudit
