#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "scenarios.hpp"

namespace fs = std::filesystem;
using namespace mdaudit;

namespace fixtures {

namespace {

SchemaId schema_for(const std::string& name) {
    if (name.rfind("ddi", 0) == 0) return SchemaId::ddi_2_5;
    if (name.rfind("dif", 0) == 0) return SchemaId::dif_10;
    if (name.rfind("iso", 0) == 0) return SchemaId::iso_19139;
    return SchemaId::datacite_4_6;
}

}  // namespace

HandCounted load(const std::string& name) {
    fs::path dir = fs::path(MDAUDIT_FIXTURES) / "records";
    HandCounted h;
    h.name = name;
    h.record.record_id = name;
    h.record.repository_id = "fixtures";
    h.record.schema_id = schema_for(name);
    h.record.source = h.record.schema_id == SchemaId::datacite_4_6 ? Source::datacite : Source::oai;
    h.record.payload = scenarios::read_file(dir / (name + ".xml"));
    std::istringstream in(scenarios::read_file(dir / (name + ".expected")));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, key, value;
            ls >> hash >> key >> value;
            if (key == "date" && value != "none") {
                h.date = value;
                ls >> h.granularity >> h.date_source;
            } else if (key == "doi" && value != "none") {
                h.doi = value;
            } else if (key == "diag") {
                h.diagnostics.push_back(value);
            } else if (key == "created") {
                h.record.provenance["created"] = value;
            }
            continue;
        }
        std::string element;
        std::uint64_t n = 0;
        ls >> element >> n;
        h.counts[element] = n;
    }
    return h;
}

std::vector<HandCounted> load_all() {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(fs::path(MDAUDIT_FIXTURES) / "records"))
        if (e.path().extension() == ".xml") names.push_back(e.path().stem().string());
    std::sort(names.begin(), names.end());
    std::vector<HandCounted> out;
    for (const auto& n : names) out.push_back(load(n));
    return out;
}

}  // namespace fixtures
