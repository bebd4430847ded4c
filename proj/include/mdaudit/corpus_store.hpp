#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdaudit/types.hpp"

namespace mdaudit {

struct ManifestEntry {
    std::string record_id;
    std::string repository_id;
    Source source = Source::oai;
    SchemaId schema_id = SchemaId::datacite_4_6;
    std::string relative_path;
    std::string content_hash;
    Timestamp harvested_at{};
    std::string identifier;
    bool deleted = false;
    std::map<std::string, std::string> provenance;
};

using ManifestFilter = std::function<bool(const ManifestEntry&)>;

// store/<repository_id>/<source>/<record_id>.xml plus manifest.jsonl.
class CorpusStore {
public:
    static constexpr const char* kHashAlgorithm = "sha256";

    // Opens or creates the store. Throws IntegrityError on a bad manifest.
    explicit CorpusStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    // Returns the record id; idempotent for identical (repository, source, identifier, payload).
    std::string put(const RawRecord& record);

    void set_harvest_parameters(const std::map<std::string, std::string>& params);
    std::map<std::string, std::string> harvest_parameters() const;

    std::vector<ManifestEntry> entries() const;
    std::size_t size() const;

    // Yields matching records in manifest order. Throws IntegrityError when a
    // file is missing or its hash does not match.
    void scan(const ManifestFilter& filter, const std::function<void(RawRecord&&)>& sink) const;
    std::vector<RawRecord> scan(const ManifestFilter& filter) const;

    // Re-reads the manifest from disk.
    void reload();

private:
    std::filesystem::path root_;
    mutable std::mutex mu_;
    std::vector<ManifestEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_key_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::map<std::string, std::string> params_;

    void load_manifest();
    void append_line(const std::string& line);
    RawRecord read_record(const ManifestEntry& e) const;
};

ManifestFilter all_records();
ManifestFilter by_repository(std::string repository_id);
ManifestFilter by_source(Source s);
ManifestFilter both(ManifestFilter a, ManifestFilter b);

}  // namespace mdaudit
