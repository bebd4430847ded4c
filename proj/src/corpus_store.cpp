#include "mdaudit/corpus_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mdaudit/codec.hpp"
#include "mdaudit/error.hpp"
#include "mdaudit/timeutil.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace mdaudit {

namespace {

constexpr const char* kManifest = "manifest.jsonl";

std::string dedupe_key(const std::string& repo, Source src, const std::string& ident, const std::string& hash) {
    std::string k = repo;
    k += '\x1f';
    k += to_string(src);
    k += '\x1f';
    k += ident;
    k += '\x1f';
    k += hash;
    return k;
}

void check_component(const std::string& s, const char* what) {
    bool ok = !s.empty() && s != "." && s != "..";
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) ok = false;
    if (!ok) throw ValidationError(std::string("invalid ") + what + " '" + s + "' for a store path");
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IntegrityError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_all(int fd, const std::string& data, const std::string& what) {
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::write(fd, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error("write " + what + ": " + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

ojson entry_json(const ManifestEntry& e) {
    ojson j;
    j["record_id"] = e.record_id;
    j["repository_id"] = e.repository_id;
    j["source"] = to_string(e.source);
    j["schema_id"] = to_string(e.schema_id);
    j["relative_path"] = e.relative_path;
    j["content_hash"] = e.content_hash;
    j["harvested_at"] = format_timestamp(e.harvested_at);
    j["identifier"] = e.identifier;
    j["deleted"] = e.deleted;
    j["provenance"] = e.provenance;
    return j;
}

ManifestEntry entry_from_json(const ojson& j) {
    ManifestEntry e;
    e.record_id = j.at("record_id").get<std::string>();
    e.repository_id = j.at("repository_id").get<std::string>();
    e.source = source_from_string(j.at("source").get<std::string>());
    e.schema_id = schema_from_string(j.at("schema_id").get<std::string>());
    e.relative_path = j.at("relative_path").get<std::string>();
    e.content_hash = j.at("content_hash").get<std::string>();
    e.harvested_at = parse_timestamp(j.at("harvested_at").get<std::string>());
    e.identifier = j.value("identifier", "");
    e.deleted = j.value("deleted", false);
    if (j.contains("provenance")) e.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
    return e;
}

}  // namespace

CorpusStore::CorpusStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
    load_manifest();
}

void CorpusStore::reload() {
    std::lock_guard lk(mu_);
    entries_.clear();
    by_key_.clear();
    by_id_.clear();
    params_.clear();
    load_manifest();
}

void CorpusStore::load_manifest() {
    fs::path mp = root_ / kManifest;
    if (!fs::exists(mp)) {
        ojson h;
        h["manifest"] = "mdaudit-corpus";
        h["format_version"] = 1;
        h["hash_algorithm"] = kHashAlgorithm;
        append_line(h.dump());
        return;
    }
    std::string text = read_all(mp);
    std::size_t pos = 0, lineno = 0;
    bool header = false;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) break;  // torn final append
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++lineno;
        if (line.empty()) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const std::exception& ex) {
            throw IntegrityError("manifest line " + std::to_string(lineno) + ": " + ex.what());
        }
        if (!header) {
            if (!j.contains("hash_algorithm") || j["hash_algorithm"] != kHashAlgorithm)
                throw IntegrityError("manifest header missing or hash algorithm is not sha256");
            header = true;
            continue;
        }
        if (j.contains("harvest_parameters")) {
            for (auto& [k, v] : j["harvest_parameters"].items()) params_[k] = v.get<std::string>();
            continue;
        }
        ManifestEntry e;
        try {
            e = entry_from_json(j);
        } catch (const std::exception& ex) {
            throw IntegrityError("manifest line " + std::to_string(lineno) + ": " + ex.what());
        }
        std::size_t idx = entries_.size();
        by_key_[dedupe_key(e.repository_id, e.source, e.identifier, e.content_hash)] = idx;
        by_id_[e.record_id] = idx;
        entries_.push_back(std::move(e));
    }
    if (!header) throw IntegrityError("manifest " + mp.string() + " has no header");
    if (pos < text.size()) fs::resize_file(mp, pos);
}

void CorpusStore::append_line(const std::string& line) {
    std::string data = line + "\n";
    fs::path mp = root_ / kManifest;
    int fd = ::open(mp.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) throw Error("open " + mp.string() + ": " + std::strerror(errno));
    try {
        write_all(fd, data, mp.string());
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
}

std::string CorpusStore::put(const RawRecord& record) {
    check_component(record.repository_id, "repository_id");
    if (record.deleted != record.payload.empty())
        throw ValidationError("record " + record.identifier + ": payload must be empty iff deleted");
    std::string hash = sha256_hex(record.payload);
    std::string key = dedupe_key(record.repository_id, record.source, record.identifier, hash);

    std::lock_guard lk(mu_);
    if (auto it = by_key_.find(key); it != by_key_.end()) return entries_[it->second].record_id;

    std::string id = sha256_hex(key).substr(0, 32);
    if (by_id_.count(id)) throw IntegrityError("record id collision for " + record.identifier);

    std::string rel = record.repository_id + "/" + to_string(record.source) + "/" + id + ".xml";
    fs::path full = root_ / rel;
    fs::create_directories(full.parent_path());
    if (fs::exists(full)) {
        if (sha256_hex(read_all(full)) != hash)
            throw IntegrityError("hash collision: " + rel + " exists with different bytes");
    } else {
        fs::path tmp = full;
        tmp += ".tmp." + std::to_string(::getpid());
        int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
        if (fd < 0) throw Error("open " + tmp.string() + ": " + std::strerror(errno));
        try {
            write_all(fd, record.payload, tmp.string());
        } catch (...) {
            ::close(fd);
            fs::remove(tmp);
            throw;
        }
        ::close(fd);
        fs::rename(tmp, full);
    }

    ManifestEntry e;
    e.record_id = id;
    e.repository_id = record.repository_id;
    e.source = record.source;
    e.schema_id = record.schema_id;
    e.relative_path = rel;
    e.content_hash = hash;
    e.harvested_at = record.harvested_at;
    e.identifier = record.identifier;
    e.deleted = record.deleted;
    e.provenance = record.provenance;
    append_line(entry_json(e).dump());
    std::size_t idx = entries_.size();
    by_key_[key] = idx;
    by_id_[id] = idx;
    entries_.push_back(std::move(e));
    return id;
}

void CorpusStore::set_harvest_parameters(const std::map<std::string, std::string>& params) {
    std::lock_guard lk(mu_);
    ojson j;
    j["harvest_parameters"] = params;
    append_line(j.dump());
    for (auto& [k, v] : params) params_[k] = v;
}

std::map<std::string, std::string> CorpusStore::harvest_parameters() const {
    std::lock_guard lk(mu_);
    return params_;
}

std::vector<ManifestEntry> CorpusStore::entries() const {
    std::lock_guard lk(mu_);
    return entries_;
}

std::size_t CorpusStore::size() const {
    std::lock_guard lk(mu_);
    return entries_.size();
}

RawRecord CorpusStore::read_record(const ManifestEntry& e) const {
    fs::path full = root_ / e.relative_path;
    if (!fs::exists(full))
        throw IntegrityError("missing file for manifest entry " + e.record_id + " (" + e.relative_path + ")");
    RawRecord r;
    r.payload = read_all(full);
    if (sha256_hex(r.payload) != e.content_hash)
        throw IntegrityError("content hash mismatch for manifest entry " + e.record_id);
    r.record_id = e.record_id;
    r.repository_id = e.repository_id;
    r.source = e.source;
    r.schema_id = e.schema_id;
    r.identifier = e.identifier;
    r.harvested_at = e.harvested_at;
    r.deleted = e.deleted;
    r.provenance = e.provenance;
    return r;
}

void CorpusStore::scan(const ManifestFilter& filter, const std::function<void(RawRecord&&)>& sink) const {
    for (const auto& e : entries())
        if (!filter || filter(e)) sink(read_record(e));
}

std::vector<RawRecord> CorpusStore::scan(const ManifestFilter& filter) const {
    std::vector<RawRecord> out;
    scan(filter, [&](RawRecord&& r) { out.push_back(std::move(r)); });
    return out;
}

ManifestFilter all_records() {
    return [](const ManifestEntry&) { return true; };
}

ManifestFilter by_repository(std::string repository_id) {
    return [id = std::move(repository_id)](const ManifestEntry& e) { return e.repository_id == id; };
}

ManifestFilter by_source(Source s) {
    return [s](const ManifestEntry& e) { return e.source == s; };
}

ManifestFilter both(ManifestFilter a, ManifestFilter b) {
    return [a = std::move(a), b = std::move(b)](const ManifestEntry& e) { return a(e) && b(e); };
}

}  // namespace mdaudit
