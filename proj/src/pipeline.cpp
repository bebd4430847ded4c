#include "mdaudit/pipeline.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <future>
#include <json.hpp>
#include <set>
#include <sstream>

#include "mdaudit/csv.hpp"
#include "mdaudit/error.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace mdaudit {

std::string to_string(ResolutionScope s) {
    return s == ResolutionScope::per_repository ? "per_repository" : "per_schema";
}

std::string format_number(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// ------------------------------------------------------------------ config

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        auto b = cur.find_first_not_of(" \t");
        auto e = cur.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
        cur.clear();
    };
    for (char c : s) {
        if (c == ',') flush();
        else cur += c;
    }
    flush();
    return out;
}

template <typename T>
T number(const std::string& key, const std::string& v) {
    try {
        if constexpr (std::is_floating_point_v<T>) return static_cast<T>(std::stod(v));
        else return static_cast<T>(std::stoull(v));
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path x(p);
    return x.is_absolute() ? x : base / x;
}

}  // namespace

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
    boost::property_tree::ptree pt;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig c;
    c.store_path = base_dir / "store";
    c.output_path = base_dir / "report";
    for (const auto& [section, body] : pt) {
        if (section == "run") {
            for (const auto& [k, node] : body) {
                const std::string v = node.data();
                if (k == "store") c.store_path = resolve(base_dir, v);
                else if (k == "output") c.output_path = resolve(base_dir, v);
                else if (k == "alpha") c.alpha = number<double>(k, v);
                else if (k == "min_date_granularity") c.min_date_granularity = granularity_from_string(v);
                else if (k == "sd_convention") c.sd_convention = sd_convention_from_string(v);
                else if (k == "ttest") {
                    if (v == "welch") c.ttest = stats::TTestKind::welch;
                    else if (v == "pooled") c.ttest = stats::TTestKind::pooled;
                    else throw ConfigError("ttest must be welch or pooled");
                } else if (k == "resolution") {
                    if (v == "per_repository") c.resolution = ResolutionScope::per_repository;
                    else if (v == "per_schema") c.resolution = ResolutionScope::per_schema;
                    else throw ConfigError("resolution must be per_repository or per_schema");
                } else if (k == "datacite_api") c.datacite_api = v;
                else if (k == "polite_delay_ms") c.polite_delay = std::chrono::milliseconds(number<long long>(k, v));
                else if (k == "page_size") c.page_size = number<int>(k, v);
                else if (k == "max_records") c.max_records = number<std::size_t>(k, v);
                else if (k == "seed") c.seed = number<std::uint64_t>(k, v);
                else throw ConfigError("unknown key [run] " + k);
            }
        } else if (section == "crosswalk") {
            for (const auto& [k, node] : body) {
                auto sid = schema_from_string(k);
                std::string v = node.data();
                c.crosswalk_paths[sid] = v == "builtin" ? v : resolve(base_dir, v).string();
            }
        } else if (section == "groups") {
            for (const auto& [k, node] : body) {
                if (k == "a") c.group_a = split_list(node.data());
                else if (k == "b") c.group_b = split_list(node.data());
                else if (k == "a_label") c.group_a_label = node.data();
                else if (k == "b_label") c.group_b_label = node.data();
                else throw ConfigError("unknown key [groups] " + k);
            }
        } else if (section.rfind("repository:", 0) == 0) {
            RepositoryConfig r;
            r.id = section.substr(11);
            bool have_schema = false;
            for (const auto& [k, node] : body) {
                const std::string v = node.data();
                if (k == "schema") {
                    r.schema_id = schema_from_string(v);
                    have_schema = true;
                } else if (k == "oai_endpoint") r.oai_endpoint = v;
                else if (k == "metadata_prefix") r.metadata_prefix = v;
                else if (k == "set") r.set_spec = v;
                else if (k == "datacite_client_id") r.datacite_client_id = v;
                else if (k == "datacite_prefix") r.datacite_prefix = v;
                else if (k == "datacite_doi_file") r.datacite_doi_file = resolve(base_dir, v).string();
                else throw ConfigError("unknown key [" + section + "] " + k);
            }
            if (!have_schema) throw ConfigError("[" + section + "] needs a schema");
            c.repositories.push_back(std::move(r));
        } else {
            throw ConfigError("unknown config section [" + section + "]");
        }
    }
    std::sort(c.repositories.begin(), c.repositories.end(), [](auto& a, auto& b) { return a.id < b.id; });
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void validate_config(const RunConfig& c) {
    if (c.repositories.empty()) throw ConfigError("config lists no repositories");
    std::set<std::string> ids;
    for (const auto& r : c.repositories) {
        if (r.id.empty()) throw ConfigError("repository with empty id");
        if (!ids.insert(r.id).second) throw ConfigError("duplicate repository " + r.id);
        if (r.schema_id == SchemaId::datacite_4_6)
            throw ConfigError("repository " + r.id + ": disciplinary schema must not be datacite-4.6");
        auto it = c.crosswalk_paths.find(r.schema_id);
        if (it == c.crosswalk_paths.end())
            throw ConfigError("repository " + r.id + ": no crosswalk configured for " + to_string(r.schema_id));
        if (it->second != "builtin" && !fs::exists(it->second))
            throw ConfigError("crosswalk file does not exist: " + it->second);
        if (!r.datacite_doi_file.empty() && !fs::exists(r.datacite_doi_file))
            throw ConfigError("DOI file does not exist: " + r.datacite_doi_file);
    }
    for (const auto* g : {&c.group_a, &c.group_b})
        for (const auto& id : *g)
            if (!ids.count(id)) throw ConfigError("group member " + id + " is not a configured repository");
    if (!(c.alpha > 0.0)) throw ConfigError("alpha must be positive");
}

// ----------------------------------------------------------------- harvest

OaiHarvestResult harvest_oai_into(CorpusStore& store, const OaiEndpoint& endpoint, const HarvestOptions& opts,
                                  std::size_t max_records, std::uint64_t seed) {
    OaiClient client(endpoint, opts.transport ? opts.transport : make_default_transport(), opts.retry);
    OaiHarvestResult res;
    std::map<std::string, std::string> params{
        {"oai:" + endpoint.repository_id + ":endpoint", endpoint.base_url},
        {"oai:" + endpoint.repository_id + ":metadata_prefix", endpoint.metadata_prefix},
        {"oai:" + endpoint.repository_id + ":set", endpoint.set_spec.value_or("")},
        {"oai:" + endpoint.repository_id + ":max_records", std::to_string(max_records)},
    };
    if (max_records > 0) {
        ReservoirSampler sampler(max_records, seed);
        res.stats = client.harvest_all([&](RawRecord&& r) { sampler.offer(std::move(r)); });
        for (auto& r : sampler.take()) {
            store.put(r);
            ++res.stored;
        }
        params["oai:" + endpoint.repository_id + ":seed"] = std::to_string(seed);
        params["oai:" + endpoint.repository_id + ":records_seen"] = std::to_string(sampler.seen());
    } else {
        res.stats = client.harvest_all([&](RawRecord&& r) {
            store.put(r);
            ++res.stored;
        });
    }
    store.set_harvest_parameters(params);
    return res;
}

FetchSummary harvest_datacite_into(CorpusStore& store, const DataCiteQuery& query, const HarvestOptions& opts) {
    auto limiter = opts.datacite_limiter ? opts.datacite_limiter
                                         : std::make_shared<RateLimiter>(std::chrono::milliseconds(0));
    DataCiteClient client(opts.transport ? opts.transport : make_default_transport(), limiter, opts.retry);
    auto summary = client.fetch(query, [&](RawRecord&& r) { store.put(r); });
    std::string sel = query.selector == DataCiteQuery::Selector::client_id    ? "client-id=" + query.client_id
                      : query.selector == DataCiteQuery::Selector::doi_prefix ? "prefix=" + query.doi_prefix
                                                                              : "doi_list";
    store.set_harvest_parameters({
        {"datacite:" + query.repository_id + ":selector", sel},
        {"datacite:" + query.repository_id + ":api_base", query.api_base},
        {"datacite:" + query.repository_id + ":page_size", std::to_string(query.page_size)},
        {"datacite:" + query.repository_id + ":missing", std::to_string(summary.missing.size())},
    });
    return summary;
}

// -------------------------------------------------------------- extraction

std::vector<ExtractedRecord> extract_repository(const CorpusStore& store, const std::string& repository_id,
                                                Diagnostics* diag) {
    std::vector<ExtractedRecord> out;
    store.scan(by_repository(repository_id), [&](RawRecord&& r) {
        ExtractedRecord x;
        x.record_id = r.record_id;
        x.source = r.source;
        x.deleted = r.deleted;
        x.harvested_at = r.harvested_at;
        x.vector.record_id = r.record_id;
        x.vector.schema_id = r.schema_id;
        if (r.deleted) {
            out.push_back(std::move(x));
            return;
        }
        xml::Document doc;
        try {
            doc = parse_record(r);
        } catch (const ParseError& e) {
            note(diag, r.record_id, "parse_error", e.what());
            return;
        }
        x.vector = extract_occurrences(doc, r.record_id, registry(r.schema_id), diag);
        try {
            x.date = extract_date(r, doc, diag);
        } catch (const ParseError& e) {
            note(diag, r.record_id, "date_error", e.what());
        }
        x.doi = extract_doi(r, doc, default_doi_locators(r.schema_id));
        if (!x.doi) note(diag, r.record_id, "no_doi", "no DOI found");
        out.push_back(std::move(x));
    });
    return out;
}

// ------------------------------------------------------------------- plots

std::string emit_plot_series(const AccumulationSeries& series) {
    std::string out = "day,cumulative_count\n";
    for (const auto& [d, n] : series.points) out += format_day(d) + "," + std::to_string(n) + "\n";
    return out;
}

AccumulationSeries parse_plot_series(const std::string& text) {
    auto doc = csv::parse(text);
    if (doc.header != csv::Row{"day", "cumulative_count"}) throw ParseError("plot series header mismatch");
    AccumulationSeries s;
    for (const auto& row : doc.rows) {
        if (row.size() != 2) throw ParseError("plot series row must have 2 fields");
        s.points.emplace_back(parse_day(row[0]), std::stoull(row[1]));
    }
    if (!s.points.empty()) s.n_included = s.points.back().second;
    return s;
}

// ------------------------------------------------------------------- audit

namespace {

struct RepoWork {
    const RepositoryConfig* cfg = nullptr;
    std::vector<ExtractedRecord> records;
    Diagnostics diag;
    std::string error;
    std::map<std::string, std::uint64_t> frequencies;
    std::map<std::string, std::string> files;  // relative path -> content
    std::optional<UsageProfile> profile;
    std::vector<OccurrenceVector> datacite_vectors;
    ojson summary = ojson::object();
};

std::string bool_str(bool b) { return b ? "true" : "false"; }

std::string usage_csv(const UsageProfile& p, const ElementRegistry& reg) {
    csv::Writer w;
    w.comment("repository=" + p.repository_id);
    w.comment("n_records=" + std::to_string(p.n_records));
    w.comment("mean_distinct=" + format_number(p.mean_distinct));
    w.comment("sd_distinct=" + format_number(p.sd_distinct));
    w.comment("sd_convention=" + to_string(p.sd_convention));
    w.row({"element", "required", "records_with", "coverage"});
    for (const auto& d : reg.descriptors) {
        auto it = p.records_with.find(d.element_id);
        std::uint64_t k = it == p.records_with.end() ? 0 : it->second;
        w.row({d.element_id, bool_str(d.required), std::to_string(k), format_number(p.coverage(d.element_id))});
    }
    return w.str();
}

std::string identifier_csv(const UsageProfile& p, const ElementRegistry& reg) {
    csv::Writer w;
    w.row({"element", "records_with", "coverage", "coverage_percent"});
    for (const auto& [e, cov] : identifier_usage(p, reg)) {
        auto it = p.records_with.find(e);
        std::uint64_t k = it == p.records_with.end() ? 0 : it->second;
        w.row({e, std::to_string(k), format_number(cov), format_percent(k, p.n_records)});
    }
    return w.str();
}

std::string improvement_csv(const ImprovementReport& r, const ElementRegistry& reg) {
    csv::Writer w;
    w.comment("n_pairs=" + std::to_string(r.n_pairs));
    w.comment("excluded_deleted=" + std::to_string(r.excluded_deleted));
    w.comment("n_any=" + std::to_string(r.counts.n_any) + ",n_gt10=" + std::to_string(r.counts.n_gt10) +
              ",n_full=" + std::to_string(r.counts.n_full));
    w.row({"element", "required", "recommended", "effective_source", "current_count", "added_count", "n_pairs",
           "current_coverage", "added_coverage", "added_percent", "reaches_full"});
    auto emit = [&](const std::map<std::string, ElementImprovement>& m) {
        for (const auto& [e, imp] : m) {
            const auto* d = reg.find(e);
            std::string src;
            for (const auto& s : imp.effective_sources) src += (src.empty() ? "" : "|") + s;
            w.row({e, bool_str(d->required), bool_str(d->recommended_flag), src, std::to_string(imp.current_count),
                   std::to_string(imp.added_count), std::to_string(imp.n_pairs), format_number(imp.current()),
                   format_number(imp.added()), format_percent(imp.added_count, imp.n_pairs),
                   bool_str(imp.reaches_full())});
        }
    };
    emit(r.per_element);
    emit(r.required_elements);
    return w.str();
}

std::string element_list_csv(const std::set<std::string>& elements,
                             const std::map<std::string, std::uint64_t>& freq) {
    csv::Writer w;
    w.row({"element", "records_with"});
    for (const auto& e : elements) {
        auto it = freq.find(e);
        w.row({e, std::to_string(it == freq.end() ? 0 : it->second)});
    }
    return w.str();
}

std::string accumulation_csv(const std::vector<AccumulationSeries>& series) {
    csv::Writer w;
    for (const auto& s : series)
        w.comment(to_string(s.source) + " included=" + std::to_string(s.n_included) +
                  " excluded=" + std::to_string(s.n_excluded));
    w.row({"source", "day", "cumulative_count"});
    for (const auto& s : series)
        for (const auto& [d, n] : s.points) w.row({to_string(s.source), format_day(d), std::to_string(n)});
    return w.str();
}

ojson diag_summary(const Diagnostics& d) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& x : d) ++counts[x.code];
    ojson j = ojson::object();
    for (auto& [k, v] : counts) j[k] = v;
    return j;
}

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out << content;
}

std::string plan_text(const RunConfig& c, const AuditOptions& o, std::size_t store_entries) {
    std::ostringstream s;
    s << "store: " << c.store_path.string() << " (" << store_entries << " manifest entries)\n";
    s << "output: " << c.output_path.string() << "\n";
    for (const auto& r : c.repositories) {
        s << "repository " << r.id << " [" << to_string(r.schema_id) << "]\n";
        if (o.harvest) {
            s << "  harvest oai " << r.oai_endpoint << " prefix=" << r.metadata_prefix << "\n";
            s << "  harvest datacite "
              << (!r.datacite_client_id.empty() ? "client-id=" + r.datacite_client_id
                  : !r.datacite_prefix.empty()  ? "prefix=" + r.datacite_prefix
                                                : "doi-file=" + r.datacite_doi_file)
              << "\n";
        }
        s << "  crosswalk " << c.crosswalk_paths.at(r.schema_id) << "\n";
        s << "  emit usage_profile, identifier_usage, improvement, unmatched_source, unmatched_target, accumulation\n";
    }
    s << "cross-repository: used_by_all, used_by_none, ttest (" << stats::to_string(c.ttest) << ", alpha="
      << format_number(c.alpha) << ")\n";
    return s.str();
}

}  // namespace

AuditOutcome run_audit(const RunConfig& config, const AuditOptions& options) {
    validate_config(config);
    const auto& dc_reg = registry(SchemaId::datacite_4_6);
    std::map<SchemaId, CrosswalkTable> tables;
    for (const auto& r : config.repositories) {
        if (tables.count(r.schema_id)) continue;
        const auto& path = config.crosswalk_paths.at(r.schema_id);
        tables[r.schema_id] = path == "builtin" ? builtin_crosswalk(r.schema_id)
                                                : load_crosswalk_file(path, registry(r.schema_id), dc_reg);
    }

    AuditOutcome outcome;
    if (options.dry_run) {
        std::size_t n = fs::exists(config.store_path / "manifest.jsonl") ? CorpusStore(config.store_path).size() : 0;
        outcome.plan = plan_text(config, options, n);
        return outcome;
    }
    if (!options.harvest && (!fs::exists(config.store_path / "manifest.jsonl") ||
                             CorpusStore(config.store_path).size() == 0))
        throw ConfigError("store " + config.store_path.string() + " is empty; run with --harvest");

    std::string started = format_timestamp(now_seconds());
    CorpusStore store(config.store_path);

    std::vector<RepoWork> work(config.repositories.size());
    for (std::size_t i = 0; i < work.size(); ++i) work[i].cfg = &config.repositories[i];

    if (options.harvest) {
        HarvestOptions hopt = options.harvest_options;
        if (!hopt.datacite_limiter)
            hopt.datacite_limiter = std::make_shared<RateLimiter>(std::chrono::milliseconds(0));
        std::vector<std::future<void>> jobs;
        for (auto& w : work) {
            jobs.push_back(std::async(std::launch::async, [&, hopt] {
                const auto& r = *w.cfg;
                try {
                    if (!r.oai_endpoint.empty()) {
                        OaiEndpoint ep{r.oai_endpoint, r.metadata_prefix,
                                       r.set_spec.empty() ? std::nullopt : std::optional<std::string>(r.set_spec),
                                       config.polite_delay, r.id, r.schema_id};
                        harvest_oai_into(store, ep, hopt, config.max_records, config.seed);
                    }
                    DataCiteQuery q;
                    if (!r.datacite_client_id.empty()) q = DataCiteQuery::for_client(r.datacite_client_id);
                    else if (!r.datacite_prefix.empty()) q = DataCiteQuery::for_prefix(r.datacite_prefix);
                    else if (!r.datacite_doi_file.empty()) {
                        std::ifstream in(r.datacite_doi_file);
                        std::vector<std::string> dois;
                        for (std::string line; std::getline(in, line);)
                            if (!line.empty()) dois.push_back(line);
                        q = DataCiteQuery::for_dois(std::move(dois));
                    } else {
                        return;
                    }
                    q.repository_id = r.id;
                    q.page_size = config.page_size;
                    q.api_base = datacite_api_base(config.datacite_api);
                    auto s = harvest_datacite_into(store, q, hopt);
                    for (auto& d : s.errors) w.diag.push_back(d);
                    for (auto& m : s.missing) note(&w.diag, m, "missing_doi", "DataCite 404");
                } catch (const std::exception& e) {
                    w.error = std::string("harvest: ") + e.what();
                }
            }));
        }
        for (auto& j : jobs) j.get();
    }

    // phase 1: extraction
    {
        std::vector<std::future<void>> jobs;
        for (auto& w : work) {
            if (!w.error.empty()) continue;
            jobs.push_back(std::async(std::launch::async, [&] {
                try {
                    w.records = extract_repository(store, w.cfg->id, &w.diag);
                    std::vector<OccurrenceVector> oai;
                    for (auto& x : w.records)
                        if (x.source == Source::oai && !x.deleted) oai.push_back(x.vector);
                    w.frequencies = record_frequencies(oai);
                } catch (const std::exception& e) {
                    w.error = std::string("extract: ") + e.what();
                }
            }));
        }
        for (auto& j : jobs) j.get();
    }

    std::map<SchemaId, std::map<std::string, std::uint64_t>> schema_freq;
    for (auto& w : work)
        if (w.error.empty()) merge_frequencies(schema_freq[w.cfg->schema_id], w.frequencies);

    // phase 2: per-repository analysis
    {
        std::vector<std::future<void>> jobs;
        for (auto& w : work) {
            if (!w.error.empty()) continue;
            jobs.push_back(std::async(std::launch::async, [&] {
                try {
                    const auto& r = *w.cfg;
                    const auto& table = tables.at(r.schema_id);
                    const auto& freq = config.resolution == ResolutionScope::per_repository
                                           ? w.frequencies
                                           : schema_freq.at(r.schema_id);
                    auto resolved = resolve_primary_sources(table, freq);

                    std::vector<PairInput> oai_in, dc_in;
                    std::vector<OccurrenceVector> oai_vectors;
                    std::vector<RecordDate> oai_dates, dc_dates;
                    std::size_t oai_n = 0, oai_deleted = 0;
                    for (auto& x : w.records) {
                        if (x.source == Source::oai) {
                            ++oai_n;
                            if (x.deleted) {
                                ++oai_deleted;
                                continue;
                            }
                            oai_vectors.push_back(x.vector);
                            if (x.date) oai_dates.push_back(*x.date);
                            if (x.doi) oai_in.push_back({*x.doi, x.vector, x.date, x.harvested_at, false});
                        } else {
                            w.datacite_vectors.push_back(x.vector);
                            if (x.date) dc_dates.push_back(*x.date);
                            if (x.doi) dc_in.push_back({*x.doi, x.vector, x.date, x.harvested_at, false});
                        }
                    }
                    auto pairing = pair_records(oai_in, dc_in, &w.diag);
                    auto profile = usage_profile(r.id, w.datacite_vectors, dc_reg, config.sd_convention);
                    auto improvement = improvement_potential(r.id, pairing.pairs, resolved, dc_reg, &w.diag);
                    auto unmatched_src = unmatched_source_usage(oai_vectors, table);
                    auto unmatched_tgt = unmatched_target_usage(w.datacite_vectors, table);
                    std::vector<AccumulationSeries> series{
                        accumulation_series(r.id, Source::oai, oai_dates, config.min_date_granularity, &w.diag),
                        accumulation_series(r.id, Source::datacite, dc_dates, config.min_date_granularity,
                                            &w.diag)};

                    const std::string dir = r.id + "/";
                    w.files[dir + "usage_profile.csv"] = usage_csv(profile, dc_reg);
                    w.files[dir + "identifier_usage.csv"] = identifier_csv(profile, dc_reg);
                    w.files[dir + "improvement.csv"] = improvement_csv(improvement, dc_reg);
                    w.files[dir + "unmatched_source.csv"] = element_list_csv(unmatched_src, w.frequencies);
                    w.files[dir + "unmatched_target.csv"] =
                        element_list_csv(unmatched_tgt, record_frequencies(w.datacite_vectors));
                    w.files[dir + "accumulation.csv"] = accumulation_csv(series);

                    ojson groups = ojson::array();
                    for (const auto& g : one_to_n_groups(resolved)) {
                        ojson jg;
                        jg["target"] = g.target_element;
                        jg["primary_source"] = g.primary_source.value_or("");
                        jg["unused"] = g.unused;
                        groups.push_back(jg);
                    }
                    w.summary["oai_records"] = oai_n;
                    w.summary["oai_deleted"] = oai_deleted;
                    w.summary["datacite_records"] = w.datacite_vectors.size();
                    w.summary["pairs"] = pairing.pairs.size();
                    w.summary["unpaired_oai"] = pairing.unpaired_oai.size();
                    w.summary["unpaired_datacite"] = pairing.unpaired_datacite.size();
                    w.summary["improvement_counts"] = {{"n_any", improvement.counts.n_any},
                                                       {"n_gt10", improvement.counts.n_gt10},
                                                       {"n_full", improvement.counts.n_full}};
                    w.summary["primary_sources"] = groups;
                    w.profile = std::move(profile);
                } catch (const std::exception& e) {
                    w.error = std::string("analysis: ") + e.what();
                    w.files.clear();
                }
            }));
        }
        for (auto& j : jobs) j.get();
    }

    // cross-repository
    std::map<std::string, std::string> files;
    std::vector<UsageProfile> profiles;
    for (auto& w : work) {
        if (!w.error.empty()) {
            outcome.failed_repositories.push_back(w.cfg->id);
            continue;
        }
        profiles.push_back(*w.profile);
        files.insert(w.files.begin(), w.files.end());
    }
    std::set<std::string> all, none;
    if (!profiles.empty()) {
        auto u = cross_repo_usage(profiles, dc_reg);
        all = u.used_by_all;
        none = u.used_by_none;
    }
    {
        csv::Writer w;
        w.row({"element"});
        for (auto& e : all) w.row({e});
        files["used_by_all.csv"] = w.str();
    }
    {
        csv::Writer w;
        w.row({"element"});
        for (auto& e : none) w.row({e});
        files["used_by_none.csv"] = w.str();
    }
    {
        std::vector<OccurrenceVector> ga, gb;
        std::set<std::string> a(config.group_a.begin(), config.group_a.end());
        std::set<std::string> b(config.group_b.begin(), config.group_b.end());
        for (auto& w : work) {
            if (!w.error.empty()) continue;
            if (!a.count(w.cfg->id) && !b.count(w.cfg->id)) continue;
            auto& dst = a.count(w.cfg->id) ? ga : gb;
            dst.insert(dst.end(), w.datacite_vectors.begin(), w.datacite_vectors.end());
        }
        csv::Writer w;
        w.comment("group_a=" + config.group_a_label + " (n=" + std::to_string(ga.size()) + ") group_b=" +
                  config.group_b_label + " (n=" + std::to_string(gb.size()) + ") test=" +
                  stats::to_string(config.ttest) + " alpha=" + format_number(config.alpha));
        w.row({"element", "mean_a", "sd_a", "mean_b", "sd_b", "t", "df", "p"});
        if (ga.size() >= 2 && gb.size() >= 2) {
            for (const auto& t : stats::group_compare(ga, gb, stats::default_test_elements(dc_reg), config.alpha,
                                                      config.ttest))
                w.row({t.element_id, format_number(t.mean_a), format_number(t.sd_a), format_number(t.mean_b),
                       format_number(t.sd_b), format_number(t.t), format_number(t.df), format_number(t.p)});
        }
        files["ttest.csv"] = w.str();
    }

    for (const auto& [rel, content] : files) {
        write_file(config.output_path / rel, content);
        outcome.files.push_back(rel);
    }

    ojson m;
    m["tool"] = "mdaudit";
    m["version"] = kToolVersion;
    m["started_at"] = started;
    m["finished_at"] = format_timestamp(now_seconds());
    ojson cfg;
    cfg["store"] = config.store_path.string();
    cfg["alpha"] = config.alpha;
    cfg["min_date_granularity"] = to_string(config.min_date_granularity);
    cfg["groups"] = {{"a", {{"label", config.group_a_label}, {"members", config.group_a}}},
                     {"b", {{"label", config.group_b_label}, {"members", config.group_b}}}};
    ojson cws = ojson::object();
    for (auto& [s, p] : config.crosswalk_paths) cws[to_string(s)] = p;
    cfg["crosswalks"] = cws;
    ojson repos = ojson::array();
    for (const auto& r : config.repositories) {
        repos.push_back({{"id", r.id},
                         {"schema", to_string(r.schema_id)},
                         {"oai_endpoint", r.oai_endpoint},
                         {"metadata_prefix", r.metadata_prefix},
                         {"datacite_client_id", r.datacite_client_id},
                         {"datacite_prefix", r.datacite_prefix}});
    }
    cfg["repositories"] = repos;
    cfg["harvest"] = options.harvest;
    m["config"] = cfg;
    m["design_decisions"] = {
        {"sd_convention", to_string(config.sd_convention)},
        {"usage_profile_records", "all DataCite records of the repository"},
        {"t_test", stats::to_string(config.ttest)},
        {"t_test_elements", "optional root elements and identifier-flagged elements"},
        {"absent_element_count", "0"},
        {"primary_source_frequency", "records containing the element at least once"},
        {"primary_source_tie_break", "lexicographic element_id"},
        {"primary_source_scope", to_string(config.resolution)},
        {"optional_elements", "non-required DataCite 4.6 descriptors"},
        {"improvement_full", "resulting coverage 1.0 with added coverage > 0 (ambiguous in source table)"},
        {"attribute_counting", "per occurrence"},
        {"percent_rounding", "half up to 2 decimals at emission"},
        {"min_date_granularity", to_string(config.min_date_granularity)},
    };
    ojson rep = ojson::object();
    for (auto& w : work) {
        ojson j = w.summary;
        j["status"] = w.error.empty() ? "ok" : "failed";
        if (!w.error.empty()) j["error"] = w.error;
        j["diagnostics"] = diag_summary(w.diag);
        rep[w.cfg->id] = j;
    }
    m["repositories"] = rep;
    ojson fl = ojson::array();
    for (const auto& rel : outcome.files) {
        ojson f;
        f["path"] = rel;
        auto slash = rel.find('/');
        std::string name = slash == std::string::npos ? rel : rel.substr(slash + 1);
        std::string repo = slash == std::string::npos ? "" : rel.substr(0, slash);
        static const std::map<std::string, std::string> ops{
            {"usage_profile.csv", "usage_profile"},
            {"identifier_usage.csv", "identifier_usage"},
            {"improvement.csv", "resolve_primary_sources+pair_records+improvement_potential"},
            {"unmatched_source.csv", "unmatched_source_usage"},
            {"unmatched_target.csv", "unmatched_target_usage"},
            {"accumulation.csv", "extract_date+accumulation_series"},
            {"used_by_all.csv", "cross_repo_usage"},
            {"used_by_none.csv", "cross_repo_usage"},
            {"ttest.csv", "group_compare"},
        };
        f["operation"] = ops.at(name);
        if (!repo.empty()) {
            const auto* rc = &*std::find_if(config.repositories.begin(), config.repositories.end(),
                                            [&](auto& r) { return r.id == repo; });
            f["inputs"] = {"store:" + repo + "/oai", "store:" + repo + "/datacite",
                           "registry:datacite-4.6", "registry:" + to_string(rc->schema_id),
                           "crosswalk:" + config.crosswalk_paths.at(rc->schema_id)};
        } else if (name == "ttest.csv") {
            f["inputs"] = {"groups.a", "groups.b", "registry:datacite-4.6"};
        } else {
            f["inputs"] = {"usage_profile:*"};
        }
        fl.push_back(f);
    }
    m["files"] = fl;
    write_file(config.output_path / "run_manifest.json", m.dump(2) + "\n");
    return outcome;
}

}  // namespace mdaudit
