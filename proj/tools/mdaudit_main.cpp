#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mdaudit/crosswalk.hpp"
#include "mdaudit/csv.hpp"
#include "mdaudit/error.hpp"
#include "mdaudit/pipeline.hpp"
#include "mdaudit/selection.hpp"

using namespace mdaudit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

stats::GroupSummary summary_arg(const std::string& label, const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, ',');) parts.push_back(x);
    if (parts.size() != 3) throw ConfigError("expected n,mean,sd for group " + label);
    try {
        return {label, std::stoul(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
    } catch (const std::exception&) {
        throw ConfigError("bad numbers for group " + label);
    }
}

void print_diagnostics(const Diagnostics& d) {
    for (const auto& x : d) std::cerr << "warning: " << x.subject << ": " << x.code << ": " << x.message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metadata completeness audit for disciplinary repositories and their DataCite records"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    // select
    auto* sel = app.add_subcommand("select", "Filter a registry dump to candidate repositories");
    std::string dump_path, sel_out;
    sel->add_option("--dump", dump_path, "re3data dump (JSON or XML)")->required();
    sel->add_option("--out", sel_out, "candidate CSV")->required();

    // harvest
    auto* harvest = app.add_subcommand("harvest", "Harvest records into a corpus store");
    harvest->require_subcommand(1);
    auto* h_oai = harvest->add_subcommand("oai", "OAI-PMH ListRecords");
    std::string endpoint, prefix, set_spec, store_path, repository, schema = "ddi-2.5";
    std::size_t max_records = 0;
    std::uint64_t seed = 42;
    long long delay_ms = 1000;
    h_oai->add_option("--endpoint", endpoint)->required();
    h_oai->add_option("--prefix", prefix)->required();
    h_oai->add_option("--set", set_spec);
    h_oai->add_option("--max-records", max_records, "reservoir-sample this many records");
    h_oai->add_option("--seed", seed);
    h_oai->add_option("--store", store_path)->required();
    h_oai->add_option("--repository", repository)->required();
    h_oai->add_option("--schema", schema);
    h_oai->add_option("--delay-ms", delay_ms, "pause between requests");

    auto* h_dc = harvest->add_subcommand("datacite", "DataCite REST API");
    std::string client_id, doi_prefix, doi_file, api_base;
    int page_size = 100;
    auto* o_client = h_dc->add_option("--client-id", client_id);
    auto* o_prefix = h_dc->add_option("--prefix", doi_prefix);
    auto* o_file = h_dc->add_option("--doi-file", doi_file);
    o_client->excludes(o_prefix)->excludes(o_file);
    o_prefix->excludes(o_file);
    h_dc->add_option("--store", store_path)->required();
    h_dc->add_option("--repository", repository)->required();
    h_dc->add_option("--page-size", page_size);
    h_dc->add_option("--api-base", api_base);

    // extract
    auto* ext = app.add_subcommand("extract", "Per-record element occurrence counts");
    std::string ext_out;
    ext->add_option("--store", store_path)->required();
    ext->add_option("--repository", repository);
    ext->add_option("--out", ext_out)->required();

    // crosswalk
    auto* cw = app.add_subcommand("crosswalk", "Inspect a crosswalk table");
    cw->require_subcommand(1);
    std::string table_path;
    bool strict = false;
    auto* cw_val = cw->add_subcommand("validate", "Validate element names against the registries");
    cw_val->add_option("--table", table_path)->required();
    cw_val->add_flag("--strict", strict, "reject sources mapped to more than one target");
    auto* cw_stats = cw->add_subcommand("stats", "Mapped source, target and required-target counts");
    cw_stats->add_option("--table", table_path)->required();

    // audit
    auto* aud = app.add_subcommand("audit", "Full report bundle");
    std::string config_path, audit_out;
    bool do_harvest = false, dry_run = false;
    aud->add_option("--config", config_path)->required();
    aud->add_option("--out", audit_out);
    aud->add_flag("--harvest", do_harvest);
    aud->add_flag("--dry-run", dry_run);

    // stats
    auto* st = app.add_subcommand("stats", "Statistics");
    st->require_subcommand(1);
    auto* st_t = st->add_subcommand("ttest", "Two-sample t-test from summary statistics");
    std::string ga, gb;
    bool pooled = false;
    st_t->add_option("--a", ga, "n,mean,sd")->required();
    st_t->add_option("--b", gb, "n,mean,sd")->required();
    st_t->add_flag("--pooled", pooled);

    // temporal
    auto* tmp = app.add_subcommand("temporal", "Cumulative record counts per day");
    std::string source = "oai", min_gran = "day", tmp_out;
    tmp->add_option("--store", store_path)->required();
    tmp->add_option("--repository", repository)->required();
    tmp->add_option("--source", source);
    tmp->add_option("--min-granularity", min_gran);
    tmp->add_option("--out", tmp_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sel) {
            auto parsed = parse_dump(slurp(dump_path));
            print_diagnostics(parsed.errors);
            auto list = filter_candidates(parsed.entries);
            spit(sel_out, candidates_csv(list));
            std::cout << list.accepted.size() << " accepted, " << list.rejected.size() << " rejected\n";
            return 0;
        }
        if (*h_oai) {
            CorpusStore store(store_path);
            OaiEndpoint ep{endpoint, prefix, set_spec.empty() ? std::nullopt : std::optional<std::string>(set_spec),
                           std::chrono::milliseconds(delay_ms), repository, schema_from_string(schema)};
            auto r = harvest_oai_into(store, ep, {}, max_records, seed);
            std::cout << r.stats.records << " records (" << r.stats.deleted << " deleted) in " << r.stats.pages
                      << " pages; " << r.stored << " stored\n";
            return 0;
        }
        if (*h_dc) {
            DataCiteQuery q;
            if (!client_id.empty()) q = DataCiteQuery::for_client(client_id);
            else if (!doi_prefix.empty()) q = DataCiteQuery::for_prefix(doi_prefix);
            else if (!doi_file.empty()) {
                std::vector<std::string> dois;
                std::istringstream in(slurp(doi_file));
                for (std::string line; std::getline(in, line);)
                    if (!line.empty()) dois.push_back(line);
                q = DataCiteQuery::for_dois(std::move(dois));
            } else {
                throw ConfigError("one of --client-id, --prefix or --doi-file is required");
            }
            q.repository_id = repository;
            q.page_size = page_size;
            q.api_base = api_base.empty() ? datacite_api_base() : api_base;
            q.validate();
            CorpusStore store(store_path);
            auto s = harvest_datacite_into(store, q, {});
            print_diagnostics(s.errors);
            for (const auto& m : s.missing) std::cerr << "missing: " << m << "\n";
            std::cout << s.records << " records in " << s.pages << " pages; " << s.missing.size() << " missing\n";
            return 0;
        }
        if (*ext) {
            CorpusStore store(store_path);
            std::set<std::string> repos;
            for (const auto& e : store.entries())
                if (repository.empty() || e.repository_id == repository) repos.insert(e.repository_id);
            csv::Writer w;
            w.row({"repository", "record_id", "source", "schema", "element", "count"});
            Diagnostics diag;
            for (const auto& repo : repos)
                for (const auto& x : extract_repository(store, repo, &diag))
                    for (const auto& [e, n] : x.vector.counts)
                        w.row({repo, x.record_id, to_string(x.source), to_string(x.vector.schema_id), e,
                               std::to_string(n)});
            print_diagnostics(diag);
            spit(ext_out, w.str());
            return 0;
        }
        if (*cw_val || *cw_stats) {
            auto text = slurp(table_path);
            auto sid = peek_crosswalk_schema(text);
            if (!sid) throw ValidationError("crosswalk has no rows", 0);
            CrosswalkLoadOptions opts;
            opts.one_target_per_source = strict;
            auto table = load_crosswalk(text, registry(*sid), registry(SchemaId::datacite_4_6), opts);
            if (*cw_val) {
                std::cout << "valid: " << table.entries.size() << " mappings from " << to_string(*sid) << "\n";
            } else {
                auto c = coverage_counts(table, registry(SchemaId::datacite_4_6));
                std::cout << "source_schema," << to_string(*sid) << "\n"
                          << "mapped_sources," << c.n_sources << "\n"
                          << "mapped_targets," << c.n_targets << "\n"
                          << "required_targets," << c.n_required_targets << "\n"
                          << "one_to_n_targets," << one_to_n_groups(table).size() << "\n";
            }
            return 0;
        }
        if (*aud) {
            auto config = load_config(config_path);
            if (!audit_out.empty()) config.output_path = audit_out;
            AuditOptions opts;
            opts.harvest = do_harvest;
            opts.dry_run = dry_run;
            auto r = run_audit(config, opts);
            if (dry_run) {
                std::cout << r.plan;
                return 0;
            }
            for (const auto& f : r.files) std::cout << f << "\n";
            for (const auto& f : r.failed_repositories) std::cerr << "failed: " << f << "\n";
            return r.ok() ? 0 : 1;
        }
        if (*st_t) {
            auto a = summary_arg("a", ga), b = summary_arg("b", gb);
            auto r = stats::t_test(a, b, pooled ? stats::TTestKind::pooled : stats::TTestKind::welch);
            std::cout << "t," << format_number(r.t) << "\ndf," << format_number(r.df) << "\np," << format_number(r.p)
                      << "\n";
            return 0;
        }
        if (*tmp) {
            CorpusStore store(store_path);
            Source src = source_from_string(source);
            Diagnostics diag;
            std::vector<RecordDate> dates;
            for (const auto& x : extract_repository(store, repository, &diag))
                if (x.source == src && !x.deleted && x.date) dates.push_back(*x.date);
            auto series = accumulation_series(repository, src, dates, granularity_from_string(min_gran), &diag);
            print_diagnostics(diag);
            spit(tmp_out, emit_plot_series(series));
            std::cout << series.n_included << " included, " << series.n_excluded << " excluded\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
