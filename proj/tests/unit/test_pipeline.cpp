#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sys/wait.h>

#include "mdaudit/csv.hpp"
#include "mdaudit/error.hpp"
#include "mdaudit/pipeline.hpp"
#include "mdaudit/stats.hpp"
#include "mock_servers.hpp"
#include "scenarios.hpp"
#include "synth.hpp"

using namespace mdaudit;
namespace fs = std::filesystem;

namespace {

class PipelineTest : public ::testing::Test {
protected:
    fs::path dir = scenarios::temp_dir("pipeline");
    void TearDown() override { fs::remove_all(dir); }
};

nlohmann::json manifest_without_times(const fs::path& out) {
    auto j = nlohmann::json::parse(scenarios::read_file(out / "run_manifest.json"));
    j.erase("started_at");
    j.erase("finished_at");
    return j;
}

struct CliResult {
    int code;
    std::string out;
};

CliResult run_cli(const std::string& args, const fs::path& capture) {
    std::string cmd = std::string("\"") + MDAUDIT_CLI + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
    int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, scenarios::read_file(capture)};
}

fs::path data_dir() { return fs::path(MDAUDIT_FIXTURES) / ".." / ".." / "data"; }

}  // namespace

TEST_F(PipelineTest, ConfigParsing) {
    auto c = parse_config(
        "[run]\nstore = s\nalpha = 0.01\nsd_convention = sample\nttest = pooled\nresolution = per_schema\n"
        "[crosswalk]\nddi-2.5 = builtin\n"
        "[repository:Z]\nschema = ddi-2.5\noai_endpoint = http://x/oai\nmetadata_prefix = ddi\n"
        "[repository:A]\nschema = ddi-2.5\ndatacite_client_id = a.b\n",
        "/base");
    EXPECT_EQ(c.store_path, fs::path("/base/s"));
    EXPECT_EQ(c.output_path, fs::path("/base/report"));
    EXPECT_DOUBLE_EQ(c.alpha, 0.01);
    EXPECT_EQ(c.sd_convention, SdConvention::sample);
    EXPECT_EQ(c.ttest, stats::TTestKind::pooled);
    EXPECT_EQ(c.resolution, ResolutionScope::per_schema);
    ASSERT_EQ(c.repositories.size(), 2u);
    EXPECT_EQ(c.repositories[0].id, "A");
    EXPECT_EQ(c.repositories[1].oai_endpoint, "http://x/oai");
    EXPECT_NO_THROW(validate_config(c));

    EXPECT_THROW(parse_config("[run]\nbogus = 1\n", "/"), ConfigError);
    EXPECT_THROW(parse_config("[weird]\nx = 1\n", "/"), ConfigError);
    EXPECT_THROW(parse_config("[run]\nalpha = x\n", "/"), ConfigError);
    EXPECT_THROW(parse_config("[repository:A]\noai_endpoint = x\n", "/"), ConfigError);
    EXPECT_THROW(validate_config(parse_config("[run]\nstore = s\n", "/")), ConfigError);
    EXPECT_THROW(validate_config(parse_config("[repository:A]\nschema = dif-10\n", "/")), ConfigError);
    EXPECT_THROW(validate_config(parse_config(
                     "[crosswalk]\ndif-10 = builtin\n[groups]\na = Q\n[repository:A]\nschema = dif-10\n", "/")),
                 ConfigError);
    EXPECT_THROW(validate_config(parse_config(
                     "[crosswalk]\ndif-10 = /no/such/file.csv\n[repository:A]\nschema = dif-10\n", "/")),
                 ConfigError);
}

TEST_F(PipelineTest, AuditWritesReportBundle) {
    auto cfg = load_config(scenarios::write_synthetic_audit(dir, 60, 11));
    auto out = run_audit(cfg);
    EXPECT_TRUE(out.ok());
    std::vector<std::string> expected;
    for (std::string r : {"R1", "R2"})
        for (std::string f : {"accumulation.csv", "identifier_usage.csv", "improvement.csv", "unmatched_source.csv",
                              "unmatched_target.csv", "usage_profile.csv"})
            expected.push_back(r + "/" + f);
    for (std::string f : {"ttest.csv", "used_by_all.csv", "used_by_none.csv"}) expected.push_back(f);
    std::sort(expected.begin(), expected.end());
    auto files = out.files;
    std::sort(files.begin(), files.end());
    EXPECT_EQ(files, expected);
    for (const auto& f : expected) EXPECT_TRUE(fs::exists(cfg.output_path / f)) << f;
    EXPECT_TRUE(fs::exists(cfg.output_path / "run_manifest.json"));

    auto usage = csv::parse(scenarios::read_file(cfg.output_path / "R1/usage_profile.csv"));
    EXPECT_EQ(usage.rows.size(), registry(SchemaId::datacite_4_6).size());

    auto ttest = csv::parse(scenarios::read_file(cfg.output_path / "ttest.csv"));
    EXPECT_EQ(ttest.header, (csv::Row{"element", "mean_a", "sd_a", "mean_b", "sd_b", "t", "df", "p"}));
    EXPECT_EQ(ttest.rows.size(), stats::default_test_elements(registry(SchemaId::datacite_4_6)).size());

    auto acc = csv::parse(scenarios::read_file(cfg.output_path / "R2/accumulation.csv"));
    EXPECT_EQ(acc.header, (csv::Row{"source", "day", "cumulative_count"}));
    std::map<std::string, std::vector<csv::Row>> by_source;
    for (const auto& row : acc.rows) by_source[row[0]].push_back(row);
    EXPECT_EQ(by_source.size(), 2u);
    for (const auto& [src, rows] : by_source)
        for (std::size_t i = 1; i < rows.size(); ++i) {
            EXPECT_LT(rows[i - 1][1], rows[i][1]);
            EXPECT_LE(std::stoull(rows[i - 1][2]), std::stoull(rows[i][2]));
        }

    auto m = nlohmann::json::parse(scenarios::read_file(cfg.output_path / "run_manifest.json"));
    EXPECT_EQ(m["tool"], "mdaudit");
    EXPECT_TRUE(m.contains("design_decisions"));
    EXPECT_EQ(m["repositories"].size(), 2u);
    for (const auto& f : m["files"]) EXPECT_TRUE(f.contains("inputs"));
}

TEST_F(PipelineTest, DeterministicAcrossRuns) {
    auto cfg = load_config(scenarios::write_synthetic_audit(dir, 40, 5));
    auto first_out = cfg.output_path;
    run_audit(cfg);
    cfg.output_path = dir / "report2";
    run_audit(cfg);
    auto a = scenarios::snapshot(first_out), b = scenarios::snapshot(cfg.output_path);
    a.erase("run_manifest.json");
    b.erase("run_manifest.json");
    EXPECT_EQ(a, b);
    auto ma = manifest_without_times(first_out), mb = manifest_without_times(cfg.output_path);
    ma["config"].erase("output");
    mb["config"].erase("output");
    EXPECT_EQ(ma, mb);
}

TEST_F(PipelineTest, EmptyStoreAndDryRun) {
    auto c = parse_config("[crosswalk]\nddi-2.5 = builtin\n[repository:A]\nschema = ddi-2.5\n", dir);
    EXPECT_THROW(run_audit(c), ConfigError);
    AuditOptions dry;
    dry.dry_run = true;
    auto out = run_audit(c, dry);
    EXPECT_FALSE(out.plan.empty());
    EXPECT_TRUE(out.files.empty());
    EXPECT_FALSE(fs::exists(c.output_path));
}

TEST_F(PipelineTest, CorruptRepositoryFailsAlone) {
    auto cfg = load_config(scenarios::write_synthetic_audit(dir, 20, 3));
    CorpusStore store(cfg.store_path);
    for (const auto& e : store.entries())
        if (e.repository_id == "R2" && !e.deleted) {
            std::ofstream(cfg.store_path / e.relative_path) << "<tampered/>";
            break;
        }
    auto out = run_audit(cfg);
    EXPECT_EQ(out.failed_repositories, std::vector<std::string>{"R2"});
    EXPECT_TRUE(fs::exists(cfg.output_path / "R1/improvement.csv"));
    EXPECT_FALSE(fs::exists(cfg.output_path / "R2/improvement.csv"));
    auto m = nlohmann::json::parse(scenarios::read_file(cfg.output_path / "run_manifest.json"));
    EXPECT_EQ(m["repositories"]["R2"]["status"], "failed");
}

TEST_F(PipelineTest, HarvestThenAuditAgainstMocks) {
    std::vector<mock::OaiItem> items;
    std::vector<mock::DataCiteItem> dcs;
    for (int i = 0; i < 30; ++i) {
        std::string doi = "10.7000/h" + std::to_string(i);
        mock::OaiItem it;
        it.identifier = "oai:h:" + std::to_string(i);
        it.payload = synth::make_record(SchemaId::dif_10, {"Entry_Title", "Summary_Abstract"},
                                        {synth::doi_extra(SchemaId::dif_10, doi)})
                         .xml;
        items.push_back(it);
        dcs.push_back({doi, synth::make_record(SchemaId::datacite_4_6, {"title"},
                                               {synth::doi_extra(SchemaId::datacite_4_6, doi)})
                                .xml});
    }
    mock::OaiServer oai(items, 10, "dif");
    mock::DataCiteServer api(dcs);
    std::ofstream(dir / "audit.ini") << "[run]\npolite_delay_ms = 0\npage_size = 20\ndatacite_api = "
                                     << api.base_url() << "\n[crosswalk]\ndif-10 = builtin\n"
                                     << "[repository:H]\nschema = dif-10\noai_endpoint = " << oai.path()
                                     << "\nmetadata_prefix = dif\ndatacite_client_id = h.repo\n";
    auto cfg = load_config(dir / "audit.ini");
    AuditOptions opts;
    opts.harvest = true;
    auto out = run_audit(cfg, opts);
    ASSERT_TRUE(out.ok());
    EXPECT_EQ(CorpusStore(cfg.store_path).size(), 60u);
    auto imp = csv::parse(scenarios::read_file(cfg.output_path / "H/improvement.csv"));
    EXPECT_FALSE(imp.rows.empty());
}

TEST_F(PipelineTest, PlotSeriesRoundTrip) {
    AccumulationSeries s;
    s.points = {{parse_day("2020-01-01"), 1}, {parse_day("2020-02-01"), 4}};
    auto text = emit_plot_series(s);
    EXPECT_EQ(text.rfind("day,cumulative_count\n", 0), 0u);
    EXPECT_EQ(parse_plot_series(text).points, s.points);
}

TEST_F(PipelineTest, CliCommands) {
    auto cap = dir / "cli.txt";
    fs::create_directories(dir);
    auto stats = run_cli("crosswalk stats --table \"" + (data_dir() / "crosswalks/ddi-2.5.csv").string() + "\"", cap);
    EXPECT_EQ(stats.code, 0);
    EXPECT_NE(stats.out.find("mapped_sources,85"), std::string::npos);
    auto strict = run_cli("crosswalk validate --strict --table \"" +
                              (data_dir() / "crosswalks/iso-19139.csv").string() + "\"",
                          cap);
    EXPECT_EQ(strict.code, 1);
    auto t = run_cli("stats ttest --a 11280,0.92,0.27 --b 12870,0.05,0.21", cap);
    EXPECT_EQ(t.code, 0);
    EXPECT_NE(t.out.find("t,276."), std::string::npos);
    EXPECT_EQ(run_cli("audit --config \"" + (dir / "missing.ini").string() + "\"", cap).code, 2);
    EXPECT_NE(run_cli("no-such-command", cap).code, 0);

    auto cfg = scenarios::write_synthetic_audit(dir / "corpus", 10, 1);
    EXPECT_EQ(run_cli("audit --config \"" + cfg.string() + "\"", cap).code, 0);
    EXPECT_TRUE(fs::exists(dir / "corpus/report/ttest.csv"));
    auto ex = run_cli("extract --store \"" + (dir / "corpus/store").string() + "\" --repository R1 --out \"" +
                          (dir / "occ.csv").string() + "\"",
                      cap);
    EXPECT_EQ(ex.code, 0);
    auto occ = csv::parse(scenarios::read_file(dir / "occ.csv"));
    EXPECT_EQ(occ.header, (csv::Row{"repository", "record_id", "source", "schema", "element", "count"}));
    EXPECT_FALSE(occ.rows.empty());

    std::ofstream(dir / "dump.json") << R"([{"id":"a","apiTypes":["OAI-PMH"],"providerTypes":["dataProvider"],)"
                                     << R"("types":["disciplinary"],"databaseAccessTypes":["open"]}])";
    EXPECT_EQ(run_cli("select --dump \"" + (dir / "dump.json").string() + "\" --out \"" +
                          (dir / "cands.csv").string() + "\"",
                      cap)
                  .code,
              0);
    EXPECT_NE(scenarios::read_file(dir / "cands.csv").find("a,accepted"), std::string::npos);
}
