#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "mdaudit/error.hpp"
#include "mdaudit/schema_registry.hpp"
#include "synth.hpp"

using namespace mdaudit;

namespace {

bool has_code(const Diagnostics& d, const std::string& code) {
    return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.code == code; });
}

}  // namespace

TEST(Registry, DataCiteShape) {
    const auto& reg = registry(SchemaId::datacite_4_6);
    EXPECT_EQ(reg.size(), 85u);
    EXPECT_EQ(reg.count_required(), 8u);
    EXPECT_EQ(reg.count_identifier(), 12u);
}

TEST(Registry, AllSchemasLoadWithDistinctIds) {
    for (auto s : all_schemas()) {
        const auto& reg = registry(s);
        auto ids = reg.ids();
        std::set<std::string> unique(ids.begin(), ids.end());
        EXPECT_EQ(unique.size(), ids.size()) << to_string(s);
        for (const auto& d : reg.descriptors) {
            EXPECT_FALSE(d.xml_paths.empty()) << d.element_id;
            if (!d.parent.empty()) EXPECT_TRUE(reg.contains(d.parent)) << d.element_id;
        }
    }
}

TEST(Registry, RejectsDuplicateElement) {
    std::string csv =
        "element_id,schema_id,xml_path,required,identifier_flag,recommended_flag,parent\n"
        "a,datacite-4.6,/dc:resource/dc:a,true,false,false,\n"
        "a,datacite-4.6,/dc:resource/dc:b,false,false,false,\n";
    EXPECT_THROW(parse_registry(csv), Error);
}

TEST(Extraction, HandCountedFixtures) {
    auto all = fixtures::load_all();
    ASSERT_GE(all.size(), 10u);
    std::set<SchemaId> schemas;
    for (const auto& f : all) {
        schemas.insert(f.record.schema_id);
        Diagnostics diag;
        auto v = extract_occurrences(f.record, registry(f.record.schema_id), &diag);
        EXPECT_EQ(v.counts, f.counts) << f.name;
    }
    EXPECT_EQ(schemas.size(), 4u);
}

TEST(Extraction, FixtureDates) {
    for (const auto& f : fixtures::load_all()) {
        Diagnostics diag;
        auto d = extract_date(f.record, &diag);
        if (!f.date) {
            EXPECT_FALSE(d) << f.name;
        } else {
            ASSERT_TRUE(d) << f.name;
            EXPECT_EQ(format_day(d->date), *f.date) << f.name;
            EXPECT_EQ(to_string(d->granularity), f.granularity) << f.name;
            EXPECT_EQ(d->source_element, f.date_source) << f.name;
        }
        for (const auto& code : f.diagnostics) {
            if (code == "namespace_mismatch") continue;
            EXPECT_TRUE(has_code(diag, code)) << f.name << " " << code;
        }
    }
}

TEST(Extraction, FixtureDois) {
    for (const auto& f : fixtures::load_all()) {
        auto doc = parse_record(f.record);
        auto doi = extract_doi(f.record, doc, default_doi_locators(f.record.schema_id));
        EXPECT_EQ(doi, f.doi) << f.name;
    }
}

TEST(Extraction, ForeignNamespaceYieldsEmptyVector) {
    auto f = fixtures::load("datacite_03");
    Diagnostics diag;
    auto v = extract_occurrences(f.record, registry(SchemaId::datacite_4_6), &diag);
    EXPECT_TRUE(v.counts.empty());
    EXPECT_TRUE(has_code(diag, "namespace_mismatch"));
}

TEST(Extraction, MalformedXmlThrows) {
    RawRecord r;
    r.schema_id = SchemaId::ddi_2_5;
    r.payload = "<codeBook xmlns=\"ddi:codebook:2_5\"><stdyDscr></codeBook>";
    EXPECT_THROW(extract_occurrences(r, registry(SchemaId::ddi_2_5)), ParseError);
}

TEST(Extraction, EmptyPayloadIsEmptyVector) {
    RawRecord r;
    r.schema_id = SchemaId::dif_10;
    r.deleted = true;
    Diagnostics diag;
    EXPECT_TRUE(extract_occurrences(r, registry(SchemaId::dif_10), &diag).counts.empty());
}

TEST(Extraction, OlderKernelNamespaceIsHarmonized) {
    auto f = fixtures::load("datacite_02");
    auto v = extract_occurrences(f.record, registry(SchemaId::datacite_4_6));
    EXPECT_GT(v.count("identifier"), 0u);
}

// Synthetic records: extraction equals the independent tree counter.
TEST(ExtractionProperty, SynthRecordsMatchOracle) {
    std::mt19937 rng(20240611);
    for (auto s : all_schemas()) {
        const auto& reg = registry(s);
        for (int trial = 0; trial < 60; ++trial) {
            auto present = synth::random_subset(reg, rng, trial % 3 == 0 ? 0.9 : 0.3);
            std::vector<synth::Extra> extras;
            // Repeat some elements to exercise counts above one.
            std::uniform_int_distribution<std::size_t> pick(0, reg.size() - 1);
            for (int k = 0; k < 4; ++k) {
                const auto& d = reg.descriptors[pick(rng)];
                const auto& p = d.xml_paths.front();
                if (p.find('@') == std::string::npos) extras.push_back({p, "x", true});
            }
            auto rec = synth::make_record(s, present, extras);
            RawRecord r;
            r.record_id = "synth";
            r.schema_id = s;
            r.payload = rec.xml;
            auto v = extract_occurrences(r, reg);
            ASSERT_EQ(v.counts, rec.expected) << to_string(s) << "\n" << rec.xml;
            for (const auto& e : present) EXPECT_GE(v.count(e), 1u) << e;
        }
    }
}

TEST(Dates, EarliestWinsAndTieFavorsFinerGranularity) {
    RawRecord r;
    r.record_id = "d";
    r.schema_id = SchemaId::dif_10;
    auto rec = synth::make_record(SchemaId::dif_10, {},
                                  {{"/dif:DIF/dif:Metadata_Dates/dif:Metadata_Creation", "2011-03"},
                                   {"/dif:DIF/dif:Dataset_Citation/dif:Dataset_Release_Date", "2011-03-01"}});
    r.payload = rec.xml;
    auto d = extract_date(r);
    ASSERT_TRUE(d);
    EXPECT_EQ(format_day(d->date), "2011-03-01");
    EXPECT_EQ(d->granularity, Granularity::day);
    EXPECT_EQ(d->source_element, "Dataset_Release_Date");
}

TEST(Dates, IsoIgnoresNonPublicationDates) {
    const std::string base =
        "/gmd:MD_Metadata/gmd:identificationInfo/gmd:MD_DataIdentification/gmd:citation/gmd:CI_Citation/gmd:date";
    synth::XmlTree t({{"gmd", "http://www.isotc211.org/2005/gmd"}, {"gco", "http://www.isotc211.org/2005/gco"}});
    t.append(base + "/gmd:CI_Date");
    t.ensure(base + "/gmd:CI_Date/gmd:date/gco:Date", "2001-01-01");
    t.ensure(base + "/gmd:CI_Date/gmd:dateType/gmd:CI_DateTypeCode[@codeListValue='creation']");
    RawRecord r;
    r.record_id = "iso";
    r.schema_id = SchemaId::iso_19139;
    r.payload = t.serialize();
    Diagnostics diag;
    EXPECT_FALSE(extract_date(r, &diag));
    EXPECT_TRUE(has_code(diag, "no_date"));
}

TEST(Dates, UnparseableDateThrows) {
    RawRecord r;
    r.record_id = "bad";
    r.schema_id = SchemaId::dif_10;
    r.payload = synth::make_record(SchemaId::dif_10, {}, {{"/dif:DIF/dif:Metadata_Dates/dif:Metadata_Creation", "soon"}}).xml;
    EXPECT_THROW(extract_date(r), ParseError);
}

TEST(Dates, PartialDateParsing) {
    EXPECT_EQ(parse_partial_date("2019").granularity, Granularity::year);
    EXPECT_EQ(format_day(parse_partial_date("2019").day), "2019-01-01");
    EXPECT_EQ(parse_partial_date("2019-04").granularity, Granularity::month);
    EXPECT_EQ(format_day(parse_partial_date("2019-04-05T10:00:00Z").day), "2019-04-05");
    EXPECT_EQ(format_day(parse_partial_date("2019-04-05 10:00").day), "2019-04-05");
    EXPECT_THROW(parse_partial_date("2019-13-01"), ParseError);
    EXPECT_THROW(parse_partial_date("2019-02-30"), ParseError);
    EXPECT_THROW(parse_partial_date(""), ParseError);
}

TEST(Doi, Normalization) {
    EXPECT_EQ(normalize_doi(" https://doi.org/10.1234/ABC "), "10.1234/abc");
    EXPECT_EQ(normalize_doi("doi:10.1234/X"), "10.1234/x");
    EXPECT_EQ(normalize_doi("http://dx.doi.org/10.5/y"), "10.5/y");
    EXPECT_EQ(find_doi("see https://doi.org/10.4444/Iso.A for details"), "10.4444/iso.a");
    EXPECT_FALSE(find_doi("hdl:1234/5678"));
}

TEST(Doi, DataCiteProvenanceWins) {
    RawRecord r;
    r.schema_id = SchemaId::datacite_4_6;
    r.provenance["doi"] = "10.1000/FROM-API";
    r.payload = synth::make_record(SchemaId::datacite_4_6, {}, {synth::doi_extra(SchemaId::datacite_4_6, "10.1000/xml")}).xml;
    EXPECT_EQ(extract_doi(r), "10.1000/from-api");
}

TEST(DoiProperty, SynthDoiRoundTrip) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> num(1000, 99999);
    for (auto s : all_schemas()) {
        for (int i = 0; i < 25; ++i) {
            std::string doi = "10." + std::to_string(num(rng)) + "/r." + std::to_string(num(rng));
            auto present = synth::random_subset(registry(s), rng, 0.2);
            RawRecord r;
            r.schema_id = s;
            r.payload = synth::make_record(s, present, {synth::doi_extra(s, doi)}).xml;
            auto doc = parse_record(r);
            EXPECT_EQ(extract_doi(r, doc, default_doi_locators(s)), doi) << to_string(s);
        }
    }
}
