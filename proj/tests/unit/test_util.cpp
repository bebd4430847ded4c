#include <gtest/gtest.h>

#include <random>

#include "mdaudit/codec.hpp"
#include "mdaudit/csv.hpp"
#include "mdaudit/error.hpp"
#include "mdaudit/http.hpp"
#include "mdaudit/pipeline.hpp"
#include "mdaudit/timeutil.hpp"
#include "mdaudit/xml.hpp"

using namespace mdaudit;

TEST(Csv, QuotingAndComments) {
    auto doc = csv::parse("# note one\nid,name\n1,\"a, b\"\n\n2,\"say \"\"hi\"\"\nthere\"\n");
    EXPECT_EQ(doc.comments, std::vector<std::string>{"note one"});
    ASSERT_EQ(doc.rows.size(), 2u);
    EXPECT_EQ(doc.rows[0][1], "a, b");
    EXPECT_EQ(doc.rows[1][1], "say \"hi\"\nthere");
    EXPECT_EQ(doc.line_numbers[0], 3u);
    EXPECT_THROW(csv::parse("a\n\"open"), ParseError);
}

TEST(CsvProperty, RoundTrip) {
    std::mt19937 rng(3);
    const std::string alphabet = "ab,\"\n #x";
    std::uniform_int_distribution<std::size_t> len(0, 6), ch(0, alphabet.size() - 1);
    for (int trial = 0; trial < 300; ++trial) {
        csv::Writer w;
        w.row({"h1", "h2", "h3"});
        std::vector<csv::Row> rows;
        for (int r = 0; r < 4; ++r) {
            csv::Row row;
            for (int c = 0; c < 3; ++c) {
                std::string f;
                for (std::size_t k = len(rng); k > 0; --k) f += alphabet[ch(rng)];
                row.push_back(f);
            }
            rows.push_back(row);
            w.row(row);
        }
        auto doc = csv::parse(w.str());
        EXPECT_EQ(doc.rows, rows) << w.str();
    }
}

TEST(Codec, Sha256AndBase64) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
    EXPECT_EQ(base64_encode("fo"), "Zm8=");
    EXPECT_EQ(base64_decode("Zm9vYg=="), "foob");
    EXPECT_THROW(base64_decode("Zm9v*"), ParseError);
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> byte(0, 255), len(0, 40);
    for (int i = 0; i < 200; ++i) {
        std::string s;
        for (int k = len(rng); k > 0; --k) s += static_cast<char>(byte(rng));
        EXPECT_EQ(base64_decode(base64_encode(s)), s);
    }
}

TEST(Time, TimestampsAndDays) {
    auto t = parse_timestamp("2024-02-29T23:59:58Z");
    EXPECT_EQ(format_timestamp(t), "2024-02-29T23:59:58Z");
    EXPECT_EQ(format_day(parse_day("2000-01-01")), "2000-01-01");
    EXPECT_THROW(parse_day("2000-1-1x"), ParseError);
}

TEST(Xml, NamespacesAndPaths) {
    auto doc = xml::parse(R"(<r xmlns="urn:a" xmlns:b="urn:b"><x b:k="1"/><x/><b:y><x/></b:y></r>)");
    xml::NsMap ns{{"a", "urn:a"}, {"b", "urn:b"}};
    EXPECT_EQ(xml::Path::compile("/a:r/a:x", ns).evaluate(doc).size(), 2u);
    EXPECT_EQ(xml::Path::compile("/a:r//a:x", ns).evaluate(doc).size(), 3u);
    EXPECT_EQ(xml::Path::compile("/a:r/*/a:x", ns).evaluate(doc).size(), 1u);
    EXPECT_EQ(xml::Path::compile("/a:r/a:x/@b:k", ns).evaluate(doc).size(), 1u);
    EXPECT_EQ(xml::Path::compile("/a:r/a:x[@b:k='1']", ns).evaluate(doc).size(), 1u);
    EXPECT_THROW(xml::parse("<a><b></a>"), ParseError);
    EXPECT_THROW(xml::Path::compile("/q:r", ns), Error);
}

TEST(Http, UrlEncode) {
    EXPECT_EQ(url_encode("10.1234/a b"), "10.1234%2Fa%20b");
    EXPECT_EQ(url_encode("page[size]"), "page%5Bsize%5D");
}

TEST(Format, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(279.5), "279.5");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}
