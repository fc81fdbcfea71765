#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "imagetypes/corpus.hpp"
#include "imagetypes/csv.hpp"
#include "imagetypes/error.hpp"
#include "oracles.hpp"

using namespace imagetypes;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "imagetypes_unit";
    fs::create_directories(dir);
    return dir / name;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no imagetypes::Error thrown";
    return ErrorCode::Io;
}

CorpusManifest manifest_for(const std::vector<std::string>& accounts) {
    CorpusManifest m;
    for (std::size_t i = 0; i < accounts.size(); ++i)
        m.records.push_back({i, "img_" + std::to_string(i), accounts[i], std::nullopt});
    return m;
}

}  // namespace

TEST(Emb1, RoundTripIsBitExact) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = oracle::gaussian_matrix(1 + seed * 7, 1 + seed % 5, seed);
        const auto path = scratch("rt_" + std::to_string(seed) + ".emb");
        write_embeddings(m, path);
        const auto back = read_embeddings(path);
        EXPECT_EQ(back.rows(), m.rows());
        EXPECT_EQ(back.dim(), m.dim());
        EXPECT_EQ(0, std::memcmp(back.values().data(), m.values().data(), m.values().size_bytes()));
        EXPECT_EQ(back.source_tag(), "rt_" + std::to_string(seed));
    }
}

TEST(Emb1, HeaderLayout) {
    const EmbeddingMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
    const auto bytes = encode_embeddings(m);
    ASSERT_EQ(bytes.size(), 12u + 6 * 4);
    EXPECT_EQ(0, std::memcmp(bytes.data(), "EMB1", 4));
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 2);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3);
    float first;
    std::memcpy(&first, bytes.data() + 12, 4);
    EXPECT_EQ(first, 1.0f);
}

TEST(Emb1, RejectsMalformed) {
    const EmbeddingMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
    auto bytes = encode_embeddings(m);

    auto bad_magic = bytes;
    bad_magic[0] = std::byte{'X'};
    EXPECT_EQ(code_of([&] { decode_embeddings(bad_magic); }), ErrorCode::BadMagic);

    auto short_payload = bytes;
    short_payload.pop_back();
    EXPECT_EQ(code_of([&] { decode_embeddings(short_payload); }), ErrorCode::TruncatedPayload);

    auto short_header = std::vector<std::byte>(bytes.begin(), bytes.begin() + 6);
    EXPECT_EQ(code_of([&] { decode_embeddings(short_header); }), ErrorCode::TruncatedPayload);

    auto extra = bytes;
    extra.push_back(std::byte{0});
    EXPECT_EQ(code_of([&] { decode_embeddings(extra); }), ErrorCode::DimensionMismatch);

    EXPECT_EQ(code_of([] { EmbeddingMatrix(1, 0, {}); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([] { EmbeddingMatrix(1, 2, {1.0f, NAN}); }), ErrorCode::NonFinite);
    EXPECT_EQ(code_of([] { read_embeddings("/nonexistent/x.emb"); }), ErrorCode::Io);
}

TEST(Emb1, KnownModelDims) {
    EXPECT_EQ(known_model_dim("vgg19"), 512u);
    EXPECT_EQ(known_model_dim("resnet50"), 2048u);
    EXPECT_EQ(known_model_dim("inceptionv3"), 2048u);
    EXPECT_FALSE(known_model_dim("other").has_value());
}

TEST(Manifest, JsonlRoundTrip) {
    CorpusManifest m = manifest_for({"a", "b", "a"});
    m.records[1].label = "hateful";
    const auto path = scratch("manifest.jsonl");
    write_manifest(m, path);
    const auto back = read_manifest(path);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back.records[1].label, "hateful");
    EXPECT_FALSE(back.records[0].label.has_value());
    EXPECT_EQ(back.records[2].account_id, "a");
    EXPECT_EQ(back.image_ids_by_row(), (std::vector<std::string>{"img_0", "img_1", "img_2"}));
}

TEST(Manifest, ScoresAndLabelsRoundTrip) {
    AccountScores s{{"x", -0.25}, {"y", 1.0 / 3.0}};
    write_scores(s, scratch("scores.csv"));
    EXPECT_EQ(read_scores(scratch("scores.csv")), s);
    ImageLabels l{{"i1", "hateful"}, {"i2", "not_hateful"}};
    write_labels(l, scratch("labels.csv"));
    EXPECT_EQ(read_labels(scratch("labels.csv")), l);

    write_text_file(scratch("dup.csv"), "account_id,score\nx,1\nx,2\n");
    EXPECT_EQ(code_of([] { read_scores(scratch("dup.csv")); }), ErrorCode::Parse);
}

TEST(Validate, ReportsViolations) {
    Corpus c;
    c.matrix = oracle::gaussian_matrix(3, 2, 1);
    c.manifest = manifest_for({"a", "a", "b"});
    c.scores = AccountScores{{"a", 0.1}};
    auto report = validate_corpus(c);
    EXPECT_TRUE(report.ok());
    ASSERT_EQ(report.warnings.size(), 1u);
    EXPECT_EQ(report.warnings[0].kind, "missing score");

    c.manifest.records[2].image_id = "img_0";
    report = validate_corpus(c);
    EXPECT_FALSE(report.ok());

    c.manifest = manifest_for({"a", "a"});
    report = validate_corpus(c);
    EXPECT_FALSE(report.ok());
}

TEST(Sampling, ProjectionAndDeterminism) {
    std::vector<std::string> accounts;
    for (int a = 0; a < 5; ++a)
        for (int i = 0; i < 3 + 4 * a; ++i) accounts.push_back("acct" + std::to_string(a));
    const auto m = manifest_for(accounts);
    const auto s1 = sample_per_account(m, 6, 42);
    const auto s2 = sample_per_account(m, 6, 42);
    ASSERT_EQ(s1.size(), s2.size());
    std::map<std::string, std::size_t> per;
    std::size_t prev_row = 0;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        EXPECT_EQ(s1.records[i].row, s2.records[i].row);
        // Each sampled record is an unmodified original record.
        EXPECT_EQ(s1.records[i].image_id, m.records[s1.records[i].row].image_id);
        EXPECT_EQ(s1.records[i].account_id, m.records[s1.records[i].row].account_id);
        if (i > 0) EXPECT_GT(s1.records[i].row, prev_row);
        prev_row = s1.records[i].row;
        ++per[s1.records[i].account_id];
    }
    EXPECT_EQ(per["acct0"], 3u);
    EXPECT_EQ(per["acct1"], 6u);
    EXPECT_EQ(per["acct4"], 6u);

    Corpus c{oracle::gaussian_matrix(m.size(), 3, 5), m, std::nullopt};
    const auto sub = subset_corpus(c, s1);
    ASSERT_EQ(sub.matrix.rows(), s1.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        EXPECT_EQ(sub.manifest.records[i].row, i);
        EXPECT_TRUE(std::ranges::equal(sub.matrix.row(i), c.matrix.row(s1.records[i].row)));
    }
}

TEST(Csv, QuotingAndNumbers) {
    const auto t = csv::parse("a,b\n\"x,1\",\"he said \"\"hi\"\"\"\n");
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0][0], "x,1");
    EXPECT_EQ(t.rows[0][1], "he said \"hi\"");
    EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
    EXPECT_EQ(csv::format_number(0.1), "0.1");
    EXPECT_EQ(csv::format_number(NAN), "NA");
    EXPECT_EQ(csv::parse_number(csv::format_number(1.0 / 3.0)), 1.0 / 3.0);
}
