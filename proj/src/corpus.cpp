#include "imagetypes/corpus.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "imagetypes/csv.hpp"
#include "imagetypes/error.hpp"
#include "imagetypes/random.hpp"

namespace imagetypes {

namespace {

constexpr std::size_t kHeaderBytes = 12;
constexpr std::array<char, 4> kMagic{'E', 'M', 'B', '1'};

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(bytes[offset + i]) << (8 * i);
    return v;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> values,
                                 std::string source_tag)
    : rows_(rows), dim_(dim), values_(std::move(values)), source_tag_(std::move(source_tag)) {
    if (dim_ == 0) throw Error(ErrorCode::DimensionMismatch, "embedding dimension must be positive");
    if (values_.size() != rows_ * dim_)
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} values for a {}x{} matrix", values_.size(), rows_, dim_));
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw Error(ErrorCode::NonFinite,
                        fmt::format("non-finite value at row {}, column {}", i / dim_, i % dim_));
}

EmbeddingMatrix EmbeddingMatrix::select_rows(std::span<const std::size_t> indices) const {
    std::vector<float> out;
    out.reserve(indices.size() * dim_);
    for (std::size_t idx : indices) {
        if (idx >= rows_) throw Error(ErrorCode::InvalidArgument, fmt::format("row {} out of range", idx));
        const auto r = row(idx);
        out.insert(out.end(), r.begin(), r.end());
    }
    return EmbeddingMatrix(indices.size(), dim_, std::move(out), source_tag_);
}

std::optional<std::size_t> known_model_dim(std::string_view source_tag) {
    if (source_tag == "vgg19") return 512;
    if (source_tag == "resnet50" || source_tag == "inceptionv3") return 2048;
    return std::nullopt;
}

std::vector<std::byte> encode_embeddings(const EmbeddingMatrix& matrix) {
    if (matrix.rows() > UINT32_MAX || matrix.dim() > UINT32_MAX)
        throw Error(ErrorCode::DimensionMismatch, "matrix too large for EMB1");
    std::vector<std::byte> out;
    out.reserve(kHeaderBytes + 4 * matrix.values().size());
    for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
    put_u32(out, static_cast<std::uint32_t>(matrix.rows()));
    put_u32(out, static_cast<std::uint32_t>(matrix.dim()));
    for (float v : matrix.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

EmbeddingMatrix decode_embeddings(std::span<const std::byte> bytes, std::string source_tag) {
    if (bytes.size() < 4) throw Error(ErrorCode::BadMagic, "file shorter than the magic");
    for (std::size_t i = 0; i < 4; ++i)
        if (bytes[i] != static_cast<std::byte>(kMagic[i])) throw Error(ErrorCode::BadMagic, "expected magic EMB1");
    if (bytes.size() < kHeaderBytes) throw Error(ErrorCode::TruncatedPayload, "header truncated");
    const std::size_t n = get_u32(bytes, 4);
    const std::size_t d = get_u32(bytes, 8);
    if (d == 0) throw Error(ErrorCode::DimensionMismatch, "declared dimension is zero");
    const std::size_t payload = bytes.size() - kHeaderBytes;
    const std::size_t expected = 4 * n * d;
    if (payload < expected)
        throw Error(ErrorCode::TruncatedPayload,
                    fmt::format("header declares {}x{} ({} floats) but payload holds {} bytes", n, d, n * d, payload));
    if (payload > expected)
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} trailing bytes after a {}x{} payload", payload - expected, n, d));
    std::vector<float> values(n * d);
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = std::bit_cast<float>(get_u32(bytes, kHeaderBytes + 4 * i));
    return EmbeddingMatrix(n, d, std::move(values), std::move(source_tag));
}

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& destination) {
    const auto bytes = encode_embeddings(matrix);
    if (destination.has_parent_path()) std::filesystem::create_directories(destination.parent_path());
    std::ofstream out(destination, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + destination.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + destination.string());
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& source) {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + source.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::string tag = source.stem().string();
    try {
        return decode_embeddings(std::as_bytes(std::span(raw)), std::move(tag));
    } catch (const Error& e) {
        throw Error(e.code(), source.string() + ": " + e.what());
    }
}

std::vector<std::string> CorpusManifest::image_ids_by_row() const {
    std::vector<std::string> ids(records.size());
    std::vector<bool> seen(records.size(), false);
    for (const auto& r : records) {
        if (r.row >= ids.size() || seen[r.row])
            throw Error(ErrorCode::RowMismatch, fmt::format("manifest rows are not a bijection (row {})", r.row));
        seen[r.row] = true;
        ids[r.row] = r.image_id;
    }
    return ids;
}

CorpusManifest read_manifest(const std::filesystem::path& source) {
    const std::string text = read_text_file(source);
    CorpusManifest manifest;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            ManifestRecord rec;
            const auto row = j.at("row").get<long long>();
            if (row < 0) throw Error(ErrorCode::Parse, "negative row");
            rec.row = static_cast<std::size_t>(row);
            rec.image_id = j.at("image_id").get<std::string>();
            rec.account_id = j.at("account_id").get<std::string>();
            if (auto it = j.find("label"); it != j.end() && !it->is_null()) rec.label = it->get<std::string>();
            manifest.records.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::Parse, fmt::format("{}:{}: {}", source.string(), line_no, e.what()));
        } catch (const Error& e) {
            throw Error(ErrorCode::Parse, fmt::format("{}:{}: {}", source.string(), line_no, e.what()));
        }
    }
    return manifest;
}

void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& destination) {
    std::string text;
    for (const auto& r : manifest.records) {
        nlohmann::ordered_json j;
        j["row"] = r.row;
        j["image_id"] = r.image_id;
        j["account_id"] = r.account_id;
        if (r.label) j["label"] = *r.label;
        text += j.dump();
        text.push_back('\n');
    }
    write_text_file(destination, text);
}

AccountScores read_scores(const std::filesystem::path& source) {
    const auto table = csv::read(source);
    const auto id_col = table.column("account_id");
    const auto score_col = table.column("score");
    AccountScores scores;
    for (const auto& row : table.rows) {
        const double score = csv::parse_number(row[score_col]);
        if (!std::isfinite(score))
            throw Error(ErrorCode::Parse, fmt::format("{}: non-finite score for '{}'", source.string(), row[id_col]));
        if (!scores.emplace(row[id_col], score).second)
            throw Error(ErrorCode::Parse, fmt::format("{}: duplicate account_id '{}'", source.string(), row[id_col]));
    }
    return scores;
}

void write_scores(const AccountScores& scores, const std::filesystem::path& destination) {
    std::string text = "account_id,score\n";
    for (const auto& [id, score] : scores) text += csv::join({id, csv::format_number(score)}) + "\n";
    write_text_file(destination, text);
}

ImageLabels read_labels(const std::filesystem::path& source) {
    const auto table = csv::read(source);
    const auto id_col = table.column("image_id");
    const auto label_col = table.column("label");
    ImageLabels labels;
    for (const auto& row : table.rows)
        if (!labels.emplace(row[id_col], row[label_col]).second)
            throw Error(ErrorCode::Parse, fmt::format("{}: duplicate image_id '{}'", source.string(), row[id_col]));
    return labels;
}

void write_labels(const ImageLabels& labels, const std::filesystem::path& destination) {
    std::string text = "image_id,label\n";
    for (const auto& [id, label] : labels) text += csv::join({id, label}) + "\n";
    write_text_file(destination, text);
}

ValidationReport validate_corpus(const Corpus& corpus) {
    ValidationReport report;
    const auto& records = corpus.manifest.records;
    const std::size_t n = corpus.matrix.rows();

    if (records.size() != n)
        report.violations.push_back(
            {"row count", fmt::format("manifest has {} records, matrix has {} rows", records.size(), n)});

    std::vector<std::size_t> hits(n, 0);
    for (const auto& r : records) {
        if (r.row >= n)
            report.violations.push_back({"row bijection", fmt::format("row {} out of range", r.row)});
        else
            ++hits[r.row];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (hits[i] == 0) report.violations.push_back({"row bijection", fmt::format("row {} missing", i)});
        if (hits[i] > 1)
            report.violations.push_back({"row bijection", fmt::format("row {} listed {} times", i, hits[i])});
    }

    std::set<std::string_view> ids;
    for (const auto& r : records)
        if (!ids.insert(r.image_id).second)
            report.violations.push_back({"duplicate image_id", r.image_id});

    if (const auto want = known_model_dim(corpus.matrix.source_tag()); want && *want != corpus.matrix.dim())
        report.violations.push_back(
            {"embedding dimension", fmt::format("{} embeddings should have d={}, found d={}",
                                                corpus.matrix.source_tag(), *want, corpus.matrix.dim())});

    if (corpus.scores) {
        std::set<std::string_view> unscored;
        for (const auto& r : records)
            if (!corpus.scores->contains(r.account_id)) unscored.insert(r.account_id);
        for (auto account : unscored) report.warnings.push_back({"missing score", std::string(account)});
    }
    return report;
}

CorpusManifest sample_per_account(const CorpusManifest& manifest, std::size_t per_account, std::uint64_t seed) {
    if (per_account == 0) throw Error(ErrorCode::InvalidArgument, "per_account must be at least 1");

    std::map<std::string_view, std::vector<std::size_t>> by_account;
    for (std::size_t i = 0; i < manifest.records.size(); ++i)
        by_account[manifest.records[i].account_id].push_back(i);

    Rng rng(seed);
    std::vector<bool> keep(manifest.records.size(), false);
    for (auto& [account, members] : by_account) {
        if (members.size() <= per_account) {
            for (auto i : members) keep[i] = true;
            continue;
        }
        // Partial Fisher-Yates: the first per_account slots are a uniform
        // sample without replacement.
        for (std::size_t i = 0; i < per_account; ++i) {
            const std::size_t j = i + rng.below(members.size() - i);
            std::swap(members[i], members[j]);
        }
        for (std::size_t i = 0; i < per_account; ++i) keep[members[i]] = true;
    }

    CorpusManifest out;
    for (std::size_t i = 0; i < manifest.records.size(); ++i)
        if (keep[i]) out.records.push_back(manifest.records[i]);
    return out;
}

Corpus subset_corpus(const Corpus& corpus, const CorpusManifest& sampled) {
    std::vector<std::size_t> rows;
    rows.reserve(sampled.records.size());
    Corpus out;
    out.scores = corpus.scores;
    for (std::size_t i = 0; i < sampled.records.size(); ++i) {
        rows.push_back(sampled.records[i].row);
        auto rec = sampled.records[i];
        rec.row = i;
        out.manifest.records.push_back(std::move(rec));
    }
    out.matrix = corpus.matrix.select_rows(rows);
    return out;
}

}  // namespace imagetypes
