#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imagetypes {

/// Dense row-major n x d matrix of finite floats, one row per image.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;

    /// Throws DimensionMismatch if values.size() != rows * dim or dim == 0,
    /// NonFinite if any value is NaN or infinite.
    EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> values,
                    std::string source_tag = {});

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }
    const std::string& source_tag() const noexcept { return source_tag_; }
    void set_source_tag(std::string tag) { source_tag_ = std::move(tag); }

    std::span<const float> values() const noexcept { return values_; }
    std::span<const float> row(std::size_t i) const noexcept {
        return std::span<const float>(values_).subspan(i * dim_, dim_);
    }

    /// Copy of the given rows, in the given order.
    EmbeddingMatrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<float> values_;
    std::string source_tag_;
};

/// Embedding width of the known extractor backbones (vgg19, resnet50,
/// inceptionv3); nullopt for any other tag.
std::optional<std::size_t> known_model_dim(std::string_view source_tag);

// EMB1: "EMB1" | u32 n | u32 d | n*d f32, all little-endian, row-major.
std::vector<std::byte> encode_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix decode_embeddings(std::span<const std::byte> bytes, std::string source_tag = {});
void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& destination);
/// The source tag defaults to the file stem.
EmbeddingMatrix read_embeddings(const std::filesystem::path& source);

struct ManifestRecord {
    std::size_t row = 0;
    std::string image_id;
    std::string account_id;
    std::optional<std::string> label;

    friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct CorpusManifest {
    std::vector<ManifestRecord> records;

    std::size_t size() const noexcept { return records.size(); }
    /// Image ids indexed by row. Requires the row bijection to hold.
    std::vector<std::string> image_ids_by_row() const;

    friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

CorpusManifest read_manifest(const std::filesystem::path& source);
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& destination);

using AccountScores = std::map<std::string, double, std::less<>>;
using ImageLabels = std::map<std::string, std::string, std::less<>>;

/// CSV with header account_id,score. Duplicate accounts and non-finite
/// scores are parse errors.
AccountScores read_scores(const std::filesystem::path& source);
void write_scores(const AccountScores& scores, const std::filesystem::path& destination);
/// CSV with header image_id,label.
ImageLabels read_labels(const std::filesystem::path& source);
void write_labels(const ImageLabels& labels, const std::filesystem::path& destination);

struct Corpus {
    EmbeddingMatrix matrix;
    CorpusManifest manifest;
    std::optional<AccountScores> scores;
};

struct Violation {
    std::string kind;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    /// Conditions that are legal but worth surfacing (e.g. unscored accounts).
    std::vector<Violation> warnings;

    bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate_corpus(const Corpus& corpus);

/// Keeps min(per_account, available) rows of every account, chosen uniformly
/// without replacement. Accounts are visited in lexicographic order from a
/// single generator seeded with `seed`; record order is preserved and row
/// indices still refer to the source matrix.
CorpusManifest sample_per_account(const CorpusManifest& manifest, std::size_t per_account,
                                  std::uint64_t seed);

/// Materializes a sampled manifest: copies the referenced matrix rows and
/// renumbers manifest rows 0..m-1 in record order.
Corpus subset_corpus(const Corpus& corpus, const CorpusManifest& sampled);

}  // namespace imagetypes
