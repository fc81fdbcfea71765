#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "imagetypes/cluster.hpp"
#include "imagetypes/corpus.hpp"

namespace imagetypes::synthetic {

struct Blobs {
    EmbeddingMatrix matrix;
    Assignments labels;  // planted blob of each row
};

/// Isotropic Gaussian blobs, `per_blob` rows around each center, rows
/// interleaved blob by blob (0, 1, ..., k-1, 0, 1, ...).
Blobs make_blobs(const std::vector<std::vector<double>>& centers, std::size_t per_blob, double sigma,
                 std::uint64_t seed);

/// `k` blob centers in `dim` dimensions with pairwise distance of at least
/// `min_separation`.
std::vector<std::vector<double>> spread_centers(std::size_t k, std::size_t dim, double min_separation,
                                                std::uint64_t seed);

struct CorpusOptions {
    std::size_t accounts = 8;
    std::size_t images_per_account = 21;
    std::size_t dim = 64;
    std::size_t latent_types = 4;
    std::vector<std::string> sources{"model_a", "model_b", "model_c"};
    /// Images whose embedding exactly repeats an earlier image of the same account.
    std::size_t duplicates = 6;
    std::size_t external_images = 60;
    double external_first_label_share = 0.6;
    std::uint64_t seed = 7;
};

struct SyntheticCorpus {
    std::map<std::string, EmbeddingMatrix> embeddings;  // per source
    CorpusManifest manifest;
    AccountScores scores;
    std::map<std::string, EmbeddingMatrix> external;    // per source
    CorpusManifest external_manifest;
    ImageLabels labels;
};

/// Accounts lean toward latent image types according to a planted ideology
/// score; each source is a different random linear view of the same latent
/// images. The external set is labeled independently of geometry.
SyntheticCorpus make_corpus(const CorpusOptions& options = {});

/// Writes the corpus plus a ready-to-run config.ini under `directory`.
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& directory);

}  // namespace imagetypes::synthetic
