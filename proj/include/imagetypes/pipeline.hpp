#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "imagetypes/cluster.hpp"
#include "imagetypes/corpus.hpp"

namespace imagetypes {

std::string_view library_version() noexcept;

/// Raised for invalid or inconsistent run configuration (bad values, missing
/// input paths, missing upstream stage artifacts). The CLI exits with 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every pipeline parameter. Defaults reproduce the published setup.
struct RunConfig {
    /// source tag -> EMB1 path, in run order.
    std::map<std::string, std::filesystem::path> embeddings;
    std::filesystem::path manifest;
    /// Per-source manifest overrides, for sources whose rows are ordered differently.
    std::map<std::string, std::filesystem::path> source_manifests;
    std::optional<std::filesystem::path> scores;
    /// Externally labeled set for crosstab: per-source EMB1, one manifest, one labels CSV.
    std::map<std::string, std::filesystem::path> external_embeddings;
    std::optional<std::filesystem::path> external_manifest;
    std::optional<std::filesystem::path> labels;

    std::size_t k = 8;
    std::size_t k_min = 2;
    std::size_t k_max = 20;
    std::size_t restarts = 1;
    std::size_t max_iterations = 1000;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    std::optional<std::size_t> silhouette_cap = kDefaultSilhouetteCap;
    std::optional<std::size_t> sample_per_account;
    std::size_t min_images = 15;
    std::size_t per_cluster_k = 3000;
    std::size_t global_k = 3000;
    std::size_t spearman_k_start = 100;
    std::size_t spearman_k_step = 100;
    double jaccard_tau = 0.3;
    unsigned threads = 0;
    std::filesystem::path out = "out";
};

/// Throws ConfigError naming the first problem (non-positive parameter,
/// missing input path).
void check_config(const RunConfig& config, bool need_scores = false, bool need_external = false);

/// Files a stage wrote, relative to config.out.
struct StageResult {
    std::string stage;
    std::vector<std::filesystem::path> outputs;
};

/// Loads one source as a validated corpus (sampling applied when configured).
Corpus load_source(const RunConfig& config, const std::string& tag);

StageResult cmd_scan_k(const RunConfig& config);
StageResult cmd_cluster(const RunConfig& config);
StageResult cmd_compare(const RunConfig& config);
StageResult cmd_regress(const RunConfig& config);
StageResult cmd_neardup(const RunConfig& config);
StageResult cmd_crosstab(const RunConfig& config);
/// Every stage in order (compare needs two sources, regress needs scores,
/// crosstab needs an external set), then report.json.
std::vector<StageResult> cmd_report(const RunConfig& config);

std::string sha256_hex_file(const std::filesystem::path& path);

}  // namespace imagetypes
