#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imagetypes/cluster.hpp"
#include "imagetypes/corpus.hpp"

namespace imagetypes {

struct CrosstabTable {
    std::size_t k = 0;
    std::vector<std::string> labels;                  // sorted
    std::vector<std::vector<std::size_t>> counts;     // [cluster][label]
    std::vector<std::vector<double>> percentages;     // [cluster][label], row-wise; zeros for empty clusters
    std::vector<std::size_t> cluster_totals;
    std::vector<std::size_t> label_totals;
    std::size_t total = 0;
    /// Largest |share of label in cluster - global share of label|, as a
    /// fraction; nullopt for clusters that received no rows.
    std::vector<std::optional<double>> max_deviation;
};

/// Assigns each external row to its nearest model centroid and tabulates the
/// label distribution per cluster. `image_ids` is indexed by external row.
CrosstabTable crosstab(const ClusterModel& model, const EmbeddingMatrix& external,
                       std::span<const std::string> image_ids, const ImageLabels& labels, unsigned threads = 0);
CrosstabTable crosstab(const ClusterModel& model, const EmbeddingMatrix& external, const CorpusManifest& manifest,
                       const ImageLabels& labels, unsigned threads = 0);

/// One row per cluster with "count: pct%" cells, then an "all" row.
std::string crosstab_csv(const CrosstabTable& table);
std::string crosstab_json(const CrosstabTable& table);

}  // namespace imagetypes
