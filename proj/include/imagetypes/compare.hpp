#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "imagetypes/cluster.hpp"
#include "imagetypes/corpus.hpp"

namespace imagetypes {

/// A clustering keyed by image id, so clusterings of differently ordered
/// matrices of the same corpus can be compared.
struct Labeling {
    std::string source_tag;
    std::size_t k = 0;
    std::vector<std::string> image_ids;
    Assignments clusters;  // parallel to image_ids
};

/// k = 0 means max(cluster) + 1.
Labeling make_labeling(std::span<const ClusterId> assignments, const CorpusManifest& manifest,
                       std::string source_tag = {}, std::size_t k = 0);

/// |a ∩ b| / |a ∪ b|; 1.0 when both are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

struct OverlapMatrix {
    std::size_t rows = 0;  // clusters of A
    std::size_t cols = 0;  // clusters of B
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<double> values;              // row-major Jaccard
    std::vector<std::size_t> intersections;  // row-major |A_i ∩ B_j|
    std::vector<std::size_t> row_sizes;
    std::vector<std::size_t> col_sizes;

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    std::size_t intersection(std::size_t i, std::size_t j) const { return intersections[i * cols + j]; }
};

/// Entry (i, j) is the Jaccard similarity of the image sets in cluster i of A
/// and cluster j of B. Throws RowMismatch unless both cover the same image ids.
OverlapMatrix overlap_matrix(const Labeling& a, const Labeling& b);
OverlapMatrix overlap_matrix(std::span<const ClusterId> assign_a, std::span<const ClusterId> assign_b,
                             const CorpusManifest& manifest);

struct OverlapEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;

    friend bool operator==(const OverlapEntry&, const OverlapEntry&) = default;
};

/// Entries strictly above tau, by descending value then (row, col).
std::vector<OverlapEntry> threshold_pairs(const OverlapMatrix& matrix, double tau);

std::string overlap_csv(const OverlapMatrix& matrix);

}  // namespace imagetypes
