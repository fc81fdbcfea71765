#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imagetypes/cluster.hpp"
#include "imagetypes/corpus.hpp"

namespace imagetypes {

/// An unordered image pair; image_id_a < image_id_b lexicographically.
struct RankedPair {
    std::string image_id_a;
    std::string image_id_b;
    double distance = 0.0;  // Euclidean, accumulated in double
    ClusterId source_cluster = 0;

    friend bool operator==(const RankedPair&, const RankedPair&) = default;
};

/// Ranking order: distance ascending, then (image_id_a, image_id_b).
bool pair_before(const RankedPair& x, const RankedPair& y) noexcept;

struct PairRanking {
    std::vector<RankedPair> pairs;  // ascending by pair_before
    std::size_t per_cluster_k = 0;
    std::size_t global_k = 0;
    std::string source_tag;
};

inline constexpr std::size_t kDefaultPerClusterK = 3000;
inline constexpr std::size_t kDefaultGlobalK = 3000;

/// The k closest pairs among the rows assigned to cluster_id (every pair if
/// there are fewer). Enumerates all C(m, 2) pairs while keeping only a
/// bounded best-k set. `image_ids` is indexed by matrix row.
std::vector<RankedPair> topk_pairs_within_cluster(const EmbeddingMatrix& matrix, std::span<const ClusterId> assignments,
                                                  std::span<const std::string> image_ids, ClusterId cluster_id,
                                                  std::size_t k = kDefaultPerClusterK, unsigned threads = 0);

/// The global_k smallest pairs of the union of the per-cluster lists.
PairRanking merge_topk(std::span<const std::vector<RankedPair>> per_cluster, std::size_t global_k = kDefaultGlobalK);

/// Both stages over every cluster present in `assignments`.
PairRanking rank_near_duplicates(const EmbeddingMatrix& matrix, std::span<const ClusterId> assignments,
                                 std::span<const std::string> image_ids, std::size_t per_cluster_k = kDefaultPerClusterK,
                                 std::size_t global_k = kDefaultGlobalK, unsigned threads = 0);

/// Average ranks (ties share the mean of their positions), 1-based.
std::vector<double> fractional_ranks(std::span<const double> values);

/// Pearson correlation of fractional ranks. Throws DegenerateRanks when either
/// side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

struct CurvePoint {
    std::size_t k = 0;
    std::optional<double> rho;  // nullopt when fewer than two pairs overlap
    std::size_t overlap = 0;
};

/// For k = k_start, k_start + k_step, ... up to the longer ranking: take the
/// pairs present in both top-k lists and correlate their positions in each.
std::vector<CurvePoint> consistency_curve(const PairRanking& a, const PairRanking& b, std::size_t k_start = 100,
                                          std::size_t k_step = 100);

std::string ranking_csv(const PairRanking& ranking);
std::string curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace imagetypes
