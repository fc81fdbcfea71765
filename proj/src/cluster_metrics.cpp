#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "imagetypes/cluster.hpp"
#include "imagetypes/error.hpp"
#include "imagetypes/parallel.hpp"
#include "imagetypes/random.hpp"

namespace imagetypes {

namespace {

std::size_t label_count(std::span<const ClusterId> assignments) {
    std::size_t k = 0;
    for (auto a : assignments) k = std::max<std::size_t>(k, std::size_t{a} + 1);
    return k;
}

}  // namespace

double davies_bouldin(const EmbeddingMatrix& matrix, const EmbeddingMatrix& centroids,
                      std::span<const ClusterId> assignments) {
    const std::size_t k = centroids.rows();
    if (centroids.dim() != matrix.dim())
        throw Error(ErrorCode::DimensionMismatch, "centroid and row dimensions differ");
    if (assignments.size() != matrix.rows())
        throw Error(ErrorCode::DimensionMismatch, "assignment count differs from row count");
    if (k < 2) throw Error(ErrorCode::SingleCluster, "Davies-Bouldin needs at least two clusters");

    std::vector<std::vector<double>> member_dist(k);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        if (assignments[i] >= k) throw Error(ErrorCode::DimensionMismatch, "assignment out of range");
        member_dist[assignments[i]].push_back(euclidean_distance(matrix.row(i), centroids.row(assignments[i])));
    }
    std::vector<double> scatter(k);
    for (std::size_t c = 0; c < k; ++c) {
        if (member_dist[c].empty()) throw Error(ErrorCode::EmptyCluster, fmt::format("cluster {} has no members", c));
        scatter[c] = pairwise_sum(member_dist[c]) / static_cast<double>(member_dist[c].size());
    }

    std::vector<double> worst(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double sep = euclidean_distance(centroids.row(i), centroids.row(j));
            if (sep == 0.0)
                throw Error(ErrorCode::DegenerateCentroids, fmt::format("centroids {} and {} coincide", i, j));
            worst[i] = std::max(worst[i], (scatter[i] + scatter[j]) / sep);
        }
    }
    return pairwise_sum(worst) / static_cast<double>(k);
}

double silhouette(const EmbeddingMatrix& matrix, std::span<const ClusterId> assignments,
                  std::optional<std::size_t> sample_cap, std::uint64_t seed, unsigned threads) {
    const std::size_t n = matrix.rows();
    if (assignments.size() != n) throw Error(ErrorCode::DimensionMismatch, "assignment count differs from row count");
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "silhouette needs at least two rows");

    const std::size_t k = label_count(assignments);
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assignments) ++sizes[a];
    if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2)
        throw Error(ErrorCode::SingleCluster, "silhouette needs at least two non-empty clusters");

    std::vector<std::size_t> points(n);
    std::iota(points.begin(), points.end(), std::size_t{0});
    if (sample_cap && *sample_cap > 0 && n > *sample_cap) {
        Rng rng(seed);
        for (std::size_t i = 0; i < *sample_cap; ++i) std::swap(points[i], points[i + rng.below(n - i)]);
        points.resize(*sample_cap);
        std::sort(points.begin(), points.end());
    }

    std::vector<double> scores(points.size());
    parallel_for(points.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> sums(k);
        for (std::size_t p = begin; p < end; ++p) {
            const std::size_t i = points[p];
            const ClusterId own = assignments[i];
            if (sizes[own] == 1) {
                scores[p] = 0.0;
                continue;
            }
            std::fill(sums.begin(), sums.end(), 0.0);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) sums[assignments[j]] += euclidean_distance(matrix.row(i), matrix.row(j));
            const double a = sums[own] / static_cast<double>(sizes[own] - 1);
            double b = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c)
                if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
            const double denom = std::max(a, b);
            scores[p] = denom > 0.0 ? (b - a) / denom : 0.0;
        }
    });
    return pairwise_sum(scores) / static_cast<double>(scores.size());
}

}  // namespace imagetypes
