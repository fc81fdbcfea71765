#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imagetypes/corpus.hpp"

namespace imagetypes {

using ClusterId = std::uint32_t;
using Assignments = std::vector<ClusterId>;

struct KMeansOptions {
    std::size_t max_iterations = 1000;
    /// Stop once no centroid moves farther than this (Euclidean).
    double tol = 1e-6;
    std::uint64_t seed = 0;
    /// 0 means hardware concurrency. Results do not depend on this value.
    unsigned threads = 0;
};

struct ClusterModel {
    std::size_t k = 0;
    EmbeddingMatrix centroids;  // k x d
    Assignments assignments;    // one per training row
    std::size_t iterations_run = 0;
    bool converged = false;
    double inertia = 0.0;
    std::uint64_t seed = 0;
    std::string source_tag;
    /// Inertia after the initial assignment and after every Lloyd iteration.
    std::vector<double> inertia_history;
};

/// Squared Euclidean distance accumulated in double.
double squared_distance(std::span<const float> a, std::span<const float> b) noexcept;
double euclidean_distance(std::span<const float> a, std::span<const float> b) noexcept;

/// Number of distinct rows by value (-0.0 and 0.0 compare equal).
std::size_t count_distinct_rows(const EmbeddingMatrix& matrix);

/// k-means++ seeding: first centroid uniform over rows, each later one drawn
/// with probability proportional to squared distance from the nearest centroid
/// already chosen. Throws KTooLarge if k exceeds the distinct row count.
EmbeddingMatrix kmeanspp_init(const EmbeddingMatrix& matrix, std::size_t k, std::uint64_t seed,
                              unsigned threads = 0);

/// Lloyd iteration from k-means++ seeding. An empty cluster is re-seeded at
/// the row farthest from its current centroid.
ClusterModel fit_kmeans(const EmbeddingMatrix& matrix, std::size_t k, const KMeansOptions& options = {});

/// Nearest centroid per row; ties go to the lowest cluster id.
Assignments assign(const EmbeddingMatrix& centroids, const EmbeddingMatrix& matrix, unsigned threads = 0);

/// Sum of squared distances from each row to its assigned centroid.
double inertia(const EmbeddingMatrix& matrix, const EmbeddingMatrix& centroids, std::span<const ClusterId> assignments);

/// Mean over clusters of max_{j != i} (s_i + s_j) / d_ij, where s is the mean
/// member-to-centroid distance and d the centroid separation.
double davies_bouldin(const EmbeddingMatrix& matrix, const EmbeddingMatrix& centroids,
                      std::span<const ClusterId> assignments);

inline constexpr std::size_t kDefaultSilhouetteCap = 5000;

/// Mean silhouette (b - a) / max(a, b). Points in singleton clusters score 0,
/// as do points with a == b == 0. When sample_cap is set and n exceeds it, the
/// mean is taken over a seeded uniform sample of sample_cap points (a and b
/// still use every row).
double silhouette(const EmbeddingMatrix& matrix, std::span<const ClusterId> assignments,
                  std::optional<std::size_t> sample_cap = kDefaultSilhouetteCap, std::uint64_t seed = 0,
                  unsigned threads = 0);

struct ScanOptions {
    std::size_t k_min = 2;
    std::size_t k_max = 20;
    /// Fits per k; the lowest-inertia fit is reported.
    std::size_t restarts = 1;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 1000;
    double tol = 1e-6;
    std::optional<std::size_t> silhouette_cap = kDefaultSilhouetteCap;
    unsigned threads = 0;
};

struct KScanEntry {
    std::size_t k = 0;
    double inertia = 0.0;
    double davies_bouldin = 0.0;
    double silhouette = 0.0;
    std::uint64_t seed = 0;  // seed of the reported fit
    std::size_t iterations_run = 0;
    bool converged = false;
};

struct KScanReport {
    std::string source_tag;
    std::vector<KScanEntry> entries;
};

/// Seed used for restart r at cluster count k.
std::uint64_t scan_seed(std::uint64_t seed, std::size_t k, std::size_t restart) noexcept;

KScanReport scan_k(const EmbeddingMatrix& matrix, const ScanOptions& options = {});

// Persistence: PREFIX.centroids.emb (EMB1), PREFIX.model.json, PREFIX.assignments.csv (row,cluster).
void save_model(const ClusterModel& model, const std::filesystem::path& prefix);
ClusterModel load_model(const std::filesystem::path& prefix);
void write_assignments(std::span<const ClusterId> assignments, const std::filesystem::path& destination);
Assignments read_assignments(const std::filesystem::path& source);

std::string scan_report_csv(const KScanReport& report);

}  // namespace imagetypes
