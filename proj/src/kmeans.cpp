#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

#include <fmt/format.h>

#include "imagetypes/cluster.hpp"
#include "imagetypes/error.hpp"
#include "imagetypes/parallel.hpp"
#include "imagetypes/random.hpp"

namespace imagetypes {

namespace {

std::string row_key(std::span<const float> row) {
    std::string key(row.size() * sizeof(float), '\0');
    for (std::size_t j = 0; j < row.size(); ++j) {
        const float v = row[j] == 0.0f ? 0.0f : row[j];
        std::memcpy(key.data() + j * sizeof(float), &v, sizeof(float));
    }
    return key;
}

void require_same_dim(const EmbeddingMatrix& centroids, const EmbeddingMatrix& matrix) {
    if (centroids.dim() != matrix.dim())
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("centroids have d={}, rows have d={}", centroids.dim(), matrix.dim()));
}

struct Nearest {
    ClusterId cluster;
    double dist2;
};

Nearest nearest_centroid(std::span<const float> row, const EmbeddingMatrix& centroids) {
    Nearest best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d2 = squared_distance(row, centroids.row(c));
        if (d2 < best.dist2) best = {static_cast<ClusterId>(c), d2};
    }
    return best;
}

void assign_into(const EmbeddingMatrix& centroids, const EmbeddingMatrix& matrix, unsigned threads,
                 Assignments& labels, std::vector<double>& dist2) {
    labels.resize(matrix.rows());
    dist2.resize(matrix.rows());
    parallel_for(matrix.rows(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto nn = nearest_centroid(matrix.row(i), centroids);
            labels[i] = nn.cluster;
            dist2[i] = nn.dist2;
        }
    });
}

// Means of each cluster's members (rows visited in index order), rounded to
// float. Clusters without members keep their previous centroid and are listed
// in `empty`.
std::vector<float> update_centroids(const EmbeddingMatrix& matrix, const Assignments& labels,
                                    const EmbeddingMatrix& previous, unsigned threads,
                                    std::vector<std::size_t>& empty) {
    const std::size_t k = previous.rows();
    const std::size_t d = matrix.dim();
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

    std::vector<float> out(previous.values().begin(), previous.values().end());
    parallel_for(k, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(d);
        for (std::size_t c = begin; c < end; ++c) {
            if (members[c].empty()) continue;
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t i : members[c]) {
                const auto row = matrix.row(i);
                for (std::size_t j = 0; j < d; ++j) acc[j] += row[j];
            }
            const double inv = 1.0 / static_cast<double>(members[c].size());
            for (std::size_t j = 0; j < d; ++j) out[c * d + j] = static_cast<float>(acc[j] * inv);
        }
    });
    empty.clear();
    for (std::size_t c = 0; c < k; ++c)
        if (members[c].empty()) empty.push_back(c);
    return out;
}

// Moves each empty centroid onto the row farthest from its assigned centroid.
// Rows sitting on a centroid (distance 0) and repeats of an already chosen row
// are skipped, so a repaired centroid never coincides with another one.
void repair_empty(const EmbeddingMatrix& matrix, const std::vector<double>& dist2,
                  std::span<const std::size_t> empty, std::vector<float>& centroids) {
    if (empty.empty()) return;
    const std::size_t d = matrix.dim();
    std::vector<std::size_t> order(matrix.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist2[a] > dist2[b]; });

    std::unordered_set<std::string> used;
    std::size_t next = 0;
    for (std::size_t c : empty) {
        while (next < order.size()) {
            const std::size_t i = order[next++];
            if (dist2[i] <= 0.0) {
                next = order.size();
                break;
            }
            if (!used.insert(row_key(matrix.row(i))).second) continue;
            const auto row = matrix.row(i);
            std::copy(row.begin(), row.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * d));
            break;
        }
    }
}

}  // namespace

double squared_distance(std::span<const float> a, std::span<const float> b) noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        s += diff * diff;
    }
    return s;
}

double euclidean_distance(std::span<const float> a, std::span<const float> b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

std::size_t count_distinct_rows(const EmbeddingMatrix& matrix) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < matrix.rows(); ++i) seen.insert(row_key(matrix.row(i)));
    return seen.size();
}

EmbeddingMatrix kmeanspp_init(const EmbeddingMatrix& matrix, std::size_t k, std::uint64_t seed, unsigned threads) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (const auto distinct = count_distinct_rows(matrix); k > distinct)
        throw Error(ErrorCode::KTooLarge, fmt::format("k={} exceeds the {} distinct rows", k, distinct));

    const std::size_t n = matrix.rows();
    const std::size_t d = matrix.dim();
    Rng rng(seed);
    std::vector<float> centroids;
    centroids.reserve(k * d);

    auto take = [&](std::size_t i) {
        const auto row = matrix.row(i);
        centroids.insert(centroids.end(), row.begin(), row.end());
    };

    take(rng.below(n));
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    std::vector<double> cumulative(n);
    for (std::size_t c = 1; c < k; ++c) {
        const std::span<const float> last(centroids.data() + (c - 1) * d, d);
        parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) min_d2[i] = std::min(min_d2[i], squared_distance(matrix.row(i), last));
        });
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += min_d2[i];
            cumulative[i] = total;
        }
        // First row whose cumulative weight exceeds the target; zero-weight
        // rows (already chosen or duplicates of a centroid) cannot be drawn.
        const double target = rng.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        std::size_t pick = static_cast<std::size_t>(it - cumulative.begin());
        if (it == cumulative.end()) {
            // target rounded up to total: take the last row with weight.
            pick = n - 1;
            while (pick > 0 && min_d2[pick] <= 0.0) --pick;
        }
        take(pick);
    }
    return EmbeddingMatrix(k, d, std::move(centroids), matrix.source_tag());
}

Assignments assign(const EmbeddingMatrix& centroids, const EmbeddingMatrix& matrix, unsigned threads) {
    require_same_dim(centroids, matrix);
    if (centroids.rows() == 0) throw Error(ErrorCode::InvalidArgument, "no centroids");
    Assignments labels;
    std::vector<double> dist2;
    assign_into(centroids, matrix, threads, labels, dist2);
    return labels;
}

double inertia(const EmbeddingMatrix& matrix, const EmbeddingMatrix& centroids, std::span<const ClusterId> assignments) {
    require_same_dim(centroids, matrix);
    if (assignments.size() != matrix.rows())
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} assignments for {} rows", assignments.size(), matrix.rows()));
    std::vector<double> per_row(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        if (assignments[i] >= centroids.rows())
            throw Error(ErrorCode::DimensionMismatch, fmt::format("assignment {} out of range", assignments[i]));
        per_row[i] = squared_distance(matrix.row(i), centroids.row(assignments[i]));
    }
    return pairwise_sum(per_row);
}

ClusterModel fit_kmeans(const EmbeddingMatrix& matrix, std::size_t k, const KMeansOptions& options) {
    if (options.max_iterations == 0) throw Error(ErrorCode::InvalidArgument, "max_iterations must be at least 1");
    const std::size_t d = matrix.dim();

    ClusterModel model;
    model.k = k;
    model.seed = options.seed;
    model.source_tag = matrix.source_tag();
    model.centroids = kmeanspp_init(matrix, k, options.seed, options.threads);

    Assignments labels;
    std::vector<double> dist2;
    assign_into(model.centroids, matrix, options.threads, labels, dist2);
    model.inertia_history.push_back(pairwise_sum(dist2));

    std::vector<std::size_t> empty;
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        auto next = update_centroids(matrix, labels, model.centroids, options.threads, empty);
        repair_empty(matrix, dist2, empty, next);

        double shift2 = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            shift2 = std::max(shift2, squared_distance(model.centroids.row(c),
                                                       std::span<const float>(next.data() + c * d, d)));
        model.centroids = EmbeddingMatrix(k, d, std::move(next), matrix.source_tag());

        Assignments next_labels;
        assign_into(model.centroids, matrix, options.threads, next_labels, dist2);
        model.inertia_history.push_back(pairwise_sum(dist2));
        model.iterations_run = it;

        const bool unchanged = next_labels == labels;
        labels = std::move(next_labels);
        if (unchanged || std::sqrt(shift2) < options.tol) {
            model.converged = true;
            break;
        }
    }
    model.assignments = std::move(labels);
    model.inertia = model.inertia_history.back();
    return model;
}

std::uint64_t scan_seed(std::uint64_t seed, std::size_t k, std::size_t restart) noexcept {
    return derive_seed(seed, (static_cast<std::uint64_t>(k) << 20) | restart);
}

KScanReport scan_k(const EmbeddingMatrix& matrix, const ScanOptions& options) {
    if (options.k_min < 2 || options.k_max < options.k_min)
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("k range [{}, {}] must satisfy 2 <= k_min <= k_max", options.k_min, options.k_max));
    if (options.restarts == 0) throw Error(ErrorCode::InvalidArgument, "restarts must be at least 1");

    KScanReport report;
    report.source_tag = matrix.source_tag();
    for (std::size_t k = options.k_min; k <= options.k_max; ++k) {
        std::optional<ClusterModel> best;
        for (std::size_t r = 0; r < options.restarts; ++r) {
            KMeansOptions fit_options{options.max_iterations, options.tol, scan_seed(options.seed, k, r), options.threads};
            auto model = fit_kmeans(matrix, k, fit_options);
            if (!best || model.inertia < best->inertia) best = std::move(model);
        }
        KScanEntry entry;
        entry.k = k;
        entry.inertia = best->inertia;
        entry.davies_bouldin = davies_bouldin(matrix, best->centroids, best->assignments);
        entry.silhouette = silhouette(matrix, best->assignments, options.silhouette_cap, options.seed, options.threads);
        entry.seed = best->seed;
        entry.iterations_run = best->iterations_run;
        entry.converged = best->converged;
        report.entries.push_back(entry);
    }
    return report;
}

}  // namespace imagetypes
