#include <gtest/gtest.h>

#include <filesystem>

#include "imagetypes/cluster.hpp"
#include "imagetypes/error.hpp"
#include "imagetypes/synthetic.hpp"
#include "oracles.hpp"

using namespace imagetypes;

namespace {

synthetic::Blobs planted(std::size_t k, std::size_t per_blob, std::size_t dim, double sigma, std::uint64_t seed) {
    return synthetic::make_blobs(synthetic::spread_centers(k, dim, 1.0, seed), per_blob, sigma, seed + 1);
}

}  // namespace

TEST(KMeans, RecoversWellSeparatedBlobs) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto b = planted(4, 50, 6, 0.05, seed);
        const auto model = fit_kmeans(b.matrix, 4, {.seed = seed});
        EXPECT_TRUE(oracle::same_partition(model.assignments, b.labels)) << "seed " << seed;
        EXPECT_TRUE(model.converged);
    }
}

TEST(KMeans, InertiaHistoryIsNonIncreasing) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto x = oracle::gaussian_matrix(120, 5, seed);
        const auto model = fit_kmeans(x, 2 + seed % 6, {.seed = seed});
        ASSERT_FALSE(model.inertia_history.empty());
        for (std::size_t i = 1; i < model.inertia_history.size(); ++i)
            EXPECT_LE(model.inertia_history[i], model.inertia_history[i - 1]);
        EXPECT_DOUBLE_EQ(model.inertia, model.inertia_history.back());
    }
}

TEST(KMeans, FinalStateIsAFixedPoint) {
    const auto x = oracle::gaussian_matrix(200, 4, 3);
    const auto model = fit_kmeans(x, 5, {.seed = 9});
    ASSERT_TRUE(model.converged);
    EXPECT_EQ(assign(model.centroids, x), model.assignments);
    EXPECT_NEAR(inertia(x, model.centroids, model.assignments), model.inertia, 1e-9 * model.inertia);
}

TEST(KMeans, InertiaMatchesBruteForce) {
    const auto x = oracle::gaussian_matrix(90, 3, 11);
    const auto model = fit_kmeans(x, 3, {.seed = 1});
    double expected = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double d = oracle::dist(x, i, model.centroids, model.assignments[i]);
        expected += d * d;
    }
    EXPECT_NEAR(model.inertia, expected, 1e-9 * expected);
}

TEST(KMeans, DeterministicAndThreadIndependent) {
    const auto x = oracle::gaussian_matrix(500, 8, 21);
    const auto a = fit_kmeans(x, 6, {.seed = 5, .threads = 1});
    const auto b = fit_kmeans(x, 6, {.seed = 5, .threads = 4});
    const auto c = fit_kmeans(x, 6, {.seed = 5, .threads = 1});
    EXPECT_EQ(a.assignments, b.assignments);
    EXPECT_EQ(a.centroids, b.centroids);
    EXPECT_EQ(a.inertia, b.inertia);
    EXPECT_EQ(a.inertia_history, c.inertia_history);
}

TEST(KMeans, RotationInvariantPartition) {
    // Swap coordinates and negate one axis: distances are unchanged up to rounding.
    const auto b = planted(3, 40, 4, 0.05, 77);
    std::vector<float> v;
    for (std::size_t i = 0; i < b.matrix.rows(); ++i) {
        const auto r = b.matrix.row(i);
        v.insert(v.end(), {r[1], -r[0], r[3], r[2]});
    }
    const EmbeddingMatrix rotated(b.matrix.rows(), 4, std::move(v));
    const auto m1 = fit_kmeans(b.matrix, 3, {.seed = 2});
    const auto m2 = fit_kmeans(rotated, 3, {.seed = 2});
    EXPECT_TRUE(oracle::same_partition(m1.assignments, m2.assignments));
}

TEST(KMeans, KmeansPlusPlusPicksDistinctRows) {
    const auto x = oracle::gaussian_matrix(50, 3, 8);
    const auto c = kmeanspp_init(x, 10, 4);
    EXPECT_EQ(c.rows(), 10u);
    EXPECT_EQ(count_distinct_rows(c), 10u);
    for (std::size_t j = 0; j < c.rows(); ++j) {
        bool found = false;
        for (std::size_t i = 0; i < x.rows() && !found; ++i) found = std::ranges::equal(c.row(j), x.row(i));
        EXPECT_TRUE(found);
    }
}

TEST(KMeans, ErrorsOnBadK) {
    const EmbeddingMatrix dupes(4, 1, {1, 1, 2, 2});
    EXPECT_THROW(fit_kmeans(dupes, 3), Error);
    EXPECT_THROW(fit_kmeans(dupes, 0), Error);
    const auto model = fit_kmeans(dupes, 2);
    EXPECT_EQ(model.inertia, 0.0);
}

TEST(KMeans, TiesGoToLowestCluster) {
    const EmbeddingMatrix centroids(2, 1, {-1, 1});
    const EmbeddingMatrix x(1, 1, {0});
    EXPECT_EQ(assign(centroids, x), Assignments{0});
}

TEST(KMeans, ModelPersistenceRoundTrip) {
    const auto x = oracle::gaussian_matrix(60, 3, 2);
    auto model = fit_kmeans(x, 3, {.seed = 3});
    model.source_tag = "gauss";
    const auto prefix = std::filesystem::temp_directory_path() / "imagetypes_unit" / "model";
    save_model(model, prefix);
    const auto back = load_model(prefix);
    EXPECT_EQ(back.k, model.k);
    EXPECT_EQ(back.centroids, model.centroids);
    EXPECT_EQ(back.assignments, model.assignments);
    EXPECT_EQ(back.inertia, model.inertia);
    EXPECT_EQ(back.inertia_history, model.inertia_history);
    EXPECT_EQ(back.seed, model.seed);
    EXPECT_EQ(back.source_tag, "gauss");
}

TEST(Scan, ReportsEveryK) {
    const auto b = planted(3, 30, 4, 0.05, 5);
    ScanOptions o;
    o.k_min = 2;
    o.k_max = 6;
    o.seed = 1;
    const auto report = scan_k(b.matrix, o);
    ASSERT_EQ(report.entries.size(), 5u);
    for (std::size_t i = 0; i < report.entries.size(); ++i) EXPECT_EQ(report.entries[i].k, 2 + i);
    // The planted k has the best silhouette and Davies-Bouldin.
    const auto& e3 = report.entries[1];
    for (const auto& e : report.entries) {
        EXPECT_LE(e3.davies_bouldin, e.davies_bouldin);
        EXPECT_GE(e3.silhouette, e.silhouette);
    }
    const auto again = scan_k(b.matrix, o);
    EXPECT_EQ(scan_report_csv(report), scan_report_csv(again));
}
