// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
//
//   imagetypes_acceptance <source-dir> <scratch-dir>

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>
#include <fmt/format.h>

#include "imagetypes/cluster.hpp"
#include "imagetypes/compare.hpp"
#include "imagetypes/crosstab.hpp"
#include "imagetypes/csv.hpp"
#include "imagetypes/ideology.hpp"
#include "imagetypes/neardup.hpp"
#include "imagetypes/pipeline.hpp"
#include "imagetypes/synthetic.hpp"
#include "oracles.hpp"

using namespace imagetypes;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// --- k-means recovery on planted blobs --------------------------------------

Outcome kmeans_recovery() {
    const auto t0 = Clock::now();
    int recovered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto centers = synthetic::spread_centers(3, 8, 1.0, seed);
        const auto blobs = synthetic::make_blobs(centers, 100, 0.05, seed + 1000);
        const auto model = fit_kmeans(blobs.matrix, 3, {.seed = seed});
        recovered += oracle::same_partition(model.assignments, blobs.labels);
    }
    const double secs = seconds_since(t0);
    return {recovered >= 99 && secs < 5.0, fmt::format("{}/100 seeds recovered, {:.2f}s (need >=99, <5s)", recovered, secs)};
}

Outcome lloyd_monotonicity() {
    int violations = 0;
    std::size_t steps = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 gen(seed);
        const std::size_t n = 50 + gen() % 250, d = 2 + gen() % 10, k = 2 + gen() % 9;
        const auto x = oracle::gaussian_matrix(n, d, seed * 31 + 7);
        const auto model = fit_kmeans(x, k, {.seed = seed});
        for (std::size_t i = 1; i < model.inertia_history.size(); ++i, ++steps)
            violations += model.inertia_history[i] > model.inertia_history[i - 1];
    }
    return {violations == 0, fmt::format("{} increases over {} recorded steps in 100 instances", violations, steps)};
}

Outcome metric_oracles() {
    double worst_db = 0.0, worst_sil = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 gen(seed + 500);
        const std::size_t n = 20 + gen() % 281, d = 2 + gen() % 8, k = 2 + gen() % 7;
        const auto x = oracle::gaussian_matrix(n, d, seed + 500);
        const auto model = fit_kmeans(x, k, {.seed = seed});
        worst_db = std::max(worst_db, std::abs(davies_bouldin(x, model.centroids, model.assignments) -
                                               oracle::davies_bouldin(x, model.centroids, model.assignments)));
        worst_sil = std::max(worst_sil, std::abs(silhouette(x, model.assignments, std::nullopt) -
                                                 oracle::silhouette(x, model.assignments)));
    }
    return {worst_db <= 1e-9 && worst_sil <= 1e-9,
            fmt::format("max |DB - oracle| = {:.3g}, max |silhouette - oracle| = {:.3g} (tol 1e-9)", worst_db, worst_sil)};
}

Outcome jaccard_overlap() {
    bool permutation = true, exact = true;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t n = 50 + seed * 10;
        CorpusManifest m;
        for (std::size_t i = 0; i < n; ++i) m.records.push_back({i, fmt::format("img_{}", i), "a", std::nullopt});
        const auto a = oracle::random_labels(n, 2 + seed % 8, seed);
        const auto b = oracle::random_labels(n, 2 + (seed * 7) % 9, seed + 99);
        const auto self = overlap_matrix(a, a, m);
        for (std::size_t i = 0; i < self.rows; ++i) {
            std::size_t row_ones = 0, col_ones = 0;
            for (std::size_t j = 0; j < self.cols; ++j) {
                row_ones += self.at(i, j) == 1.0;
                col_ones += self.at(j, i) == 1.0;
            }
            permutation = permutation && row_ones == 1 && col_ones == 1;
        }
        const auto ab = overlap_matrix(a, b, m);
        for (std::size_t i = 0; i < ab.rows; ++i)
            for (std::size_t j = 0; j < ab.cols; ++j) {
                std::set<std::string> sa, sb;
                for (std::size_t r = 0; r < n; ++r) {
                    if (a[r] == i) sa.insert(m.records[r].image_id);
                    if (b[r] == j) sb.insert(m.records[r].image_id);
                }
                exact = exact && ab.at(i, j) == oracle::jaccard(sa, sb);
            }
    }
    return {permutation && exact,
            fmt::format("self-overlap permutation: {}, set-oracle exact match: {}", permutation, exact)};
}

Outcome ols() {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> nd;
    const std::vector<double> beta{0.3, 1.5, -2.0, 0.75};
    DesignMatrix x;
    x.rows = 200;
    x.cols = beta.size();
    std::vector<double> y, exact_y;
    for (std::size_t i = 0; i < x.rows; ++i) {
        double yi = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double v = j == 0 ? 1.0 : nd(gen);
            x.values.push_back(v);
            yi += beta[j] * v;
        }
        exact_y.push_back(yi);
        y.push_back(yi + 0.5 * nd(gen));
    }
    const auto fit = ols_fit(x, y);
    double worst_z = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j)
        worst_z = std::max(worst_z, std::abs(fit.coefficients[j] - beta[j]) / fit.std_errors[j]);

    const auto exact = ols_fit(x, exact_y);
    double worst_resid = 0.0;
    for (double r : exact.residuals) worst_resid = std::max(worst_resid, std::abs(r));
    const double r2_err = std::abs(exact.r_squared - 1.0);

    // Intercept plus every cluster proportion: columns 1..k sum to the intercept.
    const std::size_t n = 60, k = 5;
    DesignMatrix px;
    px.rows = n;
    px.cols = k + 1;
    std::vector<double> py;
    std::gamma_distribution<double> g(1.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> w(k);
        double s = 0.0;
        for (auto& v : w) s += v = g(gen);
        px.values.push_back(1.0);
        for (auto v : w) px.values.push_back(v / s);
        py.push_back(nd(gen));
    }
    const auto pfit = ols_fit(px, py);
    const auto oracle_fitted = oracle::pinv_fitted(px.values, n, k + 1, py);
    double worst_fitted = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst_fitted = std::max(worst_fitted, std::abs(pfit.fitted[i] - oracle_fitted[i]));

    const bool pass = worst_z <= 3.0 && worst_resid <= 1e-10 && r2_err <= 1e-10 && pfit.rank_deficient &&
                      worst_fitted <= 1e-8;
    return {pass, fmt::format("max |b - beta|/se = {:.2f} (<=3); exact fit |1-R^2| = {:.2g}, max |resid| = {:.2g} "
                              "(<=1e-10); proportions design rank_deficient={}, max |fitted - pinv oracle| = {:.2g} (<=1e-8)",
                              worst_z, r2_err, worst_resid, pfit.rank_deficient, worst_fitted)};
}

Outcome neardup_equivalence() {
    bool equal = true;
    for (std::size_t n : {200u, 800u, 2000u}) {
        const auto x = oracle::gaussian_matrix(n, 6, n);
        const auto model = fit_kmeans(x, 8, {.seed = n});
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) ids.push_back(fmt::format("img_{:05d}", i));
        for (std::size_t k : {100u, 3000u}) {
            const auto r = rank_near_duplicates(x, model.assignments, ids, k, k);
            const auto brute = oracle::within_cluster_topk(x, model.assignments, ids, k);
            std::set<std::pair<std::string, std::string>> got, want;
            for (const auto& p : r.pairs) got.emplace(p.image_id_a, p.image_id_b);
            for (const auto& [d, a, b] : brute) want.emplace(a, b);
            equal = equal && got == want && r.pairs.size() == brute.size();
        }
    }

    // Inject exact duplicates into clustered data.
    const auto blobs = synthetic::make_blobs(synthetic::spread_centers(8, 6, 1.0, 3), 100, 0.2, 4);
    std::vector<float> v(blobs.matrix.values().begin(), blobs.matrix.values().end());
    const std::size_t dupes = 25;
    std::mt19937_64 gen(9);
    std::set<std::size_t> sources;
    while (sources.size() < dupes) sources.insert(gen() % blobs.matrix.rows());
    for (auto s : sources) v.insert(v.end(), blobs.matrix.row(s).begin(), blobs.matrix.row(s).end());
    const std::size_t n = blobs.matrix.rows() + dupes;
    const EmbeddingMatrix x(n, blobs.matrix.dim(), std::move(v));
    const auto model = fit_kmeans(x, 8, {.seed = 1});
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(fmt::format("img_{:05d}", i));
    const auto r = rank_near_duplicates(x, model.assignments, ids, 3000, 3000);
    bool dup_top = r.pairs.size() > dupes && r.pairs[dupes].distance > 0.0;
    for (std::size_t i = 0; i < dupes && dup_top; ++i) dup_top = r.pairs[i].distance == 0.0;
    return {equal && dup_top, fmt::format("two-stage == brute force up to n=2000, 8 clusters: {}; {} injected "
                                          "duplicates at ranks 0..{} with distance 0.0: {}",
                                          equal, dupes, dupes - 1, dup_top)};
}

Outcome spearman_checks() {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u;
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        std::vector<double> a(2 + gen() % 500), b(a.size());
        for (auto& x : a) x = u(gen);
        for (auto& x : b) x = u(gen);
        worst = std::max(worst, std::abs(spearman(a, b) - oracle::spearman_closed_form(a, b)));
    }
    std::vector<double> seq(100), rev(100);
    for (int i = 0; i < 100; ++i) seq[i] = i, rev[i] = 99 - i;
    const bool ident = spearman(seq, seq) == 1.0;
    const bool reversed = spearman(seq, rev) == -1.0;

    const auto x = oracle::gaussian_matrix(400, 4, 5);
    const auto model = fit_kmeans(x, 4, {.seed = 5});
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < 400; ++i) ids.push_back(fmt::format("img_{:05d}", i));
    const auto ranking = rank_near_duplicates(x, model.assignments, ids, 3000, 3000);
    bool curve_one = true;
    const auto curve = consistency_curve(ranking, ranking, 100, 100);
    for (const auto& p : curve) curve_one = curve_one && p.rho == 1.0;
    return {worst <= 1e-12 && ident && reversed && curve_one && !curve.empty(),
            fmt::format("max |rho - closed form| = {:.2g} (<=1e-12); identical=1: {}; reversed=-1: {}; identical "
                        "rankings curve constant 1.0 over {} points: {}",
                        worst, ident, reversed, curve.size(), curve_one)};
}

Outcome crosstab_conservation(const fs::path& data) {
    bool conserved = true, within = true;
    std::string detail;
    const auto manifest = read_manifest(data / "external.manifest.jsonl");
    const auto labels = read_labels(data / "labels.csv");
    for (const char* tag : {"model_a", "model_b", "model_c"}) {
        const auto train = read_embeddings(data / (std::string(tag) + ".emb"));
        const auto ext = read_embeddings(data / (std::string(tag) + ".external.emb"));
        const auto model = fit_kmeans(train, 4, {.seed = 2024});
        const auto t = crosstab(model, ext, manifest, labels);
        std::size_t sum = 0;
        for (const auto& row : t.counts)
            for (auto c : row) sum += c;
        conserved = conserved && sum == ext.rows() && t.total == ext.rows();
        const auto first = std::find(t.labels.begin(), t.labels.end(), "hateful") - t.labels.begin();
        for (std::size_t c = 0; c < t.k; ++c) {
            const auto m = t.cluster_totals[c];
            if (m == 0) continue;
            const boost::math::binomial_distribution<double> dist(static_cast<double>(m), 0.6);
            const double lo = boost::math::quantile(dist, 0.005), hi = boost::math::quantile(dist, 0.995);
            const double got = static_cast<double>(t.counts[c][first]);
            within = within && got >= lo && got <= hi;
            detail += fmt::format(" {}:{}={}/{}", tag, c, t.counts[c][first], m);
        }
    }
    return {conserved && within, fmt::format("counts sum to n: {}; all clusters within binomial 99% bounds of 60/40: "
                                             "{};{}",
                                             conserved, within, detail)};
}

Outcome end_to_end(const fs::path& source, const fs::path& scratch) {
    const auto data = source / "data" / "synthetic";
    RunConfig base;
    for (const char* tag : {"model_a", "model_b", "model_c"}) {
        base.embeddings[tag] = data / (std::string(tag) + ".emb");
        base.external_embeddings[tag] = data / (std::string(tag) + ".external.emb");
    }
    base.manifest = data / "manifest.jsonl";
    base.scores = data / "scores.csv";
    base.external_manifest = data / "external.manifest.jsonl";
    base.labels = data / "labels.csv";
    base.k = 4;
    base.k_max = 10;
    base.seed = 2024;
    base.spearman_k_start = 50;
    base.spearman_k_step = 50;

    const auto t0 = Clock::now();
    std::vector<std::vector<StageResult>> runs;
    for (const char* name : {"e2e_run1", "e2e_run2"}) {
        auto c = base;
        c.out = scratch / name;
        fs::remove_all(c.out);
        runs.push_back(cmd_report(c));
    }
    const double secs = seconds_since(t0);
    std::size_t compared = 0, differing = 0;
    for (const auto& stage : runs[0])
        for (const auto& p : stage.outputs) {
            const auto ext = p.extension();
            if (ext != ".csv" && ext != ".json") continue;
            ++compared;
            differing += read_text_file(scratch / "e2e_run1" / p) != read_text_file(scratch / "e2e_run2" / p);
        }
    return {differing == 0 && compared > 0 && secs < 60.0,
            fmt::format("{} CSV/JSON artifacts compared, {} differ; two full runs took {:.2f}s (<60s)", compared,
                        differing, secs)};
}

Outcome default_contracts() {
    const RunConfig c;
    const KMeansOptions k;
    std::vector<std::string> wrong;
    auto expect = [&](const char* name, std::size_t got, std::size_t want) {
        if (got != want) wrong.push_back(fmt::format("{}={} (want {})", name, got, want));
    };
    expect("k", c.k, 8);
    expect("max_iterations", c.max_iterations, 1000);
    expect("kmeans max_iterations", k.max_iterations, 1000);
    expect("min_images", c.min_images, 15);
    expect("per_cluster_k", c.per_cluster_k, 3000);
    expect("global_k", c.global_k, 3000);
    expect("k_min", c.k_min, 2);
    expect("k_max", c.k_max, 20);
    expect("spearman_k_start", c.spearman_k_start, 100);
    std::string detail = "k=8 max_iterations=1000 min_images=15 per_cluster_k=3000 global_k=3000 k-scan 2..20 "
                         "spearman_k_start=100";
    for (const auto& w : wrong) detail += " MISMATCH " + w;
    return {wrong.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: imagetypes_acceptance <source-dir> <scratch-dir>\n";
        return 2;
    }
    const fs::path source = argv[1], scratch = argv[2];
    fs::create_directories(scratch);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"kmeans-recovery", kmeans_recovery},
        {"lloyd-monotonicity", lloyd_monotonicity},
        {"metric-oracles", metric_oracles},
        {"jaccard-overlap", jaccard_overlap},
        {"ols", ols},
        {"neardup-equivalence", neardup_equivalence},
        {"spearman", spearman_checks},
        {"crosstab-conservation", [&] { return crosstab_conservation(source / "data" / "synthetic"); }},
        {"end-to-end-determinism", [&] { return end_to_end(source, scratch); }},
        {"default-contracts", default_contracts},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << fmt::format("{}/{} criteria passed", criteria.size() - failures, criteria.size()) << std::endl;
    return failures == 0 ? 0 : 1;
}
