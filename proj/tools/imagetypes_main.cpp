// imagetypes: batch pipeline over image-embedding corpora.
//
//   imagetypes report --config data/synthetic/config.ini --out out
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <cstdlib>
#include <iostream>
#include <functional>

#include <CLI11.hpp>

#include "imagetypes/error.hpp"
#include "imagetypes/pipeline.hpp"
#include "imagetypes/synthetic.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

using imagetypes::ConfigError;
using imagetypes::RunConfig;

std::map<std::string, std::filesystem::path> parse_tagged(const std::vector<std::string>& items, std::string_view flag) {
    std::map<std::string, std::filesystem::path> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw ConfigError(std::string(flag) + " expects TAG=PATH, got '" + item + "'");
        if (!out.emplace(item.substr(0, eq), item.substr(eq + 1)).second)
            throw ConfigError(std::string(flag) + " repeats tag '" + item.substr(0, eq) + "'");
    }
    return out;
}

void print_outputs(const imagetypes::StageResult& result, const RunConfig& config) {
    std::cout << result.stage << ":\n";
    for (const auto& p : result.outputs) std::cout << "  " << (config.out / p).generic_string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster image embeddings, compare clusterings, regress ideology on cluster usage, rank "
                 "near-duplicate pairs and cross-tabulate external labels."};
    app.set_version_flag("--version", std::string(imagetypes::library_version()));
    app.set_config("--config", "", "INI/TOML config file; command-line flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    const RunConfig defaults;
    RunConfig config;
    std::vector<std::string> embeddings, source_manifests, external;
    std::string manifest, scores, external_manifest, labels, out = defaults.out.string();
    std::size_t silhouette_cap = *defaults.silhouette_cap;
    std::size_t sample_per_account = 0;

    app.add_option("--embeddings", embeddings, "TAG=PATH of an EMB1 file, one per embedding model");
    app.add_option("--manifest", manifest, "JSON Lines manifest (row, image_id, account_id, label)");
    app.add_option("--source-manifest", source_manifests, "TAG=PATH manifest override for one source");
    app.add_option("--scores", scores, "CSV account_id,score");
    app.add_option("--external", external, "TAG=PATH EMB1 file of externally labeled images");
    app.add_option("--external-manifest", external_manifest, "manifest of the external images");
    app.add_option("--labels", labels, "CSV image_id,label for the external images");
    app.add_option("--k", config.k, "clusters per model")->capture_default_str();
    app.add_option("--k-min", config.k_min, "smallest k of the scan")->capture_default_str();
    app.add_option("--k-max", config.k_max, "largest k of the scan")->capture_default_str();
    app.add_option("--restarts", config.restarts, "k-means fits per k in the scan (best inertia kept)")
        ->capture_default_str();
    app.add_option("--max-iterations", config.max_iterations, "Lloyd iteration cap")->capture_default_str();
    app.add_option("--tol", config.tol, "stop when no centroid moves farther than this")->capture_default_str();
    app.add_option("--seed", config.seed, "seed for sampling and k-means++")->capture_default_str();
    app.add_option("--silhouette-cap", silhouette_cap, "points sampled for the silhouette (0 = all)")
        ->capture_default_str();
    app.add_option("--sample-per-account", sample_per_account, "keep at most this many images per account (0 = all)");
    app.add_option("--min-images", config.min_images, "minimum images for an account to enter the regression")
        ->capture_default_str();
    app.add_option("--per-cluster-k", config.per_cluster_k, "closest pairs kept per cluster")->capture_default_str();
    app.add_option("--global-k", config.global_k, "closest pairs kept overall")->capture_default_str();
    app.add_option("--spearman-k-start", config.spearman_k_start, "first k of the consistency curve")
        ->capture_default_str();
    app.add_option("--spearman-k-step", config.spearman_k_step, "k increment of the consistency curve")
        ->capture_default_str();
    app.add_option("--jaccard-tau", config.jaccard_tau, "report cluster pairs with Jaccard above this")
        ->capture_default_str();
    app.add_option("--threads", config.threads, "worker threads (0 = all cores)")->capture_default_str();
    app.add_option("--out", out, "output directory")->capture_default_str();

    std::function<void()> action;
    auto stage = [&](const char* name, const char* help, auto fn) {
        app.add_subcommand(name, help)->callback([&action, &config, fn] {
            action = [&config, fn] { print_outputs(fn(config), config); };
        });
    };
    stage("scan-k", "inertia, Davies-Bouldin and silhouette for k in [k-min, k-max]", imagetypes::cmd_scan_k);
    stage("cluster", "fit k-means per embedding model", imagetypes::cmd_cluster);
    stage("compare", "Jaccard overlap between the clusterings of each model pair", imagetypes::cmd_compare);
    stage("regress", "OLS of account score on cluster proportions", imagetypes::cmd_regress);
    stage("neardup", "closest within-cluster pairs and cross-model rank consistency", imagetypes::cmd_neardup);
    stage("crosstab", "label distribution of an external set over the learned clusters", imagetypes::cmd_crosstab);
    app.add_subcommand("report", "run every applicable stage and write report.json")->callback([&] {
        action = [&] {
            for (const auto& r : imagetypes::cmd_report(config)) print_outputs(r, config);
        };
    });

    auto* validate = app.add_subcommand("validate", "check corpus consistency for every configured source");
    validate->callback([&] {
        action = [&] {
            bool ok = true;
            for (const auto& [tag, path] : config.embeddings) {
                imagetypes::Corpus corpus;
                corpus.matrix = imagetypes::read_embeddings(path);
                corpus.manifest = imagetypes::read_manifest(
                    config.source_manifests.contains(tag) ? config.source_manifests.at(tag) : config.manifest);
                if (config.scores) corpus.scores = imagetypes::read_scores(*config.scores);
                const auto report = imagetypes::validate_corpus(corpus);
                std::cout << tag << ": " << (report.ok() ? "ok" : "INVALID") << "\n";
                for (const auto& v : report.violations) std::cout << "  violation " << v.kind << ": " << v.detail << "\n";
                for (const auto& w : report.warnings) std::cout << "  warning " << w.kind << ": " << w.detail << "\n";
                ok = ok && report.ok();
            }
            if (!ok) throw imagetypes::Error(imagetypes::ErrorCode::RowMismatch, "corpus validation failed");
        };
    });

    std::string synth_dir = "data/synthetic";
    std::uint64_t synth_seed = imagetypes::synthetic::CorpusOptions{}.seed;
    auto* synth = app.add_subcommand("synth", "write the synthetic corpus (8 accounts x 21 images, d=64)");
    synth->add_option("--dir", synth_dir, "destination directory")->capture_default_str();
    synth->add_option("--corpus-seed", synth_seed, "generator seed")->capture_default_str();
    synth->callback([&] {
        action = [&] {
            imagetypes::synthetic::CorpusOptions options;
            options.seed = synth_seed;
            imagetypes::synthetic::write_corpus(imagetypes::synthetic::make_corpus(options), synth_dir);
            std::cout << "wrote synthetic corpus to " << synth_dir << "\n";
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        config.embeddings = parse_tagged(embeddings, "--embeddings");
        config.source_manifests = parse_tagged(source_manifests, "--source-manifest");
        config.external_embeddings = parse_tagged(external, "--external");
        config.manifest = manifest;
        if (!scores.empty()) config.scores = scores;
        if (!external_manifest.empty()) config.external_manifest = external_manifest;
        if (!labels.empty()) config.labels = labels;
        config.silhouette_cap = silhouette_cap == 0 ? std::nullopt : std::optional<std::size_t>(silhouette_cap);
        if (sample_per_account > 0) config.sample_per_account = sample_per_account;
        config.out = out;
        if (action) action();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const imagetypes::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return EXIT_SUCCESS;
}
