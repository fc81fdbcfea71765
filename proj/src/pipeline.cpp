#include "imagetypes/pipeline.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "imagetypes/compare.hpp"
#include "imagetypes/crosstab.hpp"
#include "imagetypes/csv.hpp"
#include "imagetypes/error.hpp"
#include "imagetypes/ideology.hpp"
#include "imagetypes/neardup.hpp"
#include "imagetypes/svg.hpp"

#ifndef IMAGETYPES_VERSION
#define IMAGETYPES_VERSION "0.0.0"
#endif

namespace imagetypes {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string_view library_version() noexcept { return IMAGETYPES_VERSION; }

namespace {

void require_file(const fs::path& path, std::string_view what) {
    if (path.empty()) throw ConfigError(fmt::format("{} path is not set", what));
    if (!fs::is_regular_file(path)) throw ConfigError(fmt::format("{} not found: {}", what, path.string()));
}

void require_positive(std::size_t value, std::string_view name) {
    if (value == 0) throw ConfigError(fmt::format("{} must be positive", name));
}

ordered_json optional_path(const std::optional<fs::path>& p) {
    return p ? ordered_json(p->generic_string()) : ordered_json(nullptr);
}

ordered_json path_map(const std::map<std::string, fs::path>& m) {
    ordered_json j = ordered_json::object();
    for (const auto& [tag, p] : m) j[tag] = p.generic_string();
    return j;
}

ordered_json parameters_json(const RunConfig& c) {
    ordered_json j;
    j["embeddings"] = path_map(c.embeddings);
    j["manifest"] = c.manifest.generic_string();
    j["source_manifests"] = path_map(c.source_manifests);
    j["scores"] = optional_path(c.scores);
    j["external_embeddings"] = path_map(c.external_embeddings);
    j["external_manifest"] = optional_path(c.external_manifest);
    j["labels"] = optional_path(c.labels);
    j["k"] = c.k;
    j["k_min"] = c.k_min;
    j["k_max"] = c.k_max;
    j["restarts"] = c.restarts;
    j["max_iterations"] = c.max_iterations;
    j["tol"] = c.tol;
    j["seed"] = c.seed;
    j["silhouette_cap"] = c.silhouette_cap ? ordered_json(*c.silhouette_cap) : ordered_json(nullptr);
    j["sample_per_account"] = c.sample_per_account ? ordered_json(*c.sample_per_account) : ordered_json(nullptr);
    j["min_images"] = c.min_images;
    j["per_cluster_k"] = c.per_cluster_k;
    j["global_k"] = c.global_k;
    j["spearman_k_start"] = c.spearman_k_start;
    j["spearman_k_step"] = c.spearman_k_step;
    j["jaccard_tau"] = c.jaccard_tau;
    // threads and out are deliberately absent: they do not affect results.
    return j;
}

/// Collects a stage's outputs and writes its run manifest.
class Stage {
public:
    Stage(const RunConfig& config, std::string name) : config_(config), result_{std::move(name), {}} {}

    fs::path path(const fs::path& rel) const { return config_.out / rel; }

    void text(const fs::path& rel, std::string_view content) {
        write_text_file(path(rel), content);
        result_.outputs.push_back(rel);
    }
    void produced(const fs::path& rel) { result_.outputs.push_back(rel); }
    void input(const fs::path& p) { add_input(p.generic_string(), p); }
    /// An artifact of an earlier stage, recorded relative to the output directory.
    void upstream(const fs::path& rel) { add_input("$out/" + rel.generic_string(), path(rel)); }
    void note(std::string key, ordered_json value) { notes_[std::move(key)] = std::move(value); }

    StageResult finish() {
        ordered_json j;
        j["command"] = result_.stage;
        j["version"] = std::string(library_version());
        j["seed"] = config_.seed;
        j["parameters"] = parameters_json(config_);
        ordered_json ins = ordered_json::array();
        for (const auto& [name, p] : inputs_) {
            ordered_json e;
            e["path"] = name;
            e["bytes"] = fs::file_size(p);
            e["sha256"] = sha256_hex_file(p);
            ins.push_back(std::move(e));
        }
        j["inputs"] = std::move(ins);
        ordered_json outs = ordered_json::array();
        for (const auto& rel : result_.outputs) {
            ordered_json e;
            e["path"] = rel.generic_string();
            e["sha256"] = sha256_hex_file(path(rel));
            outs.push_back(std::move(e));
        }
        j["outputs"] = std::move(outs);
        if (!notes_.empty()) j["notes"] = notes_;
        const fs::path rel = fs::path(result_.stage) / "run_manifest.json";
        write_text_file(path(rel), j.dump(2) + "\n");
        result_.outputs.push_back(rel);
        return result_;
    }

private:
    void add_input(std::string name, fs::path actual) {
        for (const auto& [existing, p] : inputs_)
            if (existing == name) return;
        inputs_.emplace_back(std::move(name), std::move(actual));
    }

    const RunConfig& config_;
    StageResult result_;
    std::vector<std::pair<std::string, fs::path>> inputs_;
    ordered_json notes_ = ordered_json::object();
};

fs::path manifest_for(const RunConfig& config, const std::string& tag) {
    const auto it = config.source_manifests.find(tag);
    return it != config.source_manifests.end() ? it->second : config.manifest;
}

void record_source_inputs(Stage& stage, const RunConfig& config, const std::string& tag) {
    stage.input(config.embeddings.at(tag));
    stage.input(manifest_for(config, tag));
}

fs::path model_prefix(const std::string& tag) { return fs::path("cluster") / tag; }

ClusterModel load_upstream_model(const RunConfig& config, const std::string& tag, const Corpus& corpus) {
    const fs::path prefix = config.out / model_prefix(tag);
    if (!fs::is_regular_file(prefix.string() + ".model.json"))
        throw ConfigError(fmt::format("missing upstream artifact {}.model.json; run `imagetypes cluster` with the same "
                                      "config first",
                                      prefix.string()));
    auto model = load_model(prefix);
    if (model.assignments.size() != corpus.matrix.rows())
        throw Error(ErrorCode::RowMismatch,
                    fmt::format("cluster assignments for '{}' cover {} rows but the corpus has {}; re-run `imagetypes "
                                "cluster`",
                                tag, model.assignments.size(), corpus.matrix.rows()));
    return model;
}

std::vector<std::pair<std::string, std::string>> source_pairs(const RunConfig& config) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (auto a = config.embeddings.begin(); a != config.embeddings.end(); ++a)
        for (auto b = std::next(a); b != config.embeddings.end(); ++b) pairs.emplace_back(a->first, b->first);
    return pairs;
}

std::string cluster_sizes_csv(const ClusterModel& model, const Corpus& corpus) {
    std::vector<std::size_t> images(model.k, 0);
    std::vector<std::set<std::string_view>> accounts(model.k);
    for (const auto& rec : corpus.manifest.records) {
        const auto c = model.assignments[rec.row];
        ++images[c];
        accounts[c].insert(rec.account_id);
    }
    std::string text = "cluster,images,accounts\n";
    for (std::size_t c = 0; c < model.k; ++c) text += fmt::format("{},{},{}\n", c, images[c], accounts[c].size());
    return text;
}

}  // namespace

std::string sha256_hex_file(const fs::path& path) {
    const std::string data = read_text_file(path);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::Io, "sha256 failed for " + path.string());
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

void check_config(const RunConfig& c, bool need_scores, bool need_external) {
    if (c.embeddings.empty()) throw ConfigError("no embeddings configured (use --embeddings TAG=PATH)");
    for (const auto& [tag, path] : c.embeddings) {
        if (tag.empty() || tag.find_first_of("/\\") != std::string::npos)
            throw ConfigError(fmt::format("invalid source tag '{}'", tag));
        require_file(path, fmt::format("embeddings for '{}'", tag));
        if (!c.source_manifests.contains(tag)) require_file(c.manifest, "manifest");
    }
    for (const auto& [tag, path] : c.source_manifests) require_file(path, fmt::format("manifest for '{}'", tag));
    require_positive(c.k, "k");
    if (c.k_min < 2 || c.k_max < c.k_min) throw ConfigError("k-scan range must satisfy 2 <= k_min <= k_max");
    require_positive(c.restarts, "restarts");
    require_positive(c.max_iterations, "max_iterations");
    if (!(c.tol >= 0.0)) throw ConfigError("tol must be non-negative");
    require_positive(c.min_images, "min_images");
    require_positive(c.per_cluster_k, "per_cluster_k");
    require_positive(c.global_k, "global_k");
    require_positive(c.spearman_k_start, "spearman_k_start");
    require_positive(c.spearman_k_step, "spearman_k_step");
    if (!(c.jaccard_tau >= 0.0 && c.jaccard_tau <= 1.0)) throw ConfigError("jaccard_tau must lie in [0, 1]");
    if (c.silhouette_cap && *c.silhouette_cap < 2) throw ConfigError("silhouette_cap must be at least 2");
    if (c.sample_per_account) require_positive(*c.sample_per_account, "sample_per_account");
    if (need_scores) {
        if (!c.scores) throw ConfigError("no scores file configured (use --scores)");
        require_file(*c.scores, "scores");
    }
    if (need_external) {
        if (c.external_embeddings.empty()) throw ConfigError("no external embeddings configured (use --external TAG=PATH)");
        for (const auto& [tag, path] : c.external_embeddings) {
            if (!c.embeddings.contains(tag))
                throw ConfigError(fmt::format("external embeddings for unknown source '{}'", tag));
            require_file(path, fmt::format("external embeddings for '{}'", tag));
        }
        if (!c.external_manifest) throw ConfigError("no external manifest configured (use --external-manifest)");
        require_file(*c.external_manifest, "external manifest");
        if (!c.labels) throw ConfigError("no labels file configured (use --labels)");
        require_file(*c.labels, "labels");
    }
}

Corpus load_source(const RunConfig& config, const std::string& tag) {
    Corpus corpus;
    corpus.matrix = read_embeddings(config.embeddings.at(tag));
    corpus.matrix.set_source_tag(tag);
    corpus.manifest = read_manifest(manifest_for(config, tag));
    if (config.scores) corpus.scores = read_scores(*config.scores);

    const auto report = validate_corpus(corpus);
    if (!report.ok()) {
        std::string msg = fmt::format("corpus for '{}' is inconsistent:", tag);
        for (std::size_t i = 0; i < std::min<std::size_t>(report.violations.size(), 5); ++i)
            msg += fmt::format(" [{}: {}]", report.violations[i].kind, report.violations[i].detail);
        if (report.violations.size() > 5) msg += fmt::format(" (+{} more)", report.violations.size() - 5);
        throw Error(ErrorCode::RowMismatch, msg);
    }
    if (config.sample_per_account)
        corpus = subset_corpus(corpus, sample_per_account(corpus.manifest, *config.sample_per_account, config.seed));
    return corpus;
}

StageResult cmd_scan_k(const RunConfig& config) {
    check_config(config);
    Stage stage(config, "scan_k");
    ScanOptions options;
    options.k_min = config.k_min;
    options.k_max = config.k_max;
    options.restarts = config.restarts;
    options.seed = config.seed;
    options.max_iterations = config.max_iterations;
    options.tol = config.tol;
    options.silhouette_cap = config.silhouette_cap;
    options.threads = config.threads;
    for (const auto& [tag, path] : config.embeddings) {
        record_source_inputs(stage, config, tag);
        const auto corpus = load_source(config, tag);
        const auto report = scan_k(corpus.matrix, options);
        stage.text(fs::path("scan_k") / (tag + ".csv"), scan_report_csv(report));
        std::optional<std::size_t> highlight;
        if (config.k >= config.k_min && config.k <= config.k_max) highlight = config.k;
        stage.text(fs::path("scan_k") / (tag + ".svg"), svg::scan_panels(report, highlight));
    }
    stage.note("selection", "k is chosen by inspecting the curves; no automatic elbow detection is applied");
    return stage.finish();
}

StageResult cmd_cluster(const RunConfig& config) {
    check_config(config);
    Stage stage(config, "cluster");
    for (const auto& [tag, path] : config.embeddings) {
        record_source_inputs(stage, config, tag);
        const auto corpus = load_source(config, tag);
        const auto model =
            fit_kmeans(corpus.matrix, config.k, {config.max_iterations, config.tol, config.seed, config.threads});
        const auto prefix = model_prefix(tag);
        save_model(model, stage.path(prefix));
        for (const char* suffix : {".centroids.emb", ".assignments.csv", ".model.json"})
            stage.produced(prefix.string() + suffix);
        stage.text(prefix.string() + ".sizes.csv", cluster_sizes_csv(model, corpus));
    }
    return stage.finish();
}

StageResult cmd_compare(const RunConfig& config) {
    check_config(config);
    if (config.embeddings.size() < 2) throw ConfigError("compare needs at least two embedding sources");
    Stage stage(config, "compare");
    std::map<std::string, Labeling> labelings;
    for (const auto& [tag, path] : config.embeddings) {
        record_source_inputs(stage, config, tag);
        const auto corpus = load_source(config, tag);
        const auto model = load_upstream_model(config, tag, corpus);
        stage.upstream(model_prefix(tag).string() + ".assignments.csv");
        labelings.emplace(tag, make_labeling(model.assignments, corpus.manifest, tag, model.k));
    }
    for (const auto& [a, b] : source_pairs(config)) {
        const auto overlap = overlap_matrix(labelings.at(a), labelings.at(b));
        const std::string base = a + "__" + b;
        stage.text(fs::path("compare") / (base + ".csv"), overlap_csv(overlap));
        stage.text(fs::path("compare") / (base + ".svg"),
                   svg::overlap_heatmap(overlap, fmt::format("Jaccard similarity: {} vs {}", a, b)));
        std::string pairs = fmt::format("cluster_{},cluster_{},jaccard\n", a, b);
        for (const auto& e : threshold_pairs(overlap, config.jaccard_tau))
            pairs += fmt::format("{},{},{}\n", e.row, e.col, csv::format_number(e.value));
        stage.text(fs::path("compare") / (base + ".above_tau.csv"), pairs);
    }
    stage.note("jaccard", "set-level Jaccard over image ids of each cluster pair");
    return stage.finish();
}

StageResult cmd_regress(const RunConfig& config) {
    check_config(config, /*need_scores=*/true);
    Stage stage(config, "regress");
    stage.input(*config.scores);
    for (const auto& [tag, path] : config.embeddings) {
        record_source_inputs(stage, config, tag);
        const auto corpus = load_source(config, tag);
        const auto model = load_upstream_model(config, tag, corpus);
        stage.upstream(model_prefix(tag).string() + ".assignments.csv");
        const auto table = build_proportions(corpus, model.assignments, model.k, config.min_images);
        const auto fit = regress_ideology(table, *corpus.scores);
        stage.text(fs::path("regress") / (tag + ".csv"), ols_csv(fit));
        stage.text(fs::path("regress") / (tag + ".json"), ols_json(fit));
        stage.text(fs::path("regress") / (tag + ".proportions.csv"), proportions_csv(table));
        std::string excluded = "account_id,total_images,reason\n";
        for (const auto& e : table.excluded)
            excluded += csv::join({e.account_id, std::to_string(e.total_images), e.reason}) + "\n";
        stage.text(fs::path("regress") / (tag + ".excluded.csv"), excluded);
    }
    stage.note("solver", "minimum-norm least squares via SVD pseudo-inverse; the intercept plus all cluster proportions "
                         "is rank deficient by construction and flagged as such");
    return stage.finish();
}

StageResult cmd_neardup(const RunConfig& config) {
    check_config(config);
    Stage stage(config, "neardup");
    std::map<std::string, PairRanking> rankings;
    for (const auto& [tag, path] : config.embeddings) {
        record_source_inputs(stage, config, tag);
        const auto corpus = load_source(config, tag);
        const auto model = load_upstream_model(config, tag, corpus);
        stage.upstream(model_prefix(tag).string() + ".assignments.csv");
        const auto ids = corpus.manifest.image_ids_by_row();
        auto ranking = rank_near_duplicates(corpus.matrix, model.assignments, ids, config.per_cluster_k,
                                            config.global_k, config.threads);
        stage.text(fs::path("neardup") / (tag + ".pairs.csv"), ranking_csv(ranking));
        rankings.emplace(tag, std::move(ranking));
    }
    std::vector<std::pair<std::string, std::vector<CurvePoint>>> curves;
    for (const auto& [a, b] : source_pairs(config)) {
        auto curve = consistency_curve(rankings.at(a), rankings.at(b), config.spearman_k_start, config.spearman_k_step);
        stage.text(fs::path("neardup") / (a + "__" + b + ".curve.csv"), curve_csv(curve));
        curves.emplace_back(a + " & " + b, std::move(curve));
    }
    if (!curves.empty()) stage.text(fs::path("neardup") / "consistency.svg", svg::consistency_plot(curves));
    stage.note("tie_order", "equal distances are ordered by (image_id_a, image_id_b)");
    stage.note("alignment", "rho at k correlates list positions of the pairs present in both top-k lists");
    return stage.finish();
}

StageResult cmd_crosstab(const RunConfig& config) {
    check_config(config, false, /*need_external=*/true);
    Stage stage(config, "crosstab");
    stage.input(*config.external_manifest);
    stage.input(*config.labels);
    const auto manifest = read_manifest(*config.external_manifest);
    const auto labels = read_labels(*config.labels);
    for (const auto& [tag, path] : config.external_embeddings) {
        record_source_inputs(stage, config, tag);
        stage.input(path);
        const auto corpus = load_source(config, tag);
        const auto model = load_upstream_model(config, tag, corpus);
        stage.upstream(model_prefix(tag).string() + ".centroids.emb");
        const auto external = read_embeddings(path);
        const auto table = crosstab(model, external, manifest, labels, config.threads);
        stage.text(fs::path("crosstab") / (tag + ".csv"), crosstab_csv(table));
        stage.text(fs::path("crosstab") / (tag + ".json"), crosstab_json(table));
    }
    return stage.finish();
}

std::vector<StageResult> cmd_report(const RunConfig& config) {
    const bool has_external = !config.external_embeddings.empty();
    check_config(config, config.scores.has_value(), has_external);
    std::vector<StageResult> results;
    results.push_back(cmd_scan_k(config));
    results.push_back(cmd_cluster(config));
    if (config.embeddings.size() >= 2) results.push_back(cmd_compare(config));
    if (config.scores) results.push_back(cmd_regress(config));
    results.push_back(cmd_neardup(config));
    if (has_external) results.push_back(cmd_crosstab(config));

    ordered_json j;
    j["version"] = std::string(library_version());
    j["parameters"] = parameters_json(config);
    ordered_json stages = ordered_json::array();
    for (const auto& r : results) {
        ordered_json s;
        s["stage"] = r.stage;
        ordered_json outs = ordered_json::array();
        for (const auto& p : r.outputs) outs.push_back(p.generic_string());
        s["outputs"] = std::move(outs);
        stages.push_back(std::move(s));
    }
    j["stages"] = std::move(stages);
    write_text_file(config.out / "report.json", j.dump(2) + "\n");
    results.push_back({"report", {"report.json"}});
    return results;
}

}  // namespace imagetypes
