#include "imagetypes/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "imagetypes/csv.hpp"
#include "imagetypes/error.hpp"
#include "imagetypes/random.hpp"

namespace imagetypes::synthetic {

Blobs make_blobs(const std::vector<std::vector<double>>& centers, std::size_t per_blob, double sigma,
                 std::uint64_t seed) {
    if (centers.empty()) throw Error(ErrorCode::InvalidArgument, "no blob centers");
    const std::size_t dim = centers.front().size();
    Rng rng(seed);
    std::vector<float> values;
    Blobs out;
    for (std::size_t i = 0; i < per_blob; ++i) {
        for (std::size_t c = 0; c < centers.size(); ++c) {
            for (std::size_t j = 0; j < dim; ++j)
                values.push_back(static_cast<float>(centers[c][j] + sigma * rng.normal()));
            out.labels.push_back(static_cast<ClusterId>(c));
        }
    }
    out.matrix = EmbeddingMatrix(per_blob * centers.size(), dim, std::move(values), "blobs");
    return out;
}

std::vector<std::vector<double>> spread_centers(std::size_t k, std::size_t dim, double min_separation,
                                                std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> centers;
    const double box = min_separation * static_cast<double>(k) * 2.0;
    std::size_t attempts = 0;
    while (centers.size() < k) {
        if (++attempts > 100000) throw Error(ErrorCode::InvalidArgument, "cannot place separated centers");
        std::vector<double> c(dim);
        for (auto& v : c) v = (rng.uniform() - 0.5) * box;
        bool ok = true;
        for (const auto& other : centers) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) d2 += (c[j] - other[j]) * (c[j] - other[j]);
            if (d2 < min_separation * min_separation) ok = false;
        }
        if (ok) centers.push_back(std::move(c));
    }
    return centers;
}

SyntheticCorpus make_corpus(const CorpusOptions& o) {
    constexpr std::size_t kLatentDim = 8;
    Rng rng(o.seed);
    SyntheticCorpus out;

    const auto type_centers = spread_centers(o.latent_types, kLatentDim, 6.0, derive_seed(o.seed, 1));

    // Per-account ideology and type preference: left-leaning accounts favor
    // low-numbered types, right-leaning ones high-numbered types.
    std::vector<std::string> account_ids;
    std::vector<double> account_scores;
    for (std::size_t a = 0; a < o.accounts; ++a) {
        account_ids.push_back(fmt::format("acct_{:03d}", a));
        const double score = o.accounts == 1 ? 0.0 : -0.8 + 1.6 * static_cast<double>(a) / static_cast<double>(o.accounts - 1);
        account_scores.push_back(score + 0.05 * rng.normal());
        out.scores[account_ids.back()] = account_scores.back();
    }

    // Latent content per image; duplicates reuse an earlier content vector.
    std::vector<std::vector<double>> contents;
    std::vector<std::size_t> image_content;
    const std::size_t n = o.accounts * o.images_per_account;
    for (std::size_t a = 0; a < o.accounts; ++a) {
        const double lean = (account_scores[a] + 1.0) / 2.0;  // 0..1
        for (std::size_t i = 0; i < o.images_per_account; ++i) {
            const std::size_t row = a * o.images_per_account + i;
            // The last image of each of the first `duplicates` accounts repeats its predecessor.
            const bool duplicate = i > 0 && i + 1 == o.images_per_account && a < o.duplicates;
            if (duplicate) {
                image_content.push_back(image_content.back());
            } else {
                // Type drawn around the account's lean.
                const double u = std::clamp(lean + 0.35 * rng.normal(), 0.0, 0.999999);
                const auto t = static_cast<std::size_t>(u * static_cast<double>(o.latent_types));
                std::vector<double> z(kLatentDim);
                for (std::size_t j = 0; j < kLatentDim; ++j) z[j] = type_centers[t][j] + 0.8 * rng.normal();
                contents.push_back(std::move(z));
                image_content.push_back(contents.size() - 1);
            }
            out.manifest.records.push_back(
                {row, fmt::format("img_{:05d}", row), account_ids[a], std::nullopt});
        }
    }

    // External labeled images: latent positions unrelated to the label.
    std::vector<std::vector<double>> external_contents;
    for (std::size_t i = 0; i < o.external_images; ++i) {
        const auto t = static_cast<std::size_t>(rng.below(o.latent_types));
        std::vector<double> z(kLatentDim);
        for (std::size_t j = 0; j < kLatentDim; ++j) z[j] = type_centers[t][j] + 0.8 * rng.normal();
        external_contents.push_back(std::move(z));
        const std::string id = fmt::format("ext_{:05d}", i);
        out.external_manifest.records.push_back({i, id, "external", std::nullopt});
        out.labels[id] = rng.uniform() < o.external_first_label_share ? "hateful" : "not_hateful";
    }

    for (std::size_t s = 0; s < o.sources.size(); ++s) {
        Rng view_rng(derive_seed(o.seed, 100 + s));
        std::vector<double> projection(o.dim * kLatentDim);
        for (auto& w : projection) w = view_rng.normal() / std::sqrt(static_cast<double>(kLatentDim));
        // Content-keyed noise so duplicates stay bitwise identical.
        auto embed = [&](const std::vector<double>& z, std::uint64_t noise_key) {
            Rng noise(derive_seed(o.seed ^ (0x5eedULL + s), noise_key));
            std::vector<float> row(o.dim);
            for (std::size_t r = 0; r < o.dim; ++r) {
                double acc = 0.0;
                for (std::size_t j = 0; j < kLatentDim; ++j) acc += projection[r * kLatentDim + j] * z[j];
                row[r] = static_cast<float>(std::max(0.0, acc + 0.3 * noise.normal()));
            }
            return row;
        };
        std::vector<float> values;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = embed(contents[image_content[i]], image_content[i]);
            values.insert(values.end(), row.begin(), row.end());
        }
        out.embeddings.emplace(o.sources[s], EmbeddingMatrix(n, o.dim, std::move(values), o.sources[s]));

        std::vector<float> ext;
        for (std::size_t i = 0; i < external_contents.size(); ++i) {
            const auto row = embed(external_contents[i], 1'000'000 + i);
            ext.insert(ext.end(), row.begin(), row.end());
        }
        out.external.emplace(o.sources[s],
                             EmbeddingMatrix(external_contents.size(), o.dim, std::move(ext), o.sources[s]));
    }
    return out;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string embeddings_line = "embeddings = [";
    std::string external_line = "external = [";
    bool first = true;
    for (const auto& [tag, m] : corpus.embeddings) {
        write_embeddings(m, dir / (tag + ".emb"));
        write_embeddings(corpus.external.at(tag), dir / (tag + ".external.emb"));
        embeddings_line += fmt::format("{}\"{}={}\"", first ? "" : ", ", tag, (dir / (tag + ".emb")).generic_string());
        external_line += fmt::format("{}\"{}={}\"", first ? "" : ", ", tag, (dir / (tag + ".external.emb")).generic_string());
        first = false;
    }
    write_manifest(corpus.manifest, dir / "manifest.jsonl");
    write_scores(corpus.scores, dir / "scores.csv");
    write_manifest(corpus.external_manifest, dir / "external.manifest.jsonl");
    write_labels(corpus.labels, dir / "labels.csv");

    // 8 accounts cannot support 9 regression terms, so the bundled config uses
    // k = 4 and a matching scan range.
    std::string config = "# Synthetic corpus: paths are relative to the repository root.\n";
    config += embeddings_line + "]\n";
    config += fmt::format("manifest = \"{}\"\n", (dir / "manifest.jsonl").generic_string());
    config += fmt::format("scores = \"{}\"\n", (dir / "scores.csv").generic_string());
    config += external_line + "]\n";
    config += fmt::format("external-manifest = \"{}\"\n", (dir / "external.manifest.jsonl").generic_string());
    config += fmt::format("labels = \"{}\"\n", (dir / "labels.csv").generic_string());
    config += "k = 4\nk-min = 2\nk-max = 10\nseed = 2024\nspearman-k-start = 50\nspearman-k-step = 50\n";
    write_text_file(dir / "config.ini", config);
}

}  // namespace imagetypes::synthetic
