#include "imagetypes/crosstab.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "imagetypes/csv.hpp"
#include "imagetypes/error.hpp"

namespace imagetypes {

CrosstabTable crosstab(const ClusterModel& model, const EmbeddingMatrix& external,
                       std::span<const std::string> image_ids, const ImageLabels& labels, unsigned threads) {
    if (external.dim() != model.centroids.dim())
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("external embeddings have d={}, model has d={}", external.dim(), model.centroids.dim()));
    if (image_ids.size() != external.rows())
        throw Error(ErrorCode::RowMismatch,
                    fmt::format("{} image ids for {} external rows", image_ids.size(), external.rows()));

    std::vector<std::string_view> row_label(external.rows());
    std::map<std::string_view, std::size_t> label_index;
    for (std::size_t i = 0; i < image_ids.size(); ++i) {
        const auto it = labels.find(image_ids[i]);
        if (it == labels.end()) throw Error(ErrorCode::MissingLabel, fmt::format("no label for image '{}'", image_ids[i]));
        row_label[i] = it->second;
        label_index.emplace(it->second, 0);
    }

    CrosstabTable table;
    table.k = model.centroids.rows();
    for (auto& [label, idx] : label_index) {
        idx = table.labels.size();
        table.labels.emplace_back(label);
    }
    const std::size_t n_labels = table.labels.size();
    table.counts.assign(table.k, std::vector<std::size_t>(n_labels, 0));
    table.cluster_totals.assign(table.k, 0);
    table.label_totals.assign(n_labels, 0);

    const auto assignments = assign(model.centroids, external, threads);
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        const std::size_t l = label_index.at(row_label[i]);
        ++table.counts[assignments[i]][l];
        ++table.cluster_totals[assignments[i]];
        ++table.label_totals[l];
    }
    table.total = assignments.size();

    table.percentages.assign(table.k, std::vector<double>(n_labels, 0.0));
    table.max_deviation.assign(table.k, std::nullopt);
    for (std::size_t c = 0; c < table.k; ++c) {
        if (table.cluster_totals[c] == 0) continue;
        double worst = 0.0;
        for (std::size_t l = 0; l < n_labels; ++l) {
            const double share = static_cast<double>(table.counts[c][l]) / static_cast<double>(table.cluster_totals[c]);
            const double global = static_cast<double>(table.label_totals[l]) / static_cast<double>(table.total);
            table.percentages[c][l] = 100.0 * share;
            worst = std::max(worst, std::abs(share - global));
        }
        table.max_deviation[c] = worst;
    }
    return table;
}

CrosstabTable crosstab(const ClusterModel& model, const EmbeddingMatrix& external, const CorpusManifest& manifest,
                       const ImageLabels& labels, unsigned threads) {
    if (manifest.size() != external.rows())
        throw Error(ErrorCode::RowMismatch,
                    fmt::format("manifest has {} records, external matrix has {} rows", manifest.size(), external.rows()));
    const auto ids = manifest.image_ids_by_row();
    return crosstab(model, external, ids, labels, threads);
}

std::string crosstab_csv(const CrosstabTable& table) {
    std::vector<std::string> header{"cluster"};
    header.insert(header.end(), table.labels.begin(), table.labels.end());
    header.push_back("total");
    std::string text = csv::join(header) + "\n";
    auto cell = [](std::size_t count, double pct) { return fmt::format("{}: {:.1f}%", count, pct); };
    for (std::size_t c = 0; c < table.k; ++c) {
        std::vector<std::string> fields{std::to_string(c)};
        for (std::size_t l = 0; l < table.labels.size(); ++l) fields.push_back(cell(table.counts[c][l], table.percentages[c][l]));
        fields.push_back(std::to_string(table.cluster_totals[c]));
        text += csv::join(fields) + "\n";
    }
    std::vector<std::string> all{"all"};
    for (std::size_t l = 0; l < table.labels.size(); ++l)
        all.push_back(cell(table.label_totals[l], table.total ? 100.0 * static_cast<double>(table.label_totals[l]) /
                                                                      static_cast<double>(table.total)
                                                                : 0.0));
    all.push_back(std::to_string(table.total));
    text += csv::join(all) + "\n";
    return text;
}

std::string crosstab_json(const CrosstabTable& table) {
    nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < table.k; ++c) {
        nlohmann::ordered_json row;
        row["cluster"] = c;
        row["total"] = table.cluster_totals[c];
        nlohmann::ordered_json counts, pcts;
        for (std::size_t l = 0; l < table.labels.size(); ++l) {
            counts[table.labels[l]] = table.counts[c][l];
            pcts[table.labels[l]] = table.percentages[c][l];
        }
        row["counts"] = std::move(counts);
        row["percentages"] = std::move(pcts);
        row["max_deviation_from_global"] =
            table.max_deviation[c] ? nlohmann::ordered_json(*table.max_deviation[c]) : nlohmann::ordered_json(nullptr);
        clusters.push_back(std::move(row));
    }
    nlohmann::ordered_json totals;
    for (std::size_t l = 0; l < table.labels.size(); ++l) totals[table.labels[l]] = table.label_totals[l];
    nlohmann::ordered_json j;
    j["k"] = table.k;
    j["labels"] = table.labels;
    j["total"] = table.total;
    j["label_totals"] = std::move(totals);
    j["clusters"] = std::move(clusters);
    return j.dump(2) + "\n";
}

}  // namespace imagetypes
