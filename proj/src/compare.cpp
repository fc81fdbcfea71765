#include "imagetypes/compare.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "imagetypes/csv.hpp"
#include "imagetypes/error.hpp"

namespace imagetypes {

Labeling make_labeling(std::span<const ClusterId> assignments, const CorpusManifest& manifest,
                       std::string source_tag, std::size_t k) {
    if (assignments.size() != manifest.size())
        throw Error(ErrorCode::RowMismatch,
                    fmt::format("{} assignments for a manifest of {} rows", assignments.size(), manifest.size()));
    Labeling out;
    out.source_tag = std::move(source_tag);
    out.image_ids = manifest.image_ids_by_row();
    out.clusters.assign(assignments.begin(), assignments.end());
    std::size_t max_k = 0;
    for (auto a : assignments) max_k = std::max<std::size_t>(max_k, std::size_t{a} + 1);
    if (k != 0 && k < max_k)
        throw Error(ErrorCode::InvalidArgument, fmt::format("cluster id {} out of range for k={}", max_k - 1, k));
    out.k = k == 0 ? max_k : k;
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t common = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

OverlapMatrix overlap_matrix(const Labeling& a, const Labeling& b) {
    if (a.image_ids.size() != a.clusters.size() || b.image_ids.size() != b.clusters.size())
        throw Error(ErrorCode::InvalidArgument, "labeling ids and clusters differ in length");

    std::map<std::string_view, ClusterId> b_lookup;
    for (std::size_t i = 0; i < b.image_ids.size(); ++i)
        if (!b_lookup.emplace(b.image_ids[i], b.clusters[i]).second)
            throw Error(ErrorCode::RowMismatch, fmt::format("duplicate image_id '{}'", b.image_ids[i]));
    if (a.image_ids.size() != b.image_ids.size())
        throw Error(ErrorCode::RowMismatch,
                    fmt::format("clusterings cover {} and {} images", a.image_ids.size(), b.image_ids.size()));
    if (std::set<std::string_view>(a.image_ids.begin(), a.image_ids.end()).size() != a.image_ids.size())
        throw Error(ErrorCode::RowMismatch, "duplicate image_id in the first clustering");

    OverlapMatrix m;
    m.rows = a.k;
    m.cols = b.k;
    m.intersections.assign(m.rows * m.cols, 0);
    m.row_sizes.assign(m.rows, 0);
    m.col_sizes.assign(m.cols, 0);
    for (std::size_t i = 0; i < a.image_ids.size(); ++i) {
        const auto it = b_lookup.find(a.image_ids[i]);
        if (it == b_lookup.end())
            throw Error(ErrorCode::RowMismatch, fmt::format("image '{}' missing from the second clustering", a.image_ids[i]));
        const ClusterId ca = a.clusters[i];
        const ClusterId cb = it->second;
        if (ca >= m.rows || cb >= m.cols) throw Error(ErrorCode::InvalidArgument, "cluster id exceeds k");
        ++m.intersections[ca * m.cols + cb];
    }
    for (auto [id, cb] : b_lookup) ++m.col_sizes[cb];
    for (auto ca : a.clusters) ++m.row_sizes[ca];

    m.values.resize(m.rows * m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            const std::size_t inter = m.intersection(i, j);
            const std::size_t uni = m.row_sizes[i] + m.col_sizes[j] - inter;
            m.values[i * m.cols + j] = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
        }
    }
    const auto tag_a = a.source_tag.empty() ? std::string("A") : a.source_tag;
    const auto tag_b = b.source_tag.empty() ? std::string("B") : b.source_tag;
    for (std::size_t i = 0; i < m.rows; ++i) m.row_labels.push_back(fmt::format("{}:{}", tag_a, i));
    for (std::size_t j = 0; j < m.cols; ++j) m.col_labels.push_back(fmt::format("{}:{}", tag_b, j));
    return m;
}

OverlapMatrix overlap_matrix(std::span<const ClusterId> assign_a, std::span<const ClusterId> assign_b,
                             const CorpusManifest& manifest) {
    return overlap_matrix(make_labeling(assign_a, manifest), make_labeling(assign_b, manifest));
}

std::vector<OverlapEntry> threshold_pairs(const OverlapMatrix& matrix, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
    std::vector<OverlapEntry> out;
    for (std::size_t i = 0; i < matrix.rows; ++i)
        for (std::size_t j = 0; j < matrix.cols; ++j)
            if (matrix.at(i, j) > tau) out.push_back({i, j, matrix.at(i, j)});
    std::stable_sort(out.begin(), out.end(), [](const OverlapEntry& x, const OverlapEntry& y) { return x.value > y.value; });
    return out;
}

std::string overlap_csv(const OverlapMatrix& matrix) {
    std::vector<std::string> header{"cluster"};
    header.insert(header.end(), matrix.col_labels.begin(), matrix.col_labels.end());
    std::string text = csv::join(header) + "\n";
    for (std::size_t i = 0; i < matrix.rows; ++i) {
        std::vector<std::string> fields{matrix.row_labels[i]};
        for (std::size_t j = 0; j < matrix.cols; ++j) fields.push_back(csv::format_number(matrix.at(i, j)));
        text += csv::join(fields) + "\n";
    }
    return text;
}

}  // namespace imagetypes
