#include "imagetypes/neardup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>

#include <fmt/format.h>

#include "imagetypes/csv.hpp"
#include "imagetypes/error.hpp"
#include "imagetypes/parallel.hpp"

namespace imagetypes {

namespace {

// Pair of matrix rows with ids[first] < ids[second].
struct Candidate {
    double distance;
    std::uint32_t first;
    std::uint32_t second;
};

struct CandidateLess {
    std::span<const std::string> ids;
    bool operator()(const Candidate& x, const Candidate& y) const noexcept {
        if (x.distance != y.distance) return x.distance < y.distance;
        if (ids[x.first] != ids[y.first]) return ids[x.first] < ids[y.first];
        return ids[x.second] < ids[y.second];
    }
};

}  // namespace

bool pair_before(const RankedPair& x, const RankedPair& y) noexcept {
    if (x.distance != y.distance) return x.distance < y.distance;
    if (x.image_id_a != y.image_id_a) return x.image_id_a < y.image_id_a;
    return x.image_id_b < y.image_id_b;
}

std::vector<RankedPair> topk_pairs_within_cluster(const EmbeddingMatrix& matrix, std::span<const ClusterId> assignments,
                                                  std::span<const std::string> image_ids, ClusterId cluster_id,
                                                  std::size_t k, unsigned threads) {
    if (assignments.size() != matrix.rows() || image_ids.size() != matrix.rows())
        throw Error(ErrorCode::RowMismatch, "assignments, image ids and matrix rows differ in length");

    std::vector<std::uint32_t> members;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == cluster_id) members.push_back(static_cast<std::uint32_t>(i));
    if (members.size() < 2 || k == 0) return {};

    const CandidateLess less{image_ids};
    const std::size_t m = members.size();
    if (threads == 0) threads = default_threads();
    // Rows are dealt to workers round-robin so the triangular workload evens out.
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, m - 1));
    std::vector<std::vector<Candidate>> partial(workers);

    parallel_for(workers, static_cast<unsigned>(workers), [&](std::size_t begin, std::size_t end) {
        for (std::size_t w = begin; w < end; ++w) {
            std::priority_queue<Candidate, std::vector<Candidate>, CandidateLess> heap(less);  // max-heap: worst on top
            for (std::size_t p = w; p + 1 < m; p += workers) {
                const auto row_p = matrix.row(members[p]);
                for (std::size_t q = p + 1; q < m; ++q) {
                    std::uint32_t a = members[p];
                    std::uint32_t b = members[q];
                    if (image_ids[b] < image_ids[a]) std::swap(a, b);
                    const Candidate c{euclidean_distance(row_p, matrix.row(members[q])), a, b};
                    if (heap.size() < k) {
                        heap.push(c);
                    } else if (less(c, heap.top())) {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            auto& out = partial[w];
            out.reserve(heap.size());
            while (!heap.empty()) {
                out.push_back(heap.top());
                heap.pop();
            }
        }
    });

    std::vector<Candidate> all;
    for (auto& part : partial) all.insert(all.end(), part.begin(), part.end());
    const std::size_t keep = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), less);
    all.resize(keep);

    std::vector<RankedPair> out;
    out.reserve(keep);
    for (const auto& c : all) out.push_back({image_ids[c.first], image_ids[c.second], c.distance, cluster_id});
    return out;
}

PairRanking merge_topk(std::span<const std::vector<RankedPair>> per_cluster, std::size_t global_k) {
    PairRanking ranking;
    ranking.global_k = global_k;
    for (const auto& list : per_cluster) {
        ranking.per_cluster_k = std::max(ranking.per_cluster_k, list.size());
        ranking.pairs.insert(ranking.pairs.end(), list.begin(), list.end());
    }
    const std::size_t keep = std::min(global_k, ranking.pairs.size());
    std::partial_sort(ranking.pairs.begin(), ranking.pairs.begin() + static_cast<std::ptrdiff_t>(keep),
                      ranking.pairs.end(), pair_before);
    ranking.pairs.resize(keep);
    return ranking;
}

PairRanking rank_near_duplicates(const EmbeddingMatrix& matrix, std::span<const ClusterId> assignments,
                                 std::span<const std::string> image_ids, std::size_t per_cluster_k,
                                 std::size_t global_k, unsigned threads) {
    ClusterId k = 0;
    for (auto a : assignments) k = std::max<ClusterId>(k, a + 1);
    std::vector<std::vector<RankedPair>> lists;
    for (ClusterId c = 0; c < k; ++c)
        lists.push_back(topk_pairs_within_cluster(matrix, assignments, image_ids, c, per_cluster_k, threads));
    auto ranking = merge_topk(lists, global_k);
    ranking.per_cluster_k = per_cluster_k;
    ranking.source_tag = matrix.source_tag();
    return ranking;
}

std::vector<double> fractional_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "spearman inputs differ in length");
    if (a.size() < 2) throw Error(ErrorCode::InvalidArgument, "spearman needs at least two observations");
    const auto ra = fractional_ranks(a);
    const auto rb = fractional_ranks(b);
    const double m = static_cast<double>(a.size());
    const double mean = (m + 1.0) / 2.0;  // mean of 1..m, unchanged by averaging ties
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw Error(ErrorCode::DegenerateRanks, "one side of the ranking is constant");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<CurvePoint> consistency_curve(const PairRanking& a, const PairRanking& b, std::size_t k_start,
                                          std::size_t k_step) {
    if (k_start == 0 || k_step == 0) throw Error(ErrorCode::InvalidArgument, "k_start and k_step must be positive");
    using Key = std::pair<std::string_view, std::string_view>;
    std::map<Key, std::size_t> b_position;
    for (std::size_t i = 0; i < b.pairs.size(); ++i) b_position.emplace(Key{b.pairs[i].image_id_a, b.pairs[i].image_id_b}, i);

    std::vector<CurvePoint> curve;
    const std::size_t longest = std::max(a.pairs.size(), b.pairs.size());
    for (std::size_t k = k_start; k <= longest; k += k_step) {
        std::vector<double> pos_a, pos_b;
        const std::size_t top_a = std::min(k, a.pairs.size());
        for (std::size_t i = 0; i < top_a; ++i) {
            const auto it = b_position.find(Key{a.pairs[i].image_id_a, a.pairs[i].image_id_b});
            if (it != b_position.end() && it->second < k) {
                pos_a.push_back(static_cast<double>(i));
                pos_b.push_back(static_cast<double>(it->second));
            }
        }
        CurvePoint point{k, std::nullopt, pos_a.size()};
        if (pos_a.size() >= 2) point.rho = spearman(pos_a, pos_b);
        curve.push_back(point);
    }
    return curve;
}

std::string ranking_csv(const PairRanking& ranking) {
    std::string text = "rank,image_id_a,image_id_b,distance,source_cluster\n";
    for (std::size_t i = 0; i < ranking.pairs.size(); ++i) {
        const auto& p = ranking.pairs[i];
        text += csv::join({std::to_string(i), p.image_id_a, p.image_id_b, csv::format_number(p.distance),
                           std::to_string(p.source_cluster)}) +
                "\n";
    }
    return text;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
    std::string text = "k,rho,overlap\n";
    for (const auto& p : curve)
        text += fmt::format("{},{},{}\n", p.k, p.rho ? csv::format_number(*p.rho) : std::string("NA"), p.overlap);
    return text;
}

}  // namespace imagetypes
