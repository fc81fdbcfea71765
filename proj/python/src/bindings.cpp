#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "imagetypes/cluster.hpp"
#include "imagetypes/compare.hpp"
#include "imagetypes/corpus.hpp"
#include "imagetypes/crosstab.hpp"
#include "imagetypes/error.hpp"
#include "imagetypes/ideology.hpp"
#include "imagetypes/neardup.hpp"
#include "imagetypes/pipeline.hpp"

namespace py = pybind11;
using namespace imagetypes;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<ClusterId, py::array::c_style | py::array::forcecast>;

EmbeddingMatrix to_matrix(const FloatArray& a, std::string tag = {}) {
    if (a.ndim() != 2) throw py::value_error("expected a 2-D array of shape (n, d)");
    const auto n = static_cast<std::size_t>(a.shape(0));
    const auto d = static_cast<std::size_t>(a.shape(1));
    return EmbeddingMatrix(n, d, std::vector<float>(a.data(), a.data() + n * d), std::move(tag));
}

py::array_t<float> to_array(const EmbeddingMatrix& m) {
    py::array_t<float> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.dim())});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

std::vector<ClusterId> to_labels(const LabelArray& a) {
    if (a.ndim() != 1) throw py::value_error("expected a 1-D array of cluster ids");
    return {a.data(), a.data() + a.size()};
}

py::array_t<ClusterId> labels_array(const Assignments& a) {
    py::array_t<ClusterId> out(static_cast<py::ssize_t>(a.size()));
    std::copy(a.begin(), a.end(), out.mutable_data());
    return out;
}

py::dict model_dict(const ClusterModel& m) {
    py::dict d;
    d["k"] = m.k;
    d["centroids"] = to_array(m.centroids);
    d["assignments"] = labels_array(m.assignments);
    d["iterations_run"] = m.iterations_run;
    d["converged"] = m.converged;
    d["inertia"] = m.inertia;
    d["seed"] = m.seed;
    d["inertia_history"] = m.inertia_history;
    return d;
}

using PairTuple = std::tuple<std::string, std::string, double, ClusterId>;

std::vector<PairTuple> pair_tuples(const std::vector<RankedPair>& pairs) {
    std::vector<PairTuple> out;
    for (const auto& p : pairs) out.emplace_back(p.image_id_a, p.image_id_b, p.distance, p.source_cluster);
    return out;
}

PairRanking ranking_from(const std::vector<PairTuple>& tuples) {
    PairRanking r;
    for (const auto& [a, b, dist, c] : tuples) r.pairs.push_back({a, b, dist, c});
    return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Image-embedding corpus analysis: k-means, cluster comparison, ideology OLS, near-duplicate ranking.";
    m.attr("__version__") = std::string(library_version());

    static py::exception<Error> error_type(m, "ImagetypesError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object code = py::str(std::string(to_string(e.code())));
            PyErr_SetObject(error_type.ptr(), py::make_tuple(py::str(e.what()), code).ptr());
        }
    });

    m.def("read_embeddings", [](const std::filesystem::path& p) { return to_array(read_embeddings(p)); }, py::arg("path"));
    m.def("write_embeddings", [](const FloatArray& a, const std::filesystem::path& p) { write_embeddings(to_matrix(a), p); },
          py::arg("matrix"), py::arg("path"));

    m.def("sample_per_account",
          [](const std::vector<std::string>& account_ids, std::size_t per_account, std::uint64_t seed) {
              CorpusManifest manifest;
              for (std::size_t i = 0; i < account_ids.size(); ++i)
                  manifest.records.push_back({i, std::to_string(i), account_ids[i], std::nullopt});
              std::vector<std::size_t> kept;
              for (const auto& r : sample_per_account(manifest, per_account, seed).records) kept.push_back(r.row);
              return kept;
          },
          py::arg("account_ids"), py::arg("per_account"), py::arg("seed"),
          "Row indices kept when sampling at most per_account rows of each account.");

    m.def("kmeanspp_init", [](const FloatArray& x, std::size_t k, std::uint64_t seed) {
              return to_array(kmeanspp_init(to_matrix(x), k, seed));
          },
          py::arg("x"), py::arg("k"), py::arg("seed") = 0);
    m.def("fit_kmeans",
          [](const FloatArray& x, std::size_t k, std::size_t max_iterations, double tol, std::uint64_t seed, unsigned threads) {
              const auto matrix = to_matrix(x);
              py::gil_scoped_release release;
              auto model = fit_kmeans(matrix, k, {max_iterations, tol, seed, threads});
              py::gil_scoped_acquire acquire;
              return model_dict(model);
          },
          py::arg("x"), py::arg("k") = 8, py::arg("max_iterations") = 1000, py::arg("tol") = 1e-6, py::arg("seed") = 0,
          py::arg("threads") = 0);
    m.def("assign", [](const FloatArray& centroids, const FloatArray& x) {
              return labels_array(assign(to_matrix(centroids), to_matrix(x)));
          },
          py::arg("centroids"), py::arg("x"));
    m.def("inertia", [](const FloatArray& x, const FloatArray& centroids, const LabelArray& labels) {
              return inertia(to_matrix(x), to_matrix(centroids), to_labels(labels));
          },
          py::arg("x"), py::arg("centroids"), py::arg("assignments"));
    m.def("davies_bouldin", [](const FloatArray& x, const FloatArray& centroids, const LabelArray& labels) {
              return davies_bouldin(to_matrix(x), to_matrix(centroids), to_labels(labels));
          },
          py::arg("x"), py::arg("centroids"), py::arg("assignments"));
    m.def("silhouette",
          [](const FloatArray& x, const LabelArray& labels, std::optional<std::size_t> sample_cap, std::uint64_t seed) {
              return silhouette(to_matrix(x), to_labels(labels), sample_cap, seed);
          },
          py::arg("x"), py::arg("assignments"), py::arg("sample_cap") = kDefaultSilhouetteCap, py::arg("seed") = 0);
    m.def("scan_k",
          [](const FloatArray& x, std::size_t k_min, std::size_t k_max, std::size_t restarts, std::uint64_t seed) {
              ScanOptions o;
              o.k_min = k_min;
              o.k_max = k_max;
              o.restarts = restarts;
              o.seed = seed;
              py::list rows;
              for (const auto& e : scan_k(to_matrix(x), o).entries) {
                  py::dict d;
                  d["k"] = e.k;
                  d["inertia"] = e.inertia;
                  d["davies_bouldin"] = e.davies_bouldin;
                  d["silhouette"] = e.silhouette;
                  rows.append(d);
              }
              return rows;
          },
          py::arg("x"), py::arg("k_min") = 2, py::arg("k_max") = 20, py::arg("restarts") = 1, py::arg("seed") = 0);

    m.def("jaccard", &jaccard, py::arg("a"), py::arg("b"));
    m.def("overlap_matrix",
          [](const LabelArray& a, const LabelArray& b, const std::vector<std::string>& image_ids) {
              CorpusManifest manifest;
              for (std::size_t i = 0; i < image_ids.size(); ++i) manifest.records.push_back({i, image_ids[i], "", std::nullopt});
              const auto om = overlap_matrix(to_labels(a), to_labels(b), manifest);
              py::array_t<double> out({static_cast<py::ssize_t>(om.rows), static_cast<py::ssize_t>(om.cols)});
              std::copy(om.values.begin(), om.values.end(), out.mutable_data());
              return out;
          },
          py::arg("assign_a"), py::arg("assign_b"), py::arg("image_ids"));
    m.def("threshold_pairs",
          [](const DoubleArray& values, double tau) {
              if (values.ndim() != 2) throw py::value_error("expected a 2-D overlap matrix");
              OverlapMatrix om;
              om.rows = static_cast<std::size_t>(values.shape(0));
              om.cols = static_cast<std::size_t>(values.shape(1));
              om.values.assign(values.data(), values.data() + values.size());
              std::vector<std::tuple<std::size_t, std::size_t, double>> out;
              for (const auto& e : threshold_pairs(om, tau)) out.emplace_back(e.row, e.col, e.value);
              return out;
          },
          py::arg("matrix"), py::arg("tau"));

    m.def("ols_fit",
          [](const DoubleArray& x, const DoubleArray& y, std::vector<std::string> names) {
              if (x.ndim() != 2 || y.ndim() != 1) throw py::value_error("expected X of shape (n, p) and y of shape (n,)");
              DesignMatrix design;
              design.rows = static_cast<std::size_t>(x.shape(0));
              design.cols = static_cast<std::size_t>(x.shape(1));
              design.values.assign(x.data(), x.data() + x.size());
              design.column_names = std::move(names);
              const auto fit = ols_fit(design, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
              py::dict d;
              d["terms"] = fit.terms;
              d["coefficients"] = fit.coefficients;
              d["std_errors"] = fit.std_errors;
              d["t_stats"] = fit.t_stats;
              d["p_values"] = fit.p_values;
              d["identifiable"] = std::vector<bool>(fit.identifiable.begin(), fit.identifiable.end());
              d["fitted"] = fit.fitted;
              d["residuals"] = fit.residuals;
              d["r_squared"] = fit.r_squared;
              d["n_obs"] = fit.n_obs;
              d["design_rank"] = fit.design_rank;
              d["rank_deficient"] = fit.rank_deficient;
              d["warnings"] = fit.warnings;
              return d;
          },
          py::arg("x"), py::arg("y"), py::arg("names") = std::vector<std::string>{});
    m.def("significance_stars", &significance_stars, py::arg("p"));

    m.def("topk_pairs_within_cluster",
          [](const FloatArray& x, const LabelArray& labels, const std::vector<std::string>& ids, ClusterId cluster,
             std::size_t k) {
              return pair_tuples(topk_pairs_within_cluster(to_matrix(x), to_labels(labels), ids, cluster, k));
          },
          py::arg("x"), py::arg("assignments"), py::arg("image_ids"), py::arg("cluster_id"),
          py::arg("k") = kDefaultPerClusterK);
    m.def("rank_near_duplicates",
          [](const FloatArray& x, const LabelArray& labels, const std::vector<std::string>& ids, std::size_t per_cluster_k,
             std::size_t global_k) {
              return pair_tuples(rank_near_duplicates(to_matrix(x), to_labels(labels), ids, per_cluster_k, global_k).pairs);
          },
          py::arg("x"), py::arg("assignments"), py::arg("image_ids"), py::arg("per_cluster_k") = kDefaultPerClusterK,
          py::arg("global_k") = kDefaultGlobalK);
    m.def("spearman", [](const std::vector<double>& a, const std::vector<double>& b) { return spearman(a, b); },
          py::arg("a"), py::arg("b"));
    m.def("consistency_curve",
          [](const std::vector<PairTuple>& a, const std::vector<PairTuple>& b, std::size_t k_start, std::size_t k_step) {
              std::vector<std::tuple<std::size_t, std::optional<double>, std::size_t>> out;
              for (const auto& p : consistency_curve(ranking_from(a), ranking_from(b), k_start, k_step))
                  out.emplace_back(p.k, p.rho, p.overlap);
              return out;
          },
          py::arg("ranking_a"), py::arg("ranking_b"), py::arg("k_start") = 100, py::arg("k_step") = 100);

    m.def("crosstab",
          [](const FloatArray& centroids, const FloatArray& external, const std::vector<std::string>& ids,
             const std::map<std::string, std::string>& labels) {
              ClusterModel model;
              model.centroids = to_matrix(centroids);
              model.k = model.centroids.rows();
              const ImageLabels lab(labels.begin(), labels.end());
              const auto t = crosstab(model, to_matrix(external), ids, lab);
              py::dict d;
              d["labels"] = t.labels;
              d["counts"] = t.counts;
              d["percentages"] = t.percentages;
              d["cluster_totals"] = t.cluster_totals;
              d["label_totals"] = t.label_totals;
              d["total"] = t.total;
              d["max_deviation"] = t.max_deviation;
              return d;
          },
          py::arg("centroids"), py::arg("external"), py::arg("image_ids"), py::arg("labels"));
}
