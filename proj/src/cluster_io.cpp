#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "imagetypes/cluster.hpp"
#include "imagetypes/csv.hpp"
#include "imagetypes/error.hpp"

namespace imagetypes {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& prefix, std::string_view suffix) {
    return prefix.string() + std::string(suffix);
}

}  // namespace

void write_assignments(std::span<const ClusterId> assignments, const std::filesystem::path& destination) {
    std::string text = "row,cluster\n";
    for (std::size_t i = 0; i < assignments.size(); ++i) text += fmt::format("{},{}\n", i, assignments[i]);
    write_text_file(destination, text);
}

Assignments read_assignments(const std::filesystem::path& source) {
    const auto table = csv::read(source);
    const auto row_col = table.column("row");
    const auto cluster_col = table.column("cluster");
    Assignments out(table.rows.size());
    std::vector<bool> seen(table.rows.size(), false);
    for (const auto& r : table.rows) {
        const auto row = csv::parse_integer(r[row_col]);
        const auto cluster = csv::parse_integer(r[cluster_col]);
        if (row < 0 || static_cast<std::size_t>(row) >= out.size() || seen[static_cast<std::size_t>(row)])
            throw Error(ErrorCode::Parse, fmt::format("{}: rows must be 0..{} each once", source.string(), out.size() - 1));
        if (cluster < 0) throw Error(ErrorCode::Parse, fmt::format("{}: negative cluster id", source.string()));
        seen[static_cast<std::size_t>(row)] = true;
        out[static_cast<std::size_t>(row)] = static_cast<ClusterId>(cluster);
    }
    return out;
}

void save_model(const ClusterModel& model, const std::filesystem::path& prefix) {
    write_embeddings(model.centroids, with_suffix(prefix, ".centroids.emb"));
    write_assignments(model.assignments, with_suffix(prefix, ".assignments.csv"));
    nlohmann::ordered_json j;
    j["k"] = model.k;
    j["seed"] = model.seed;
    j["iterations_run"] = model.iterations_run;
    j["converged"] = model.converged;
    j["inertia"] = model.inertia;
    j["source_tag"] = model.source_tag;
    j["n"] = model.assignments.size();
    j["d"] = model.centroids.dim();
    j["inertia_history"] = model.inertia_history;
    write_text_file(with_suffix(prefix, ".model.json"), j.dump(2) + "\n");
}

ClusterModel load_model(const std::filesystem::path& prefix) {
    ClusterModel model;
    const auto sidecar = with_suffix(prefix, ".model.json");
    try {
        const auto j = nlohmann::json::parse(read_text_file(sidecar));
        model.k = j.at("k").get<std::size_t>();
        model.seed = j.at("seed").get<std::uint64_t>();
        model.iterations_run = j.at("iterations_run").get<std::size_t>();
        model.converged = j.at("converged").get<bool>();
        model.inertia = j.at("inertia").get<double>();
        model.source_tag = j.at("source_tag").get<std::string>();
        if (j.contains("inertia_history")) model.inertia_history = j["inertia_history"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, sidecar.string() + ": " + e.what());
    }
    model.centroids = read_embeddings(with_suffix(prefix, ".centroids.emb"));
    model.centroids.set_source_tag(model.source_tag);
    if (model.centroids.rows() != model.k)
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{}: sidecar says k={}, centroid file has {} rows", prefix.string(), model.k,
                                model.centroids.rows()));
    model.assignments = read_assignments(with_suffix(prefix, ".assignments.csv"));
    for (auto a : model.assignments)
        if (a >= model.k) throw Error(ErrorCode::Parse, fmt::format("{}: cluster id {} >= k", prefix.string(), a));
    return model;
}

std::string scan_report_csv(const KScanReport& report) {
    std::string text = "k,inertia,davies_bouldin,silhouette,seed,iterations_run,converged\n";
    for (const auto& e : report.entries)
        text += fmt::format("{},{},{},{},{},{},{}\n", e.k, csv::format_number(e.inertia),
                            csv::format_number(e.davies_bouldin), csv::format_number(e.silhouette), e.seed,
                            e.iterations_run, e.converged ? "true" : "false");
    return text;
}

}  // namespace imagetypes
