#include "imagetypes/ideology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "imagetypes/csv.hpp"
#include "imagetypes/error.hpp"

namespace imagetypes {

ProportionTable build_proportions(const Corpus& corpus, std::span<const ClusterId> assignments, std::size_t k,
                                  std::size_t min_images) {
    if (assignments.size() != corpus.matrix.rows())
        throw Error(ErrorCode::RowMismatch, fmt::format("{} assignments for {} corpus rows", assignments.size(),
                                                        corpus.matrix.rows()));
    std::size_t max_k = 0;
    for (auto a : assignments) max_k = std::max<std::size_t>(max_k, std::size_t{a} + 1);
    if (k == 0) k = max_k;
    if (k < max_k) throw Error(ErrorCode::InvalidArgument, fmt::format("cluster id {} out of range for k={}", max_k - 1, k));

    std::map<std::string, std::vector<std::size_t>> counts;
    for (const auto& rec : corpus.manifest.records) {
        if (rec.row >= assignments.size())
            throw Error(ErrorCode::RowMismatch, fmt::format("manifest row {} out of range", rec.row));
        auto& c = counts[rec.account_id];
        c.resize(k, 0);
        ++c[assignments[rec.row]];
    }

    ProportionTable table;
    table.k = k;
    table.min_images = min_images;
    for (const auto& [account, per_cluster] : counts) {
        std::size_t total = 0;
        for (auto c : per_cluster) total += c;
        if (total < min_images) {
            table.excluded.push_back({account, total, fmt::format("fewer than {} images", min_images)});
            continue;
        }
        if (!corpus.scores || !corpus.scores->contains(account)) {
            table.excluded.push_back({account, total, "no ideology score"});
            continue;
        }
        AccountProportions row{account, total, std::vector<double>(k)};
        for (std::size_t c = 0; c < k; ++c)
            row.proportions[c] = static_cast<double>(per_cluster[c]) / static_cast<double>(total);
        table.accounts.push_back(std::move(row));
    }
    return table;
}

std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

OlsFit ols_fit(const DesignMatrix& x, std::span<const double> y) {
    const std::size_t n = x.rows;
    const std::size_t p = x.cols;
    if (n == 0 || p == 0) throw Error(ErrorCode::EmptyDesign, fmt::format("design matrix is {}x{}", n, p));
    if (x.values.size() != n * p) throw Error(ErrorCode::DimensionMismatch, "design values do not match its shape");
    if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, fmt::format("{} responses for {} rows", y.size(), n));
    for (double v : x.values)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite design entry");
    for (double v : y)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite response");

    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::MatrixXd X = Eigen::Map<const RowMajor>(x.values.data(), static_cast<Eigen::Index>(n),
                                                         static_cast<Eigen::Index>(p));
    const Eigen::VectorXd Y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? sv(0) * static_cast<double>(std::max(n, p)) * std::numeric_limits<double>::epsilon() : 0.0;
    Eigen::Index rank = 0;
    Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) {
            inv_sv(i) = 1.0 / sv(i);
            ++rank;
        }
    }
    const Eigen::MatrixXd& U = svd.matrixU();
    const Eigen::MatrixXd& V = svd.matrixV();

    const Eigen::VectorXd beta = V * inv_sv.asDiagonal() * (U.transpose() * Y);
    const Eigen::VectorXd fitted = X * beta;
    const Eigen::VectorXd resid = Y - fitted;

    OlsFit fit;
    fit.n_obs = n;
    fit.design_rank = static_cast<std::size_t>(rank);
    fit.rank_deficient = fit.design_rank < p;
    if (fit.design_rank >= n)
        throw Error(ErrorCode::InsufficientDof,
                    fmt::format("{} observations leave no residual degrees of freedom at rank {}", n, fit.design_rank));
    fit.df_resid = n - fit.design_rank;

    const double rss = resid.squaredNorm();
    const double mean_y = Y.mean();
    const double tss = (Y.array() - mean_y).square().sum();
    if (tss == 0.0) {
        fit.r_squared = 0.0;
        fit.warnings.push_back("DegenerateResponse: response is constant, R^2 is undefined and reported as 0");
    } else {
        fit.r_squared = std::clamp(1.0 - rss / tss, 0.0, 1.0);
    }
    if (fit.rank_deficient)
        fit.warnings.push_back(fmt::format("design rank {} < {} columns; coefficients are the minimum-norm solution",
                                           fit.design_rank, p));

    fit.sigma2 = rss / static_cast<double>(fit.df_resid);
    // (X'X)^+ = V diag(1/s^2) V'
    const Eigen::MatrixXd xtx_pinv = V * inv_sv.array().square().matrix().asDiagonal() * V.transpose();
    // Projection onto the row space of X.
    Eigen::MatrixXd row_space = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (inv_sv(i) != 0.0) row_space += V.col(i) * V.col(i).transpose();

    boost::math::students_t dist(static_cast<double>(fit.df_resid));
    for (std::size_t j = 0; j < p; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double b = beta(jj);
        const double se = std::sqrt(std::max(0.0, fit.sigma2 * xtx_pinv(jj, jj)));
        double t;
        double pv;
        if (se > 0.0) {
            t = b / se;
            pv = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
        } else if (b == 0.0) {
            t = 0.0;
            pv = 1.0;
        } else {
            t = std::copysign(std::numeric_limits<double>::infinity(), b);
            pv = 0.0;
        }
        fit.terms.push_back(j < x.column_names.size() ? x.column_names[j] : fmt::format("x{}", j));
        fit.coefficients.push_back(b);
        fit.std_errors.push_back(se);
        fit.t_stats.push_back(t);
        fit.p_values.push_back(pv);
        fit.identifiable.push_back(std::abs(1.0 - row_space(jj, jj)) < 1e-8);
    }
    fit.fitted.assign(fitted.data(), fitted.data() + fitted.size());
    fit.residuals.assign(resid.data(), resid.data() + resid.size());
    return fit;
}

OlsFit regress_ideology(const ProportionTable& table, const AccountScores& scores) {
    if (table.accounts.empty())
        throw Error(ErrorCode::EmptyDesign,
                    fmt::format("empty design: no account has a score and at least {} images", table.min_images));
    DesignMatrix x;
    x.rows = table.accounts.size();
    x.cols = table.k + 1;
    x.column_names.push_back("const");
    for (std::size_t c = 0; c < table.k; ++c) x.column_names.push_back(fmt::format("cluster_{}", c));
    std::vector<double> y;
    for (const auto& acc : table.accounts) {
        const auto it = scores.find(acc.account_id);
        if (it == scores.end()) throw Error(ErrorCode::MissingScore, fmt::format("no score for '{}'", acc.account_id));
        x.values.push_back(1.0);
        x.values.insert(x.values.end(), acc.proportions.begin(), acc.proportions.end());
        y.push_back(it->second);
    }
    return ols_fit(x, y);
}

std::string ols_csv(const OlsFit& fit) {
    std::string text = "term,coefficient,std_error,t,p,stars\n";
    for (std::size_t j = 0; j < fit.terms.size(); ++j)
        text += csv::join({fit.terms[j], csv::format_number(fit.coefficients[j]), csv::format_number(fit.std_errors[j]),
                           csv::format_number(fit.t_stats[j]), csv::format_number(fit.p_values[j]),
                           significance_stars(fit.p_values[j])}) +
                "\n";
    text += csv::join({"R^2", csv::format_number(fit.r_squared), "", "", "", ""}) + "\n";
    return text;
}

std::string ols_json(const OlsFit& fit) {
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < fit.terms.size(); ++j) {
        nlohmann::ordered_json t;
        t["term"] = fit.terms[j];
        t["coefficient"] = fit.coefficients[j];
        t["std_error"] = fit.std_errors[j];
        t["t"] = fit.t_stats[j];  // serialized as null when infinite
        t["p"] = fit.p_values[j];
        t["stars"] = significance_stars(fit.p_values[j]);
        t["identifiable"] = static_cast<bool>(fit.identifiable[j]);
        terms.push_back(std::move(t));
    }
    nlohmann::ordered_json j;
    j["solver"] = "svd pseudo-inverse (minimum-norm least squares)";
    j["n_obs"] = fit.n_obs;
    j["design_rank"] = fit.design_rank;
    j["df_resid"] = fit.df_resid;
    j["rank_deficient"] = fit.rank_deficient;
    j["r_squared"] = fit.r_squared;
    j["sigma2"] = fit.sigma2;
    j["terms"] = std::move(terms);
    j["warnings"] = fit.warnings;
    return j.dump(2) + "\n";
}

std::string proportions_csv(const ProportionTable& table) {
    std::vector<std::string> header{"account_id", "total_images"};
    for (std::size_t c = 0; c < table.k; ++c) header.push_back(fmt::format("cluster_{}", c));
    std::string text = csv::join(header) + "\n";
    for (const auto& acc : table.accounts) {
        std::vector<std::string> fields{acc.account_id, std::to_string(acc.total_images)};
        for (double v : acc.proportions) fields.push_back(csv::format_number(v));
        text += csv::join(fields) + "\n";
    }
    return text;
}

}  // namespace imagetypes
