#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "imagetypes/cluster.hpp"
#include "imagetypes/corpus.hpp"

namespace imagetypes {

struct AccountProportions {
    std::string account_id;
    std::size_t total_images = 0;
    std::vector<double> proportions;  // length k, sums to 1
};

struct AccountExclusion {
    std::string account_id;
    std::size_t total_images = 0;
    std::string reason;
};

struct ProportionTable {
    std::size_t k = 0;
    std::size_t min_images = 0;
    std::vector<AccountProportions> accounts;  // lexicographic by account_id
    std::vector<AccountExclusion> excluded;
};

inline constexpr std::size_t kDefaultMinImages = 15;

/// Per-account share of images in each cluster. Accounts with fewer than
/// min_images rows or without a score are listed in `excluded`.
/// `assignments` is indexed by matrix row; k = 0 means max(cluster) + 1.
ProportionTable build_proportions(const Corpus& corpus, std::span<const ClusterId> assignments, std::size_t k = 0,
                                  std::size_t min_images = kDefaultMinImages);

/// Row-major dense matrix of doubles.
struct DesignMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<std::string> column_names;

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

struct OlsFit {
    std::vector<std::string> terms;
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> t_stats;
    std::vector<double> p_values;
    /// False where the coefficient is not determined by the data (its unit
    /// vector lies outside the row space of the design).
    std::vector<bool> identifiable;
    std::vector<double> fitted;
    std::vector<double> residuals;
    double r_squared = 0.0;
    double sigma2 = 0.0;
    std::size_t n_obs = 0;
    std::size_t design_rank = 0;
    std::size_t df_resid = 0;
    bool rank_deficient = false;
    std::vector<std::string> warnings;
};

/// Minimum-norm least squares through the SVD pseudo-inverse. Standard errors
/// come from sigma^2 (X'X)^+ with sigma^2 = RSS / (n - rank); p-values are
/// two-sided from Student's t with n - rank degrees of freedom.
/// A constant response yields R^2 = 0 and a DegenerateResponse warning.
OlsFit ols_fit(const DesignMatrix& x, std::span<const double> y);

/// Regresses score on [1 | proportions].
OlsFit regress_ideology(const ProportionTable& table, const AccountScores& scores);

/// "***" for p < 0.001, "**" for p < 0.01, "*" for p < 0.05.
std::string significance_stars(double p);

std::string ols_csv(const OlsFit& fit);
std::string ols_json(const OlsFit& fit);
std::string proportions_csv(const ProportionTable& table);

}  // namespace imagetypes
