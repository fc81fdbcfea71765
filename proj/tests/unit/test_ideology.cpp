#include <gtest/gtest.h>

#include <random>

#include "imagetypes/error.hpp"
#include "imagetypes/ideology.hpp"
#include "oracles.hpp"

using namespace imagetypes;

namespace {

struct Problem {
    DesignMatrix x;
    std::vector<double> y;
};

Problem planted(std::size_t n, const std::vector<double>& beta, double noise, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Problem p;
    p.x.rows = n;
    p.x.cols = beta.size();
    for (std::size_t i = 0; i < n; ++i) {
        double yi = 0.0;
        for (std::size_t j = 0; j < beta.size(); ++j) {
            const double v = j == 0 ? 1.0 : nd(gen);
            p.x.values.push_back(v);
            yi += beta[j] * v;
        }
        p.y.push_back(yi + noise * nd(gen));
    }
    return p;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST(Ols, RecoversPlantedCoefficients) {
    const std::vector<double> beta{0.5, -1.0, 2.0, 0.0};
    const auto p = planted(200, beta, 0.3, 1);
    const auto fit = ols_fit(p.x, p.y);
    EXPECT_FALSE(fit.rank_deficient);
    for (std::size_t j = 0; j < beta.size(); ++j) EXPECT_LE(std::abs(fit.coefficients[j] - beta[j]), 3 * fit.std_errors[j]);
}

TEST(Ols, ResidualsOrthogonalToDesign) {
    const auto p = planted(50, {1.0, 2.0, -3.0}, 1.0, 2);
    const auto fit = ols_fit(p.x, p.y);
    for (std::size_t j = 0; j < p.x.cols; ++j) {
        std::vector<double> col;
        for (std::size_t i = 0; i < p.x.rows; ++i) col.push_back(p.x.values[i * p.x.cols + j]);
        EXPECT_NEAR(dot(col, fit.residuals), 0.0, 1e-9);
    }
}

TEST(Ols, ScalingResponseScalesCoefficients) {
    const auto p = planted(40, {0.2, 1.0, 0.7}, 0.5, 3);
    auto y2 = p.y;
    for (auto& v : y2) v *= 2.0;
    const auto f1 = ols_fit(p.x, p.y), f2 = ols_fit(p.x, y2);
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_NEAR(f2.coefficients[j], 2 * f1.coefficients[j], 1e-10);
        EXPECT_NEAR(f2.std_errors[j], 2 * f1.std_errors[j], 1e-10);
        EXPECT_NEAR(f2.t_stats[j], f1.t_stats[j], 1e-8);
    }
    EXPECT_NEAR(f2.r_squared, f1.r_squared, 1e-12);
}

TEST(Ols, ExactFit) {
    auto p = planted(30, {1.0, 2.0, 3.0}, 0.0, 4);
    const auto fit = ols_fit(p.x, p.y);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-10);
    for (double r : fit.residuals) EXPECT_NEAR(r, 0.0, 1e-10);
}

TEST(Ols, DuplicateColumnIsRankDeficient) {
    auto p = planted(30, {1.0, 2.0}, 0.1, 5);
    DesignMatrix x;
    x.rows = 30;
    x.cols = 3;
    for (std::size_t i = 0; i < 30; ++i) x.values.insert(x.values.end(), {1.0, p.x.values[i * 2 + 1], p.x.values[i * 2 + 1]});
    const auto fit = ols_fit(x, p.y);
    EXPECT_TRUE(fit.rank_deficient);
    EXPECT_EQ(fit.design_rank, 2u);
    // Minimum norm splits the duplicated effect evenly.
    EXPECT_NEAR(fit.coefficients[1], fit.coefficients[2], 1e-10);
    EXPECT_TRUE(fit.identifiable[0]);
    EXPECT_FALSE(fit.identifiable[1]);
    const auto fitted = oracle::pinv_fitted(x.values, 30, 3, p.y);
    for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(fit.fitted[i], fitted[i], 1e-8);
}

TEST(Ols, PValuesAgainstReference) {
    // y = 1, 3, 2, 5, 4 on x = 1..5: slope 0.8, RSS 3.6, Sxx 10, df 3.
    DesignMatrix x;
    x.rows = 5;
    x.cols = 2;
    for (int i = 1; i <= 5; ++i) x.values.insert(x.values.end(), {1.0, static_cast<double>(i)});
    const std::vector<double> y{1, 3, 2, 5, 4};
    const auto fit = ols_fit(x, y);
    EXPECT_NEAR(fit.coefficients[1], 0.8, 1e-12);
    EXPECT_NEAR(fit.coefficients[0], 0.6, 1e-12);
    EXPECT_NEAR(fit.std_errors[1], std::sqrt(1.2 / 10.0), 1e-12);
    // Two-sided Student t tail with 3 degrees of freedom, closed form.
    const double u = fit.t_stats[1] / std::sqrt(3.0);
    const double p = 1.0 - 2.0 / M_PI * (std::atan(u) + u / (1.0 + u * u));
    EXPECT_NEAR(fit.p_values[1], p, 1e-12);
    EXPECT_NEAR(fit.r_squared, 0.64, 1e-12);
}

TEST(Ols, DegenerateInputs) {
    DesignMatrix x;
    x.rows = 4;
    x.cols = 2;
    x.values = {1, 0, 1, 1, 1, 2, 1, 3};
    const std::vector<double> constant{2, 2, 2, 2};
    const auto fit = ols_fit(x, constant);
    EXPECT_EQ(fit.r_squared, 0.0);
    EXPECT_FALSE(fit.warnings.empty());

    DesignMatrix tiny;
    tiny.rows = 2;
    tiny.cols = 2;
    tiny.values = {1, 0, 1, 1};
    EXPECT_THROW(ols_fit(tiny, std::vector<double>{1, 2}), Error);
    EXPECT_THROW(ols_fit(DesignMatrix{}, std::vector<double>{}), Error);
}

TEST(Ols, Stars) {
    EXPECT_EQ(significance_stars(0.0005), "***");
    EXPECT_EQ(significance_stars(0.005), "**");
    EXPECT_EQ(significance_stars(0.03), "*");
    EXPECT_EQ(significance_stars(0.2), "");
}

TEST(Ideology, ProportionsAndExclusions) {
    Corpus c;
    c.matrix = oracle::gaussian_matrix(40, 2, 1);
    for (std::size_t i = 0; i < 40; ++i)
        c.manifest.records.push_back({i, "img" + std::to_string(i), i < 20 ? "a" : (i < 35 ? "b" : "c"), std::nullopt});
    c.scores = AccountScores{{"a", 1.0}, {"b", -1.0}, {"c", 0.0}};
    Assignments labels(40);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<ClusterId>(i % 4 == 0 ? 1 : 0);
    const auto table = build_proportions(c, labels, 3, 15);
    ASSERT_EQ(table.accounts.size(), 2u);
    EXPECT_EQ(table.accounts[0].account_id, "a");
    EXPECT_EQ(table.accounts[0].total_images, 20u);
    EXPECT_DOUBLE_EQ(table.accounts[0].proportions[1], 0.25);
    EXPECT_DOUBLE_EQ(table.accounts[0].proportions[2], 0.0);
    ASSERT_EQ(table.excluded.size(), 1u);
    EXPECT_EQ(table.excluded[0].account_id, "c");
}
