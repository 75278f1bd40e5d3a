#pragma once

// Hypothesis tests and effect sizes used by the study report.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace affecta::stats {

inline constexpr double kAlpha = 0.05;

/// Largest group size for which the U-test p-value is exact.
inline constexpr std::size_t kExactUMaxGroup = 10;

enum class TestKind { MannWhitneyU, IndependentT, PairedT, ShapiroWilk };

std::string_view to_string(TestKind kind);

struct TestResult {
    TestKind kind = TestKind::MannWhitneyU;
    double statistic = 0.0;              // U, t or W
    double p_value = 1.0;
    std::optional<double> effect_size;   // rank-biserial r or Cohen's d
    std::optional<double> df;
    bool exact = false;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

struct Summary {
    double mean = 0.0;
    double sd = 0.0;  // sample SD (n - 1)
    std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

/// Ranks 1..n with ties sharing their midrank.
std::vector<double> midranks(std::span<const double> values);

/// r = 1 - 2U / (n1 n2).
double rank_biserial(double u, std::size_t n1, std::size_t n2);

/// Two-sided Mann-Whitney U test. U = min(U_a, U_b) with midranks for ties.
/// Exact p (null distribution of the observed midranks over all group
/// splits) when both groups have at most kExactUMaxGroup members; normal
/// approximation with tie and continuity correction otherwise.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// Exact two-sided p for the U statistic of group `a`: doubled smaller tail
/// of the permutation distribution, capped at 1.
double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b);

/// (mean_a - mean_b) / pooled SD.
double cohens_d_pooled(const Summary& a, const Summary& b);

/// Independent two-sample t test with pooled variance, from summaries.
TestResult t_test_independent(const Summary& a, const Summary& b);

enum class TTestMode { Independent, Paired };

/// Two-sided t test. Independent: pooled variance, d from pooled SD.
/// Paired: on the differences a - b, d = mean diff / SD of diffs.
TestResult t_test(std::span<const double> a, std::span<const double> b, TTestMode mode);

/// Royston's AS R94 Shapiro-Wilk test, 3 <= n <= 50.
TestResult shapiro_wilk(std::span<const double> sample);

/// Replaces each missing entry with the mean of the observed entries that
/// share its group label. Throws if a group with a gap has nothing observed.
std::vector<double> mean_impute(std::span<const std::optional<double>> values, std::span<const int> groups);

}  // namespace affecta::stats
