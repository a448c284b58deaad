#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyad/config.hpp"

namespace dyad {

/// Two conditions measured on the same participants.
struct PairedSample {
    std::vector<std::string> labels;
    std::vector<double> a;
    std::vector<double> b;

    std::vector<double> differences() const;  // a - b
};

enum class TestKind { PairedT, WilcoxonSignedRank };
std::string_view to_string(TestKind k);

struct TestResult {
    TestKind test = TestKind::PairedT;
    double statistic = 0.0;         // t, or z for the signed-rank test
    std::optional<int> df;          // paired t only
    double p_two_sided = 1.0;       // t distribution, or normal approximation for z
    std::optional<double> exact_p;  // signed-rank test with n <= 12
    double normality_W = 0.0;       // filled by gated_compare
    double normality_p = 0.0;
    int n = 0;                      // pairs used
};

struct ShapiroWilkResult {
    double W = 0.0;
    double p = 0.0;
};

/// Royston's approximation (AS R94): coefficients from normal order-statistic expectations,
/// p from the normalizing transformation of W. Valid for 3 <= n <= 5000.
ShapiroWilkResult shapiro_wilk(std::span<const double> x);

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Standard normal two-sided tail probability.
double normal_two_sided_p(double z);

/// t = mean(d) / (sd(d) / sqrt(n)), df = n - 1.
TestResult paired_t(const PairedSample& s);

/// Signed-rank test on non-zero differences with average ranks for ties. Reports the
/// tie-corrected normal z (no continuity correction) and, for n <= 12, the exact two-sided p.
TestResult wilcoxon_signed_rank(const PairedSample& s);

/// Exact two-sided p of the signed-rank statistic for the given non-zero differences.
double wilcoxon_exact_p(std::span<const double> nonzero_diffs);

/// Average ranks (1-based) of the values, ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> v);

/// Shapiro-Wilk on the differences; normality_p > alpha selects the paired t test,
/// otherwise the signed-rank test.
TestResult gated_compare(const PairedSample& s, double alpha = 0.05);

/// Reports display p as in the comparison tables: "< 0.01" or two decimals.
std::string format_p(double p);
/// "*" when p rounds to 0.05 or below at two decimals (significant or marginal).
std::string significance_flag(double p);

}  // namespace dyad
