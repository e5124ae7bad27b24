#pragma once

#include <string>
#include <vector>

namespace delirisk {

/// Proportion estimate with a Wald confidence interval, clipped to [0,1].
struct ProportionEstimate {
    long long k = 0;
    long long n = 0;
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double level = 0.95;
};

struct ChiSquareResult {
    double statistic = 0.0;
    int df = 1;
    double p_value = 1.0;
};

/// 2x2 contingency table; rows are groups, columns condition present/absent.
struct TwoByTwo {
    long long a = 0, b = 0, c = 0, d = 0;

    long long total() const { return a + b + c + d; }
    bool degenerate() const {
        return a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0;
    }
};

/// Inverse standard normal CDF. |error| < 1e-9 over (0,1)
/// (rational approximation refined by one Newton step on erfc).
double z_quantile(double q);

/// Upper-tail probability of the chi-square distribution with df degrees
/// of freedom, via the regularized upper incomplete gamma function.
/// For df=1 agrees with erfc(sqrt(x/2)) to 1e-12.
double chi2_sf(double x, int df);

/// Wald interval for k successes out of n.
ProportionEstimate wald_ci(long long k, long long n, double level = 0.95);

/// Pearson chi-square test of independence on a 2x2 table, df=1.
/// Throws ComputeError when a marginal is zero (statistic undefined).
ChiSquareResult chi2_test_2x2(const TwoByTwo& t, bool yates = false);

/// One condition's counts in two disjoint groups.
struct ConditionCounts {
    std::string condition;
    long long k1 = 0, n1 = 0;
    long long k2 = 0, n2 = 0;
};

/// One report row: per-group proportion estimates plus the chi-square
/// contrast. Degenerate tables are flagged instead of failing the report.
struct ComorbidityContrastRow {
    std::string condition;
    ProportionEstimate group1;
    ProportionEstimate group2;
    double chi2 = 0.0;
    double p_value = 1.0;
    bool degenerate = false;
};

/// Build the per-condition prevalence/contrast report for two groups.
std::vector<ComorbidityContrastRow> comorbidity_table(
    const std::vector<ConditionCounts>& counts, double level = 0.95,
    bool yates = false);

}  // namespace delirisk
