#include "delirisk/stats.hpp"

#include <algorithm>
#include <cmath>

#include "delirisk/errors.hpp"

namespace delirisk {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

// Peter Acklam's rational approximation to the normal quantile,
// relative error < 1.15e-9 before refinement.
double z_quantile_approx(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Regularized lower incomplete gamma P(s, x) by series expansion.
// Valid branch: x < s + 1.
double gamma_p_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    double ap = s;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Regularized upper incomplete gamma Q(s, x) by modified Lentz continued
// fraction. Valid branch: x >= s + 1.
double gamma_q_contfrac(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

}  // namespace

double z_quantile(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw ComputeError("z_quantile: q must lie in (0,1)");
    if (q == 0.5) return 0.0;
    // Work on the lower tail, where erfc keeps full relative precision,
    // and mirror the result.
    if (q > 0.5) {
        double x = z_quantile_approx(1.0 - q);
        double err = normal_cdf(x) - (1.0 - q);
        x -= err / normal_pdf(x);
        return -x;
    }
    double x = z_quantile_approx(q);
    double err = normal_cdf(x) - q;
    x -= err / normal_pdf(x);
    return x;
}

double chi2_sf(double x, int df) {
    if (x < 0.0) throw ComputeError("chi2_sf: x must be non-negative");
    if (df < 1) throw ComputeError("chi2_sf: df must be >= 1");
    if (x == 0.0) return 1.0;
    double s = 0.5 * df;
    double h = 0.5 * x;
    if (h < s + 1.0) return 1.0 - gamma_p_series(s, h);
    return gamma_q_contfrac(s, h);
}

ProportionEstimate wald_ci(long long k, long long n, double level) {
    if (n < 1) throw ComputeError("wald_ci: undefined proportion, n = 0");
    if (k < 0 || k > n) throw ComputeError("wald_ci: k outside [0, n]");
    if (!(level > 0.0 && level < 1.0))
        throw ComputeError("wald_ci: level must lie in (0,1)");
    ProportionEstimate e;
    e.k = k;
    e.n = n;
    e.level = level;
    e.p_hat = static_cast<double>(k) / static_cast<double>(n);
    double z = z_quantile(0.5 * (1.0 + level));
    double half = z * std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(n));
    e.ci_lo = std::max(0.0, e.p_hat - half);
    e.ci_hi = std::min(1.0, e.p_hat + half);
    return e;
}

ChiSquareResult chi2_test_2x2(const TwoByTwo& t, bool yates) {
    if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0)
        throw ComputeError("chi2_test_2x2: negative count");
    if (t.degenerate())
        throw ComputeError("chi2_test_2x2: zero marginal, statistic undefined");
    double n = static_cast<double>(t.total());
    double ad_bc = static_cast<double>(t.a) * static_cast<double>(t.d) -
                   static_cast<double>(t.b) * static_cast<double>(t.c);
    double num = std::fabs(ad_bc);
    if (yates) num = std::max(0.0, num - 0.5 * n);
    double denom = static_cast<double>(t.a + t.b) * static_cast<double>(t.c + t.d) *
                   static_cast<double>(t.a + t.c) * static_cast<double>(t.b + t.d);
    ChiSquareResult r;
    r.statistic = n * num * num / denom;
    r.df = 1;
    r.p_value = chi2_sf(r.statistic, 1);
    return r;
}

std::vector<ComorbidityContrastRow> comorbidity_table(
    const std::vector<ConditionCounts>& counts, double level, bool yates) {
    std::vector<ComorbidityContrastRow> rows;
    rows.reserve(counts.size());
    for (const auto& c : counts) {
        if (c.n1 < 1 || c.n2 < 1)
            throw ComputeError("comorbidity_table: empty group for " + c.condition);
        ComorbidityContrastRow row;
        row.condition = c.condition;
        row.group1 = wald_ci(c.k1, c.n1, level);
        row.group2 = wald_ci(c.k2, c.n2, level);
        TwoByTwo t{c.k1, c.n1 - c.k1, c.k2, c.n2 - c.k2};
        if (t.degenerate()) {
            row.degenerate = true;
            row.chi2 = 0.0;
            row.p_value = 1.0;
        } else {
            auto r = chi2_test_2x2(t, yates);
            row.chi2 = r.statistic;
            row.p_value = r.p_value;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace delirisk
