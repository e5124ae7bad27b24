#include "delirisk/tables.hpp"

#include <cmath>
#include <cstdio>

#include "delirisk/csv.hpp"

namespace delirisk {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::string km_table_csv(const KMCurve& curve, const std::string& provenance) {
    std::string out;
    if (!provenance.empty()) out += "# " + provenance + "\n";
    out += "time_months,n_at_risk,n_events,survival,var,ci_lo,ci_hi\n";
    for (const auto& pt : curve.points) {
        out += num(pt.time) + ',' + std::to_string(pt.n_at_risk) + ',' +
               std::to_string(pt.n_events) + ',' + format_double(pt.survival, 9) +
               ',' +
               (std::isinf(pt.greenwood_var) ? "inf"
                                             : format_double(pt.greenwood_var, 9)) +
               ',' + format_double(pt.ci_lo, 9) + ',' + format_double(pt.ci_hi, 9) +
               "\n";
    }
    return out;
}

std::string comorbidity_stats_csv(const std::vector<ComorbidityContrastRow>& rows,
                                  const std::string& provenance) {
    std::string out;
    if (!provenance.empty()) out += "# " + provenance + "\n";
    out +=
        "condition,group1_k,group1_n,group1_p,group1_lo,group1_hi,"
        "group2_k,group2_n,group2_p,group2_lo,group2_hi,chi2,p_value,degenerate\n";
    for (const auto& r : rows) {
        out += r.condition + ',' + std::to_string(r.group1.k) + ',' +
               std::to_string(r.group1.n) + ',' + format_double(r.group1.p_hat, 6) +
               ',' + format_double(r.group1.ci_lo, 6) + ',' +
               format_double(r.group1.ci_hi, 6) + ',' + std::to_string(r.group2.k) +
               ',' + std::to_string(r.group2.n) + ',' +
               format_double(r.group2.p_hat, 6) + ',' +
               format_double(r.group2.ci_lo, 6) + ',' +
               format_double(r.group2.ci_hi, 6) + ',' + format_double(r.chi2, 6) +
               ',' + format_double(r.p_value, 9) + ',' + (r.degenerate ? "1" : "0") +
               "\n";
    }
    return out;
}

}  // namespace delirisk
