#pragma once

#include <string>
#include <vector>

#include "delirisk/stats.hpp"
#include "delirisk/survival.hpp"

namespace delirisk {

/// Survival curve table:
///   time_months,n_at_risk,n_events,survival,var,ci_lo,ci_hi
/// An optional '#' provenance line precedes the header.
std::string km_table_csv(const KMCurve& curve, const std::string& provenance = "");

/// Prevalence contrast table:
///   condition,group1_k,group1_n,group1_p,group1_lo,group1_hi,
///   group2_k,group2_n,group2_p,group2_lo,group2_hi,chi2,p_value,degenerate
std::string comorbidity_stats_csv(const std::vector<ComorbidityContrastRow>& rows,
                                  const std::string& provenance = "");

}  // namespace delirisk
