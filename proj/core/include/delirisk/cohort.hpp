#pragma once

#include <optional>
#include <string>
#include <vector>

#include "delirisk/ehr.hpp"

namespace delirisk {

/// A named family of ICD prefixes with exact-code carve-outs.
/// Matching: version equal, code starts with an entry prefix, and the
/// code is not listed as a carve-out.
struct CodeSet {
    struct Entry {
        std::string prefix;  // normalized: uppercase, dot-free
        IcdVersion version = IcdVersion::Icd9;
    };
    std::string name;
    std::vector<Entry> entries;
    std::vector<Entry> carve_outs;  // exact codes removed from matching
};

bool code_matches(const CodeSet& set, const DiagnosisCode& dx);

struct CohortCriteria {
    CodeSet exclusion;
    CodeSet mci;
    CodeSet delirium;
    std::optional<int> min_age = 65;  // applied at the index admission
};

/// Built-in rule sets (same content as the shipped cohort_rules.txt).
CohortCriteria default_criteria();

/// Parse a rules file: one `SETNAME,VERSION,PREFIX[,carveout]` line per
/// entry; '#' comments and blank lines allowed. Set names: exclusion,
/// mci, delirium.
CohortCriteria load_criteria(const std::string& path,
                             std::optional<int> min_age = 65);
CohortCriteria parse_criteria(const std::string& text,
                              std::optional<int> min_age = 65);

struct CohortAssignment {
    std::string subject_id;
    bool excluded = false;
    std::vector<std::string> exclusion_reasons;  // sorted, deduplicated
    bool is_mci = false;
    bool has_delirium = false;
    std::optional<Day> first_delirium_time;
    Day index_admission_time = 0;
    Day last_discharge_time = 0;
};

/// Apply the selection flowchart to every patient. Pure function of
/// (dataset, criteria); output order follows dataset patient order and is
/// independent of diagnosis iteration order.
std::vector<CohortAssignment> build_cohort(const Dataset& dataset,
                                           const CohortCriteria& criteria);

/// Flow counts for the selection summary.
struct CohortFlow {
    long long total = 0;
    long long excluded = 0;
    long long non_mci_n = 0;
    long long non_mci_delirium = 0;
    long long mci_n = 0;
    long long mci_delirium = 0;
};

CohortFlow cohort_flow(const std::vector<CohortAssignment>& assignments);

/// One demographics row (Total / No MCI / MCI).
struct SummaryRow {
    std::string group;
    long long n = 0;
    double pct = 0.0;  // of the included population
    double age_median = 0.0;
    double age_q1 = 0.0;  // inclusive (median-of-halves) quartiles
    double age_q3 = 0.0;
    long long male_n = 0;
    double male_pct = 0.0;
    long long female_n = 0;
    double female_pct = 0.0;
};

struct CohortSummary {
    bool empty_cohort = false;  // no included patients; rows omitted
    std::vector<SummaryRow> rows;
};

/// Demographic summary over included (non-excluded) patients. Age is the
/// age at the index admission.
CohortSummary cohort_summary(const std::vector<CohortAssignment>& assignments,
                             const Dataset& dataset);

}  // namespace delirisk
