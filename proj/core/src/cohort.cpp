#include "delirisk/cohort.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "delirisk/csv.hpp"
#include "delirisk/default_tables.hpp"
#include "delirisk/errors.hpp"

namespace delirisk {

bool code_matches(const CodeSet& set, const DiagnosisCode& dx) {
    for (const auto& co : set.carve_outs) {
        if (co.version == dx.version && co.prefix == dx.code) return false;
    }
    for (const auto& e : set.entries) {
        if (e.version == dx.version && dx.code.starts_with(e.prefix)) return true;
    }
    return false;
}

namespace {

IcdVersion parse_version_token(const std::string& tok) {
    if (tok == "ICD9" || tok == "9") return IcdVersion::Icd9;
    if (tok == "ICD10" || tok == "10") return IcdVersion::Icd10;
    throw InputError("rules file: unknown ICD version token '" + tok + "'");
}

std::string entry_label(const CodeSet& set, const CodeSet::Entry& e) {
    return set.name + ":" + e.prefix + "(ICD" + to_string(e.version) + ")";
}

}  // namespace

CohortCriteria parse_criteria(const std::string& text, std::optional<int> min_age) {
    CohortCriteria crit;
    crit.exclusion.name = "exclusion";
    crit.mci.name = "mci";
    crit.delirium.name = "delirium";
    crit.min_age = min_age;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3 && fields.size() != 4)
            throw InputError("rules file line " + std::to_string(lineno) +
                             ": expected SETNAME,VERSION,PREFIX[,carveout]");
        CodeSet* set = nullptr;
        if (fields[0] == "exclusion") set = &crit.exclusion;
        else if (fields[0] == "mci") set = &crit.mci;
        else if (fields[0] == "delirium") set = &crit.delirium;
        else
            throw InputError("rules file line " + std::to_string(lineno) +
                             ": unknown set '" + fields[0] + "'");
        CodeSet::Entry e;
        e.version = parse_version_token(fields[1]);
        e.prefix = normalize_icd(fields[2], e.version);
        if (fields.size() == 4) {
            if (fields[3] != "carveout")
                throw InputError("rules file line " + std::to_string(lineno) +
                                 ": unexpected trailing field '" + fields[3] + "'");
            set->carve_outs.push_back(e);
        } else {
            set->entries.push_back(e);
        }
    }
    for (const auto* s : {&crit.exclusion, &crit.mci, &crit.delirium}) {
        std::set<std::pair<std::string, IcdVersion>> seen;
        for (const auto& co : s->carve_outs) {
            if (!seen.emplace(co.prefix, co.version).second)
                throw InputError("rules file: duplicate carve-out " + co.prefix);
        }
    }
    return crit;
}

CohortCriteria load_criteria(const std::string& path, std::optional<int> min_age) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open rules file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_criteria(buf.str(), min_age);
}

CohortCriteria default_criteria() {
    return parse_criteria(default_tables::kCohortRules);
}

std::vector<CohortAssignment> build_cohort(const Dataset& dataset,
                                           const CohortCriteria& criteria) {
    std::vector<CohortAssignment> out;
    out.reserve(dataset.patients.size());
    for (const auto& p : dataset.patients) {
        CohortAssignment a;
        a.subject_id = p.subject_id;
        std::set<std::string> reasons;

        if (p.admissions.empty()) {
            a.excluded = true;
            a.exclusion_reasons = {"no-admissions"};
            out.push_back(std::move(a));
            continue;
        }
        a.index_admission_time = p.admissions.front().admit_time;
        a.last_discharge_time = p.admissions.front().discharge_time;
        for (const auto& adm : p.admissions)
            a.last_discharge_time = std::max(a.last_discharge_time, adm.discharge_time);

        if (criteria.min_age && p.anchor_age < *criteria.min_age) reasons.insert("age");

        for (const auto& adm : p.admissions) {
            for (const auto& dx : adm.diagnoses) {
                if (!code_matches(criteria.exclusion, dx)) continue;
                // Record every matching entry so the reason names the family.
                bool carved = false;
                for (const auto& co : criteria.exclusion.carve_outs)
                    carved |= (co.version == dx.version && co.prefix == dx.code);
                if (carved) continue;
                for (const auto& e : criteria.exclusion.entries) {
                    if (e.version == dx.version && dx.code.starts_with(e.prefix))
                        reasons.insert(entry_label(criteria.exclusion, e));
                }
            }
        }
        if (!reasons.empty()) {
            a.excluded = true;
            a.exclusion_reasons.assign(reasons.begin(), reasons.end());
            out.push_back(std::move(a));
            continue;
        }

        for (const auto& adm : p.admissions) {
            for (const auto& dx : adm.diagnoses) {
                if (code_matches(criteria.mci, dx)) a.is_mci = true;
                if (code_matches(criteria.delirium, dx)) {
                    a.has_delirium = true;
                    if (!a.first_delirium_time || adm.admit_time < *a.first_delirium_time)
                        a.first_delirium_time = adm.admit_time;
                }
            }
        }
        out.push_back(std::move(a));
    }
    return out;
}

CohortFlow cohort_flow(const std::vector<CohortAssignment>& assignments) {
    CohortFlow f;
    f.total = static_cast<long long>(assignments.size());
    for (const auto& a : assignments) {
        if (a.excluded) {
            ++f.excluded;
        } else if (a.is_mci) {
            ++f.mci_n;
            if (a.has_delirium) ++f.mci_delirium;
        } else {
            ++f.non_mci_n;
            if (a.has_delirium) ++f.non_mci_delirium;
        }
    }
    return f;
}

namespace {

// Median by linear interpolation of the two middle order statistics.
double median_sorted(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    std::size_t n = hi - lo;
    if (n % 2 == 1) return v[lo + n / 2];
    return 0.5 * (v[lo + n / 2 - 1] + v[lo + n / 2]);
}

SummaryRow make_row(const std::string& group, std::vector<double> ages,
                    long long male, long long female, long long included_total) {
    SummaryRow r;
    r.group = group;
    r.n = static_cast<long long>(ages.size());
    r.pct = included_total > 0
                ? 100.0 * static_cast<double>(r.n) / static_cast<double>(included_total)
                : 0.0;
    r.male_n = male;
    r.female_n = female;
    if (r.n > 0) {
        r.male_pct = 100.0 * static_cast<double>(male) / static_cast<double>(r.n);
        r.female_pct = 100.0 * static_cast<double>(female) / static_cast<double>(r.n);
        std::sort(ages.begin(), ages.end());
        std::size_t n = ages.size();
        r.age_median = median_sorted(ages, 0, n);
        // Inclusive quartiles: medians of the lower/upper halves, the
        // overall median belonging to both halves when n is odd.
        std::size_t half = n / 2;
        if (n == 1) {
            r.age_q1 = r.age_q3 = ages[0];
        } else if (n % 2 == 0) {
            r.age_q1 = median_sorted(ages, 0, half);
            r.age_q3 = median_sorted(ages, half, n);
        } else {
            r.age_q1 = median_sorted(ages, 0, half + 1);
            r.age_q3 = median_sorted(ages, half, n);
        }
    }
    return r;
}

}  // namespace

CohortSummary cohort_summary(const std::vector<CohortAssignment>& assignments,
                             const Dataset& dataset) {
    std::vector<double> ages_all, ages_mci, ages_non;
    long long male_all = 0, male_mci = 0, male_non = 0;
    long long female_all = 0, female_mci = 0, female_non = 0;
    for (const auto& a : assignments) {
        if (a.excluded) continue;
        const Patient* p = dataset.find(a.subject_id);
        if (!p) throw ComputeError("assignment for unknown subject " + a.subject_id);
        double age = static_cast<double>(p->anchor_age);
        bool male = p->gender == Gender::Male;
        ages_all.push_back(age);
        (male ? male_all : female_all)++;
        if (a.is_mci) {
            ages_mci.push_back(age);
            (male ? male_mci : female_mci)++;
        } else {
            ages_non.push_back(age);
            (male ? male_non : female_non)++;
        }
    }
    CohortSummary s;
    if (ages_all.empty()) {
        s.empty_cohort = true;
        return s;
    }
    long long total = static_cast<long long>(ages_all.size());
    s.rows.push_back(make_row("Total", std::move(ages_all), male_all, female_all, total));
    s.rows.push_back(make_row("No MCI", std::move(ages_non), male_non, female_non, total));
    s.rows.push_back(make_row("MCI", std::move(ages_mci), male_mci, female_mci, total));
    return s;
}

}  // namespace delirisk
