#include "delirisk/comorbidity.hpp"

#include <fstream>
#include <sstream>

#include "delirisk/csv.hpp"
#include "delirisk/default_tables.hpp"
#include "delirisk/errors.hpp"

namespace delirisk {

const std::array<std::string, kConditionCount>& condition_names() {
    static const std::array<std::string, kConditionCount> names = {
        "myocardial_infarction",
        "congestive_heart_failure",
        "peripheral_vascular_disease",
        "cerebrovascular_disease",
        "chronic_pulmonary_disease",
        "rheumatic_disease",
        "peptic_ulcer_disease",
        "mild_liver_disease",
        "diabetes_without_cc",
        "diabetes_with_cc",
        "paraplegia",
        "renal_disease",
        "malignant_cancer",
        "severe_liver_disease",
        "metastatic_solid_tumor",
    };
    return names;
}

Condition condition_from_name(const std::string& name) {
    const auto& names = condition_names();
    for (int i = 0; i < kConditionCount; ++i)
        if (names[i] == name) return static_cast<Condition>(i);
    throw InputError("unknown comorbidity condition: '" + name + "'");
}

CharlsonMap CharlsonMap::parse(const std::string& text) {
    CharlsonMap map;
    std::array<bool, kConditionCount> weight_set{};
    std::array<std::array<bool, 2>, kConditionCount> has_version{};

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw InputError("charlson map line " + std::to_string(lineno) +
                             ": expected CONDITION,VERSION,PREFIX,WEIGHT");
        Condition c = condition_from_name(fields[0]);
        int ci = static_cast<int>(c);
        IcdVersion ver;
        if (fields[1] == "ICD9" || fields[1] == "9") ver = IcdVersion::Icd9;
        else if (fields[1] == "ICD10" || fields[1] == "10") ver = IcdVersion::Icd10;
        else
            throw InputError("charlson map line " + std::to_string(lineno) +
                             ": unknown ICD version '" + fields[1] + "'");
        Entry e;
        e.version = ver;
        e.prefix = normalize_icd(fields[2], ver);
        long long w = parse_int(fields[3], "charlson weight");
        if (w != 1 && w != 2 && w != 3 && w != 6)
            throw InputError("charlson map line " + std::to_string(lineno) +
                             ": weight must be one of 1,2,3,6");
        if (weight_set[ci] && map.weights_[ci] != w)
            throw InputError("charlson map: conflicting weights for " + fields[0]);
        map.weights_[ci] = static_cast<int>(w);
        weight_set[ci] = true;
        has_version[ci][ver == IcdVersion::Icd10 ? 1 : 0] = true;
        map.entries_[ci].push_back(std::move(e));
    }
    for (int i = 0; i < kConditionCount; ++i) {
        if (!weight_set[i])
            throw InputError("charlson map: no entries for " + condition_names()[i]);
        if (!has_version[i][0] || !has_version[i][1])
            throw InputError("charlson map: " + condition_names()[i] +
                             " needs entries for both ICD versions");
    }
    return map;
}

CharlsonMap CharlsonMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open charlson map: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const CharlsonMap& CharlsonMap::standard() {
    static const CharlsonMap map = parse(default_tables::kCharlsonMap);
    return map;
}

bool CharlsonMap::matches(Condition c, const DiagnosisCode& dx) const {
    for (const auto& e : entries_[static_cast<int>(c)]) {
        if (e.version == dx.version && dx.code.starts_with(e.prefix)) return true;
    }
    return false;
}

ComorbidityProfile comorbidity_flags(const std::vector<DiagnosisCode>& history,
                                     const CharlsonMap& map) {
    ComorbidityProfile p;
    for (const auto& dx : history) {
        for (int i = 0; i < kConditionCount; ++i) {
            if (!p.flags[i] && map.matches(static_cast<Condition>(i), dx))
                p.flags[i] = true;
        }
    }
    p.cci = cci_score(p, map);
    return p;
}

int cci_score(const ComorbidityProfile& profile, const CharlsonMap& map) {
    auto on = [&](Condition c) { return profile.flag(c); };
    int score = 0;
    for (int i = 0; i < kConditionCount; ++i) {
        if (!profile.flags[i]) continue;
        Condition c = static_cast<Condition>(i);
        // Hierarchy pairs: the milder member contributes nothing when the
        // severe member is present.
        if (c == Condition::MildLiverDisease && on(Condition::SevereLiverDisease))
            continue;
        if (c == Condition::DiabetesWithoutCc && on(Condition::DiabetesWithCc))
            continue;
        if (c == Condition::MalignantCancer && on(Condition::MetastaticSolidTumor))
            continue;
        score += map.weight(c);
    }
    return score;
}

int cci_age_points(int age) {
    if (age < 50) return 0;
    if (age < 60) return 1;
    if (age < 70) return 2;
    if (age < 80) return 3;
    return 4;
}

}  // namespace delirisk
