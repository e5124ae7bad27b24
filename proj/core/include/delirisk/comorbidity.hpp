#pragma once

#include <array>
#include <string>
#include <vector>

#include "delirisk/ehr.hpp"

namespace delirisk {

/// The fifteen scored comorbid conditions, in canonical report order.
enum class Condition : int {
    MyocardialInfarction = 0,
    CongestiveHeartFailure,
    PeripheralVascularDisease,
    CerebrovascularDisease,
    ChronicPulmonaryDisease,
    RheumaticDisease,
    PepticUlcerDisease,
    MildLiverDisease,
    DiabetesWithoutCc,
    DiabetesWithCc,
    Paraplegia,
    RenalDisease,
    MalignantCancer,
    SevereLiverDisease,
    MetastaticSolidTumor,
};

inline constexpr int kConditionCount = 15;

const std::array<std::string, kConditionCount>& condition_names();
Condition condition_from_name(const std::string& name);

/// Per-condition flags plus the weighted index score.
struct ComorbidityProfile {
    std::array<bool, kConditionCount> flags{};
    int cci = 0;

    bool flag(Condition c) const { return flags[static_cast<int>(c)]; }
    void set(Condition c, bool v = true) { flags[static_cast<int>(c)] = v; }
};

/// ICD prefix entries and weights per condition.
class CharlsonMap {
public:
    struct Entry {
        std::string prefix;
        IcdVersion version = IcdVersion::Icd9;
    };

    /// Parse the 4-column mapping file (CONDITION,VERSION,PREFIX,WEIGHT).
    /// '#' comments and blank lines allowed. A condition's weight must be
    /// consistent across its lines and lie in {1,2,3,6}; every condition
    /// needs at least one entry per ICD version.
    static CharlsonMap parse(const std::string& text);
    static CharlsonMap load(const std::string& path);

    /// Built-in mapping (same content as the shipped charlson_map.txt).
    static const CharlsonMap& standard();

    const std::vector<Entry>& entries(Condition c) const {
        return entries_[static_cast<int>(c)];
    }
    int weight(Condition c) const { return weights_[static_cast<int>(c)]; }

    /// True iff some entry of `c` prefixes the code.
    bool matches(Condition c, const DiagnosisCode& dx) const;

private:
    std::array<std::vector<Entry>, kConditionCount> entries_;
    std::array<int, kConditionCount> weights_{};
};

/// Flags for a code history (any matching prefix sets the condition; both
/// members of a hierarchy pair may be flagged simultaneously). The cci
/// field of the result is filled in via cci_score.
ComorbidityProfile comorbidity_flags(const std::vector<DiagnosisCode>& history,
                                     const CharlsonMap& map);

/// Weighted index over the flags. Hierarchy: when both members of
/// {mild, severe liver}, {diabetes without, with complications} or
/// {malignant, metastatic} are present only the higher weight counts.
int cci_score(const ComorbidityProfile& profile, const CharlsonMap& map);

/// Optional age adjustment: +1 per decade from 50-59 up, capped at +4.
/// Kept separate from cci_score because age is already a model feature.
int cci_age_points(int age);

}  // namespace delirisk
