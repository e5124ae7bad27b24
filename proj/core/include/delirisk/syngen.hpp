#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "delirisk/comorbidity.hpp"
#include "delirisk/ehr.hpp"

namespace delirisk {

/// Configuration for the synthetic longitudinal EHR generator. The
/// defaults produce a desk-scale geriatric cohort with a planted,
/// learnable event signal driven by the accumulated comorbidity burden.
struct SynthConfig {
    int n_patients = 3000;
    int min_admissions = 2;  // everyone gets at least one at-risk admission
    int max_admissions = 8;
    double mean_extra_admissions = 2.5;  // admissions beyond the minimum
    double mci_prevalence = 0.015;

    double age_mean = 79.0;
    double age_sd = 7.0;
    int age_min = 65;
    int age_max = 99;
    double female_fraction = 0.53;

    double mean_gap_days = 120.0;   // between discharge and next admission
    double mean_stay_days = 6.0;    // admission length
    double mean_filler_codes = 5.0; // weight-zero codes per admission

    /// Event model: per admission after the first,
    /// logit = baseline + w_cci * cci + w_age * (age - 79)
    ///       + w_diabetes_cc * diabetes_with_cc + w_mci * mci,
    /// evaluated on the state accumulated through the PREVIOUS admission,
    /// so the pre-onset history carries the full signal.
    double baseline_logit = -8.0;
    double w_cci = 1.6;
    double w_age = 0.04;
    double w_diabetes_cc = 1.0;
    double w_mci = 1.2;

    /// Multiplier on onset_prob at the first admission: patients arrive
    /// with pre-existing burden rather than accruing it all in-study.
    double first_admission_onset_boost = 2.0;

    /// Per-admission onset probability for each scored condition, in
    /// condition_names() order.
    std::array<double, kConditionCount> onset_prob = {
        0.060,  // myocardial_infarction
        0.075,  // congestive_heart_failure
        0.050,  // peripheral_vascular_disease
        0.050,  // cerebrovascular_disease
        0.075,  // chronic_pulmonary_disease
        0.018,  // rheumatic_disease
        0.015,  // peptic_ulcer_disease
        0.030,  // mild_liver_disease
        0.090,  // diabetes_without_cc
        0.060,  // diabetes_with_cc
        0.015,  // paraplegia
        0.075,  // renal_disease
        0.045,  // malignant_cancer
        0.012,  // severe_liver_disease
        0.022,  // metastatic_solid_tumor
    };

    std::uint64_t seed = 42;
};

struct GroundTruthRow {
    std::string subject_id;
    double true_risk = 0.0;  // probability of ever developing the event
    bool label = false;
};

struct SynthResult {
    Dataset dataset;
    std::vector<GroundTruthRow> ground_truth;
};

/// Generate a dataset in the three-table format plus the per-patient
/// ground-truth risk. Deterministic: identical config and seed give
/// byte-identical output files.
SynthResult generate(const SynthConfig& config);

}  // namespace delirisk
