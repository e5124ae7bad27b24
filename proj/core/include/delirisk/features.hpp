#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "delirisk/cohort.hpp"
#include "delirisk/comorbidity.hpp"
#include "delirisk/ehr.hpp"

namespace delirisk {

/// Per-admission feature layout, 19 values per step:
///   [0] age at admission (years)
///   [1] gender indicator (1 = female, 0 = male)
///   [2] unique coded diagnoses this admission
///   [3..17] comorbidity indicators, cumulative through this admission,
///           in condition_names() order
///   [18] weighted comorbidity index for the cumulative indicators
inline constexpr std::size_t kFeatureDim = 19;
inline constexpr std::size_t kSlotAge = 0;
inline constexpr std::size_t kSlotGender = 1;
inline constexpr std::size_t kSlotDxCount = 2;
inline constexpr std::size_t kSlotFlagsBegin = 3;
inline constexpr std::size_t kSlotCci = 18;

using FeatureVector = std::array<double, kFeatureDim>;

inline bool is_nominal_slot(std::size_t dim) {
    return dim == kSlotGender ||
           (dim >= kSlotFlagsBegin && dim < kSlotFlagsBegin + kConditionCount);
}

/// Column headers for the per-step feature file.
const std::array<std::string, kFeatureDim>& feature_names();

/// One patient's pre-padded admission history. Steps before the first
/// real one are all-zero padding; `mask_len` counts the real steps at the
/// tail. Admissions at/after the first delirium-coded one are never
/// included, so the label cannot leak into the inputs.
struct FeatureSequence {
    std::string subject_id;
    std::vector<FeatureVector> steps;  // size = max_seq_len
    bool label = false;
    std::size_t mask_len = 0;

    std::size_t pad_len() const { return steps.size() - mask_len; }
    bool operator==(const FeatureSequence&) const = default;
};

struct SequenceBuild {
    std::vector<FeatureSequence> sequences;
    /// (subject_id, reason) for patients without usable pre-onset history.
    std::vector<std::pair<std::string, std::string>> dropped;
};

SequenceBuild build_sequences(const Dataset& dataset,
                              const std::vector<CohortAssignment>& assignments,
                              const CharlsonMap& map, std::size_t max_seq_len);

/// Row-major flattening of a sequence: step 0 first, padded slots zero.
struct FlatSample {
    std::string subject_id;
    std::vector<double> values;  // max_seq_len * kFeatureDim
    bool label = false;
    std::size_t mask_len = 0;

    bool operator==(const FlatSample&) const = default;
};

/// Indices of the gender/indicator slots at every step of the flattened
/// layout (16 per step).
std::vector<std::size_t> nominal_slots(std::size_t max_seq_len);

FlatSample flatten(const FeatureSequence& seq);
FeatureSequence unflatten(const FlatSample& flat, std::size_t max_seq_len);

/// Synthetic minority oversampling for the mixed nominal/continuous
/// flattened layout. Neighbor metric: squared Euclidean distance over
/// continuous slots plus m^2 per mismatched nominal slot, with m the
/// median of the minority class's per-continuous-slot standard
/// deviations; slots that are padding in either sample are skipped.
/// Synthesis: one lambda ~ U(0,1) per synthetic sample interpolates the
/// continuous slots between a round-robin seed and one of its k nearest
/// minority neighbors; nominal slots take the majority vote among the k
/// neighbors with ties broken by the seed. Generates minority samples
/// until minority ~= target_minority_ratio * majority.
struct SmotencResult {
    std::vector<FlatSample> samples;  // originals followed by synthetics
    double nominal_penalty = 0.0;     // the m that was used
    bool zero_variance_fallback = false;
};

SmotencResult smotenc(const std::vector<FlatSample>& samples, int k,
                      double target_minority_ratio, std::uint64_t rng_seed);

/// Keep a uniform random subset of the majority class so that
/// majority ~= target_majority_ratio * minority. Minority samples and the
/// input order of survivors are untouched.
std::vector<FlatSample> downsample_majority(const std::vector<FlatSample>& samples,
                                            double target_majority_ratio,
                                            std::uint64_t rng_seed);

}  // namespace delirisk
