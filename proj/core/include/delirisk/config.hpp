#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "delirisk/eval.hpp"
#include "delirisk/syngen.hpp"

namespace delirisk {

/// Full pipeline configuration. Serialized as a flat key=value file with
/// [section] headers; command-line flags override file values.
struct RunConfig {
    // [data]
    std::string patients_path = "patients.csv";
    std::string admissions_path = "admissions.csv";
    std::string diagnoses_path = "diagnoses.csv";

    // [cohort]
    std::string criteria_path;  // empty = built-in rules
    std::optional<int> min_age = 65;
    std::string study_end;  // YYYY-MM-DD; empty = last discharge in data

    // [charlson]
    std::string charlson_path;  // empty = built-in mapping
    bool age_adjusted_cci = false;  // add age points to reported scores

    // [features]
    std::size_t max_seq_len = 8;

    // [resample]
    ResampleConfig resample;

    // [train]
    TrainConfig train;

    // [eval]
    int folds = 10;
    int bootstrap_b = 1000;
    double ci_level = 0.95;
    bool km_delirium_only = false;

    // [synth]
    SynthConfig synth;

    // [run]
    std::uint64_t master_seed = 42;
    std::string out_dir = "out";
    int threads = 0;  // 0 = hardware concurrency

    /// Parse a config file and overlay it on the defaults.
    static RunConfig load(const std::string& path);
    static RunConfig parse(const std::string& text);

    /// Canonical serialization (also what the hash covers).
    std::string serialize() const;

    /// FNV-1a hash of the canonical serialization, hex encoded.
    std::string hash() const;

    /// "tool=<version> seed=<seed> config=<hash>" provenance stamp that
    /// every artifact embeds.
    std::string provenance() const;
};

}  // namespace delirisk
