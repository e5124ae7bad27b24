#pragma once

#include <string>
#include <vector>

#include "delirisk/dates.hpp"

namespace delirisk {

enum class IcdVersion { Icd9, Icd10 };

std::string to_string(IcdVersion v);
IcdVersion icd_version_from_int(int v);

/// Normalize a raw code: trim, uppercase, strip dots. Throws InputError
/// when the result is empty or contains characters outside [A-Z0-9].
std::string normalize_icd(const std::string& raw, IcdVersion version);

/// One coded diagnosis attached to an admission. `code` is normalized
/// (uppercase, dot-free). `seq_num` orders codes within the admission.
struct DiagnosisCode {
    std::string code;
    IcdVersion version = IcdVersion::Icd9;
    int seq_num = 1;

    bool operator==(const DiagnosisCode&) const = default;
};

struct Admission {
    std::string hadm_id;
    Day admit_time = 0;
    Day discharge_time = 0;
    /// Unique by (code, version), sorted by (seq_num, version, code).
    std::vector<DiagnosisCode> diagnoses;

    bool operator==(const Admission&) const = default;
};

enum class Gender { Male, Female };

struct Patient {
    std::string subject_id;
    Gender gender = Gender::Female;
    int anchor_age = 0;
    /// Sorted ascending by (admit_time, hadm_id).
    std::vector<Admission> admissions;

    bool operator==(const Patient&) const = default;
};

struct Dataset {
    std::vector<Patient> patients;  // sorted by subject_id
    std::string provenance;
    std::vector<std::string> warnings;

    bool operator==(const Dataset& o) const { return patients == o.patients; }

    const Patient* find(const std::string& subject_id) const;
};

/// Load the three-table longitudinal EHR export:
///   patients:   subject_id,gender,anchor_age
///   admissions: subject_id,hadm_id,admittime,dischtime
///   diagnoses:  subject_id,hadm_id,seq_num,icd_code,icd_version
/// Validates referential integrity, deduplicates (code, version) within
/// each admission, sorts everything so the result is independent of input
/// row order, and is immutable (and thread-safe to share) afterwards.
Dataset load_dataset(const std::string& patients_path,
                     const std::string& admissions_path,
                     const std::string& diagnoses_path);

/// Inverse of load_dataset: write the three files. `provenance_comment`
/// (if non-empty) is emitted as a leading '#' line in each file, which the
/// loader skips.
void save_dataset(const Dataset& ds, const std::string& patients_path,
                  const std::string& admissions_path,
                  const std::string& diagnoses_path,
                  const std::string& provenance_comment = "");

}  // namespace delirisk
