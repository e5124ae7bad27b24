#include "delirisk/ehr.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <tuple>

#include "delirisk/csv.hpp"
#include "delirisk/errors.hpp"

namespace delirisk {

std::string to_string(IcdVersion v) {
    return v == IcdVersion::Icd9 ? "9" : "10";
}

IcdVersion icd_version_from_int(int v) {
    if (v == 9) return IcdVersion::Icd9;
    if (v == 10) return IcdVersion::Icd10;
    throw InputError("unsupported ICD version: " + std::to_string(v));
}

std::string normalize_icd(const std::string& raw, IcdVersion version) {
    (void)version;  // passed through; both revisions normalize identically
    std::string out;
    out.reserve(raw.size());
    for (char ch : raw) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c) || c == '.') continue;
        out.push_back(static_cast<char>(std::toupper(c)));
    }
    if (out.empty())
        throw InputError("malformed ICD code: '" + raw + "' is empty after normalization");
    for (char c : out) {
        if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')))
            throw InputError("malformed ICD code: '" + raw + "'");
    }
    return out;
}

const Patient* Dataset::find(const std::string& subject_id) const {
    auto it = std::lower_bound(
        patients.begin(), patients.end(), subject_id,
        [](const Patient& p, const std::string& id) { return p.subject_id < id; });
    if (it == patients.end() || it->subject_id != subject_id) return nullptr;
    return &*it;
}

namespace {

Gender parse_gender(const std::string& g) {
    if (g == "M") return Gender::Male;
    if (g == "F") return Gender::Female;
    throw InputError("invalid gender '" + g + "' (expected M or F)");
}

void sort_admission_diagnoses(Admission& adm) {
    std::sort(adm.diagnoses.begin(), adm.diagnoses.end(),
              [](const DiagnosisCode& x, const DiagnosisCode& y) {
                  return std::tie(x.seq_num, x.version, x.code) <
                         std::tie(y.seq_num, y.version, y.code);
              });
}

}  // namespace

Dataset load_dataset(const std::string& patients_path,
                     const std::string& admissions_path,
                     const std::string& diagnoses_path) {
    auto patients_tbl =
        CsvTable::load(patients_path, {"subject_id", "gender", "anchor_age"});
    auto admissions_tbl = CsvTable::load(
        admissions_path, {"subject_id", "hadm_id", "admittime", "dischtime"});
    auto diagnoses_tbl = CsvTable::load(
        diagnoses_path,
        {"subject_id", "hadm_id", "seq_num", "icd_code", "icd_version"});

    std::map<std::string, Patient> patients;
    for (std::size_t r = 0; r < patients_tbl.rows(); ++r) {
        Patient p;
        p.subject_id = patients_tbl.at(r, "subject_id");
        if (p.subject_id.empty())
            throw InputError(patients_path + ": empty subject_id");
        p.gender = parse_gender(patients_tbl.at(r, "gender"));
        long long age = parse_int(patients_tbl.at(r, "anchor_age"), "anchor_age");
        if (age < 0) throw InputError("negative anchor_age for " + p.subject_id);
        p.anchor_age = static_cast<int>(age);
        if (!patients.emplace(p.subject_id, std::move(p)).second)
            throw InputError("duplicate subject_id: " + patients_tbl.at(r, "subject_id"));
    }

    // (subject_id, hadm_id) -> admission; also index hadm ownership.
    std::map<std::string, std::pair<std::string, Admission>> admissions;
    for (std::size_t r = 0; r < admissions_tbl.rows(); ++r) {
        std::string sid = admissions_tbl.at(r, "subject_id");
        if (!patients.count(sid))
            throw InputError("admission references unknown subject_id: " + sid);
        Admission adm;
        adm.hadm_id = admissions_tbl.at(r, "hadm_id");
        if (adm.hadm_id.empty())
            throw InputError(admissions_path + ": empty hadm_id");
        adm.admit_time = parse_day(admissions_tbl.at(r, "admittime"));
        adm.discharge_time = parse_day(admissions_tbl.at(r, "dischtime"));
        if (adm.discharge_time < adm.admit_time)
            throw InputError("admission " + adm.hadm_id + " discharged before admitted");
        std::string hadm_key = adm.hadm_id;
        if (!admissions.emplace(std::move(hadm_key), std::make_pair(sid, std::move(adm)))
                 .second)
            throw InputError("duplicate hadm_id: " + admissions_tbl.at(r, "hadm_id"));
    }

    for (std::size_t r = 0; r < diagnoses_tbl.rows(); ++r) {
        std::string hadm = diagnoses_tbl.at(r, "hadm_id");
        auto it = admissions.find(hadm);
        if (it == admissions.end())
            throw InputError("diagnosis references unknown hadm_id: " + hadm);
        if (it->second.first != diagnoses_tbl.at(r, "subject_id"))
            throw InputError("diagnosis subject_id does not match admission " + hadm);
        DiagnosisCode dx;
        long long ver = parse_int(diagnoses_tbl.at(r, "icd_version"), "icd_version");
        if (ver != 9 && ver != 10)
            throw InputError("unsupported ICD version: " + std::to_string(ver));
        dx.version = icd_version_from_int(static_cast<int>(ver));
        dx.code = normalize_icd(diagnoses_tbl.at(r, "icd_code"), dx.version);
        long long seq = parse_int(diagnoses_tbl.at(r, "seq_num"), "seq_num");
        if (seq < 1) throw InputError("seq_num must be positive (hadm " + hadm + ")");
        dx.seq_num = static_cast<int>(seq);
        it->second.second.diagnoses.push_back(std::move(dx));
    }

    Dataset ds;
    ds.provenance = patients_path + " + " + admissions_path + " + " + diagnoses_path;
    for (auto& [hadm, owned] : admissions) {
        auto& [sid, adm] = owned;
        // Deduplicate by (code, version), keeping the smallest seq_num.
        std::map<std::pair<std::string, IcdVersion>, DiagnosisCode> unique;
        for (auto& dx : adm.diagnoses) {
            auto key = std::make_pair(dx.code, dx.version);
            auto it = unique.find(key);
            if (it == unique.end() || dx.seq_num < it->second.seq_num)
                unique[key] = dx;
        }
        adm.diagnoses.clear();
        for (auto& [key, dx] : unique) adm.diagnoses.push_back(dx);
        sort_admission_diagnoses(adm);
        patients[sid].admissions.push_back(std::move(adm));
    }
    for (auto& [sid, p] : patients) {
        std::sort(p.admissions.begin(), p.admissions.end(),
                  [](const Admission& x, const Admission& y) {
                      return std::tie(x.admit_time, x.hadm_id) <
                             std::tie(y.admit_time, y.hadm_id);
                  });
        ds.patients.push_back(std::move(p));
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& patients_path,
                  const std::string& admissions_path,
                  const std::string& diagnoses_path,
                  const std::string& provenance_comment) {
    auto open = [&](const std::string& path) {
        std::ofstream out(path);
        if (!out) throw InputError("cannot write file: " + path);
        if (!provenance_comment.empty()) out << "# " << provenance_comment << "\n";
        return out;
    };
    std::ofstream pf = open(patients_path);
    std::ofstream af = open(admissions_path);
    std::ofstream df = open(diagnoses_path);
    pf << "subject_id,gender,anchor_age\n";
    af << "subject_id,hadm_id,admittime,dischtime\n";
    df << "subject_id,hadm_id,seq_num,icd_code,icd_version\n";
    for (const auto& p : ds.patients) {
        pf << p.subject_id << ',' << (p.gender == Gender::Male ? 'M' : 'F') << ','
           << p.anchor_age << '\n';
        for (const auto& adm : p.admissions) {
            af << p.subject_id << ',' << adm.hadm_id << ','
               << format_day(adm.admit_time) << ',' << format_day(adm.discharge_time)
               << '\n';
            for (const auto& dx : adm.diagnoses) {
                df << p.subject_id << ',' << adm.hadm_id << ',' << dx.seq_num << ','
                   << dx.code << ',' << to_string(dx.version) << '\n';
            }
        }
    }
}

}  // namespace delirisk
