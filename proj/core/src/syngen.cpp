#include "delirisk/syngen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "delirisk/errors.hpp"
#include "delirisk/rng.hpp"

namespace delirisk {

namespace {

// Weight-zero filler pool: common billing codes that match no scored
// condition, no cohort rule and no event label.
const std::vector<std::pair<const char*, IcdVersion>>& filler_pool() {
    static const std::vector<std::pair<const char*, IcdVersion>> pool = {
        {"I10", IcdVersion::Icd10},   {"E785", IcdVersion::Icd10},
        {"Z515", IcdVersion::Icd10},  {"J189", IcdVersion::Icd10},
        {"N390", IcdVersion::Icd10},  {"K219", IcdVersion::Icd10},
        {"M545", IcdVersion::Icd10},  {"4019", IcdVersion::Icd9},
        {"2724", IcdVersion::Icd9},   {"V5789", IcdVersion::Icd9},
        {"486", IcdVersion::Icd9},    {"5990", IcdVersion::Icd9},
        {"53081", IcdVersion::Icd9},  {"7242", IcdVersion::Icd9},
    };
    return pool;
}

int poisson(Rng& rng, double mean) {
    double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform();
    } while (p > limit);
    return k - 1;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string pad_id(const char* prefix, long long v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*lld", prefix, width, v);
    return buf;
}

}  // namespace

SynthResult generate(const SynthConfig& config) {
    if (config.n_patients < 1) throw InputError("generate: n_patients must be >= 1");
    if (config.max_admissions < 1)
        throw InputError("generate: max_admissions must be >= 1");
    if (!(config.mci_prevalence >= 0.0 && config.mci_prevalence <= 1.0))
        throw InputError("generate: mci_prevalence outside [0, 1]");
    for (double p : config.onset_prob) {
        if (!(p >= 0.0 && p <= 1.0))
            throw InputError("generate: onset probability outside [0, 1]");
    }

    const CharlsonMap& map = CharlsonMap::standard();
    Rng rng = Rng(config.seed).derive(rng_tag::kSynth);
    const Day base_day = parse_day("2010-01-01");
    const char* delirium_codes[3] = {"F05", "2930", "29281"};
    const IcdVersion delirium_versions[3] = {IcdVersion::Icd10, IcdVersion::Icd9,
                                             IcdVersion::Icd9};

    SynthResult result;
    result.dataset.provenance = "synthetic";
    result.dataset.patients.reserve(static_cast<std::size_t>(config.n_patients));

    for (int pi = 0; pi < config.n_patients; ++pi) {
        Patient patient;
        patient.subject_id = pad_id("S", pi + 1, 6);
        double age_draw = config.age_mean + config.age_sd * rng.normal();
        patient.anchor_age = std::clamp(static_cast<int>(std::lround(age_draw)),
                                        config.age_min, config.age_max);
        patient.gender = rng.bernoulli(config.female_fraction) ? Gender::Female
                                                               : Gender::Male;
        int n_adm = config.min_admissions +
                    std::min(config.max_admissions - config.min_admissions,
                             poisson(rng, config.mean_extra_admissions));
        bool is_mci = rng.bernoulli(config.mci_prevalence);
        int mci_admission = is_mci
                                ? static_cast<int>(rng.uniform_int(
                                      static_cast<std::uint64_t>((n_adm + 1) / 2)))
                                : -1;

        std::array<bool, kConditionCount> active{};
        bool delirious = false;
        double log_no_event = 0.0;  // log prod (1 - p_t)
        // Event-model covariates from the previous admission: the risk at
        // admission t is a function of the state the record shows at t-1.
        double prev_cci = 0.0;
        double prev_age = static_cast<double>(patient.anchor_age);
        bool prev_diab_cc = false;
        Day admit = base_day + static_cast<Day>(rng.uniform_int(3650));
        Day first_admit = admit;

        for (int ai = 0; ai < n_adm; ++ai) {
            Admission adm;
            adm.hadm_id = pad_id("H", (pi + 1) * 100LL + ai, 8);
            adm.admit_time = admit;
            Day stay = 1 + static_cast<Day>(std::lround(
                               rng.exponential(config.mean_stay_days)));
            adm.discharge_time = admit + stay;

            std::set<std::pair<std::string, IcdVersion>> codes;
            auto add_code = [&](const std::string& code, IcdVersion ver) {
                codes.emplace(code, ver);
            };

            if (ai >= 1) {
                double logit = config.baseline_logit + config.w_cci * prev_cci +
                               config.w_age * (prev_age - 79.0) +
                               (prev_diab_cc ? config.w_diabetes_cc : 0.0) +
                               (is_mci ? config.w_mci : 0.0);
                double p = logistic(logit);
                log_no_event += std::log1p(-p);
                if (!delirious && rng.bernoulli(p)) {
                    delirious = true;
                    int d = pi % 3;
                    add_code(delirium_codes[d], delirium_versions[d]);
                }
            }

            // New condition onsets plus intermittent re-billing of
            // established ones.
            double onset_scale = ai == 0 ? config.first_admission_onset_boost : 1.0;
            for (int c = 0; c < kConditionCount; ++c) {
                bool bill = false;
                if (!active[c]) {
                    if (rng.bernoulli(std::min(1.0, onset_scale * config.onset_prob[c]))) {
                        active[c] = true;
                        bill = true;
                    }
                } else {
                    bill = rng.bernoulli(0.5);
                }
                if (bill) {
                    const auto& entries = map.entries(static_cast<Condition>(c));
                    const auto& e = entries[rng.uniform_int(entries.size())];
                    add_code(e.prefix, e.version);
                }
            }
            ComorbidityProfile profile;
            profile.flags = active;
            profile.cci = cci_score(profile, map);

            if (ai == mci_admission) {
                if (pi % 2 == 0) add_code("G3184", IcdVersion::Icd10);
                else add_code("33183", IcdVersion::Icd9);
            }

            int n_filler = poisson(rng, config.mean_filler_codes);
            for (int fi = 0; fi < n_filler; ++fi) {
                const auto& f = filler_pool()[rng.uniform_int(filler_pool().size())];
                add_code(f.first, f.second);
            }

            double years = static_cast<double>(adm.admit_time - first_admit) / 365.25;
            prev_age = static_cast<double>(patient.anchor_age) + std::floor(years);
            prev_cci = static_cast<double>(profile.cci);
            prev_diab_cc = active[static_cast<int>(Condition::DiabetesWithCc)];

            int seq = 1;
            for (const auto& [code, ver] : codes) {
                DiagnosisCode dx;
                dx.code = code;
                dx.version = ver;
                dx.seq_num = seq++;
                adm.diagnoses.push_back(std::move(dx));
            }
            // Stored order matches the loader's: (seq_num, version, code).
            Day discharged = adm.discharge_time;
            patient.admissions.push_back(std::move(adm));

            Day gap = 30 + static_cast<Day>(std::lround(
                              rng.exponential(config.mean_gap_days)));
            admit = discharged + gap;
        }

        GroundTruthRow gt;
        gt.subject_id = patient.subject_id;
        gt.true_risk = 1.0 - std::exp(log_no_event);
        gt.label = delirious;
        result.ground_truth.push_back(std::move(gt));
        result.dataset.patients.push_back(std::move(patient));
    }
    return result;
}

}  // namespace delirisk
