#include "delirisk/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "delirisk/csv.hpp"
#include "delirisk/errors.hpp"
#include "delirisk/version.hpp"

namespace delirisk {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(lineno) +
                             ": expected key=value");
        std::string key = section.empty() ? trim(t.substr(0, eq))
                                          : section + "." + trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));

        auto as_int = [&](long long lo, long long hi) {
            long long v = parse_int(value, key);
            if (v < lo || v > hi)
                throw InputError("config " + key + ": value out of range");
            return v;
        };
        auto as_double = [&]() { return parse_double(value, key); };

        if (key == "data.patients") cfg.patients_path = value;
        else if (key == "data.admissions") cfg.admissions_path = value;
        else if (key == "data.diagnoses") cfg.diagnoses_path = value;
        else if (key == "cohort.criteria") cfg.criteria_path = value;
        else if (key == "cohort.min_age") {
            long long v = as_int(-1, 200);
            cfg.min_age = v < 0 ? std::nullopt : std::optional<int>(static_cast<int>(v));
        } else if (key == "cohort.study_end") cfg.study_end = value;
        else if (key == "charlson.map") cfg.charlson_path = value;
        else if (key == "charlson.age_adjusted") cfg.age_adjusted_cci = as_int(0, 1) != 0;
        else if (key == "features.max_seq_len")
            cfg.max_seq_len = static_cast<std::size_t>(as_int(1, 1024));
        else if (key == "resample.k") cfg.resample.k_neighbors = static_cast<int>(as_int(1, 1000));
        else if (key == "resample.smote_ratio") cfg.resample.smote_ratio = as_double();
        else if (key == "resample.downsample_ratio")
            cfg.resample.downsample_ratio = as_double();
        else if (key == "train.hidden_size")
            cfg.train.hidden_size = static_cast<int>(as_int(1, 4096));
        else if (key == "train.dropout") cfg.train.dropout_rate = as_double();
        else if (key == "train.learning_rate") cfg.train.learning_rate = as_double();
        else if (key == "train.epochs") cfg.train.epochs = static_cast<int>(as_int(1, 100000));
        else if (key == "train.batch_size")
            cfg.train.batch_size = static_cast<int>(as_int(1, 1 << 20));
        else if (key == "train.patience")
            cfg.train.early_stopping_patience = static_cast<int>(as_int(1, 100000));
        else if (key == "eval.folds") cfg.folds = static_cast<int>(as_int(2, 1000));
        else if (key == "eval.bootstrap") cfg.bootstrap_b = static_cast<int>(as_int(1, 1000000));
        else if (key == "eval.ci_level") cfg.ci_level = as_double();
        else if (key == "eval.km_delirium_only")
            cfg.km_delirium_only = as_int(0, 1) != 0;
        else if (key == "synth.n_patients")
            cfg.synth.n_patients = static_cast<int>(as_int(1, 100000000));
        else if (key == "synth.max_admissions")
            cfg.synth.max_admissions = static_cast<int>(as_int(1, 1000));
        else if (key == "synth.mci_prevalence") cfg.synth.mci_prevalence = as_double();
        else if (key == "synth.baseline_logit") cfg.synth.baseline_logit = as_double();
        else if (key == "synth.w_cci") cfg.synth.w_cci = as_double();
        else if (key == "synth.w_age") cfg.synth.w_age = as_double();
        else if (key == "synth.w_diabetes_cc") cfg.synth.w_diabetes_cc = as_double();
        else if (key == "synth.w_mci") cfg.synth.w_mci = as_double();
        else if (key == "run.seed")
            cfg.master_seed = static_cast<std::uint64_t>(parse_int(value, key));
        else if (key == "run.out") cfg.out_dir = value;
        else if (key == "run.threads") cfg.threads = static_cast<int>(as_int(0, 4096));
        else
            throw InputError("config line " + std::to_string(lineno) +
                             ": unknown key '" + key + "'");
    }
    cfg.synth.seed = cfg.master_seed;
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    out << "[data]\n";
    out << "patients=" << patients_path << "\n";
    out << "admissions=" << admissions_path << "\n";
    out << "diagnoses=" << diagnoses_path << "\n";
    out << "[cohort]\n";
    out << "criteria=" << criteria_path << "\n";
    out << "min_age=" << (min_age ? *min_age : -1) << "\n";
    out << "study_end=" << study_end << "\n";
    out << "[charlson]\n";
    out << "map=" << charlson_path << "\n";
    out << "age_adjusted=" << (age_adjusted_cci ? 1 : 0) << "\n";
    out << "[features]\n";
    out << "max_seq_len=" << max_seq_len << "\n";
    out << "[resample]\n";
    out << "k=" << resample.k_neighbors << "\n";
    out << "smote_ratio=" << format_double(resample.smote_ratio, 6) << "\n";
    out << "downsample_ratio=" << format_double(resample.downsample_ratio, 6) << "\n";
    out << "[train]\n";
    out << "hidden_size=" << train.hidden_size << "\n";
    out << "dropout=" << format_double(train.dropout_rate, 6) << "\n";
    out << "learning_rate=" << format_double(train.learning_rate, 6) << "\n";
    out << "epochs=" << train.epochs << "\n";
    out << "batch_size=" << train.batch_size << "\n";
    out << "patience=" << train.early_stopping_patience << "\n";
    out << "[eval]\n";
    out << "folds=" << folds << "\n";
    out << "bootstrap=" << bootstrap_b << "\n";
    out << "ci_level=" << format_double(ci_level, 6) << "\n";
    out << "km_delirium_only=" << (km_delirium_only ? 1 : 0) << "\n";
    out << "[synth]\n";
    out << "n_patients=" << synth.n_patients << "\n";
    out << "max_admissions=" << synth.max_admissions << "\n";
    out << "mci_prevalence=" << format_double(synth.mci_prevalence, 6) << "\n";
    out << "baseline_logit=" << format_double(synth.baseline_logit, 6) << "\n";
    out << "w_cci=" << format_double(synth.w_cci, 6) << "\n";
    out << "w_age=" << format_double(synth.w_age, 6) << "\n";
    out << "w_diabetes_cc=" << format_double(synth.w_diabetes_cc, 6) << "\n";
    out << "w_mci=" << format_double(synth.w_mci, 6) << "\n";
    out << "[run]\n";
    out << "seed=" << master_seed << "\n";
    // out_dir and threads are execution environment, not result-defining:
    // artifacts must be byte-identical across output locations and worker
    // counts, so neither participates in the canonical form.
    return out.str();
}

std::string RunConfig::hash() const {
    // FNV-1a, 64-bit.
    std::string s = serialize();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunConfig::provenance() const {
    std::ostringstream out;
    out << "tool=delirisk-" << kVersion << " seed=" << master_seed
        << " config=" << hash();
    return out.str();
}

}  // namespace delirisk
