// delirisk: longitudinal EHR risk pipeline.
//
// Stages: synth -> ingest -> cohort -> comorbidity -> comorbidity-stats
//         -> km -> features -> train -> evaluate -> report
// Exit codes: 0 success, 1 computation error, 2 usage or input error.

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>

#include "commands.hpp"
#include "delirisk/errors.hpp"
#include "delirisk/version.hpp"

namespace {

using delirisk::RunConfig;

struct FlagOverrides {
    std::optional<std::string> config_path;
    std::optional<std::string> out_dir;
    std::optional<long long> seed;
    std::optional<int> threads;
    std::optional<std::string> patients, admissions, diagnoses;
    std::optional<std::string> criteria, charlson, study_end;
    std::optional<int> min_age;
    std::optional<int> max_seq_len;
    std::optional<int> smote_k;
    std::optional<double> smote_ratio, downsample_ratio;
    std::optional<int> hidden, epochs, batch, patience;
    std::optional<double> dropout, lr;
    std::optional<int> folds, bootstrap;
    std::optional<bool> km_delirium_only;
    std::optional<bool> age_adjusted_cci;
    std::optional<int> n_patients;
};

void add_common_options(CLI::App* cmd, FlagOverrides& f) {
    cmd->add_option("--config", f.config_path, "run configuration file");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--threads", f.threads, "worker cap, 0 = hardware");
    cmd->add_option("--patients", f.patients, "patients table");
    cmd->add_option("--admissions", f.admissions, "admissions table");
    cmd->add_option("--diagnoses", f.diagnoses, "diagnoses table");
    cmd->add_option("--criteria", f.criteria, "cohort rules file");
    cmd->add_option("--charlson", f.charlson, "condition mapping file");
    cmd->add_option("--min-age", f.min_age, "age gate at index admission, -1 disables");
    cmd->add_option("--study-end", f.study_end, "censoring horizon YYYY-MM-DD");
    cmd->add_option("--max-seq-len", f.max_seq_len, "sequence length cap");
    cmd->add_option("--smote-k", f.smote_k, "oversampling neighbor count");
    cmd->add_option("--smote-ratio", f.smote_ratio, "minority/majority target");
    cmd->add_option("--downsample-ratio", f.downsample_ratio,
                    "majority/minority target");
    cmd->add_option("--hidden", f.hidden, "recurrent state size");
    cmd->add_option("--dropout", f.dropout, "readout dropout rate");
    cmd->add_option("--lr", f.lr, "learning rate");
    cmd->add_option("--epochs", f.epochs, "training epoch cap");
    cmd->add_option("--batch", f.batch, "batch size");
    cmd->add_option("--patience", f.patience, "early stopping patience");
    cmd->add_option("--folds", f.folds, "cross-validation folds");
    cmd->add_option("--bootstrap", f.bootstrap, "bootstrap resamples");
    cmd->add_option("--km-delirium-only", f.km_delirium_only,
                    "restrict survival analysis to event patients");
    cmd->add_option("--age-adjusted-cci", f.age_adjusted_cci,
                    "add age points to reported index scores");
    cmd->add_option("--n-patients", f.n_patients, "synthetic cohort size");
}

RunConfig resolve(const FlagOverrides& f) {
    RunConfig cfg = f.config_path ? RunConfig::load(*f.config_path) : RunConfig{};
    if (f.out_dir) cfg.out_dir = *f.out_dir;
    if (f.seed) cfg.master_seed = static_cast<std::uint64_t>(*f.seed);
    if (f.threads) cfg.threads = *f.threads;
    if (f.patients) cfg.patients_path = *f.patients;
    if (f.admissions) cfg.admissions_path = *f.admissions;
    if (f.diagnoses) cfg.diagnoses_path = *f.diagnoses;
    if (f.criteria) cfg.criteria_path = *f.criteria;
    if (f.charlson) cfg.charlson_path = *f.charlson;
    if (f.study_end) cfg.study_end = *f.study_end;
    if (f.min_age)
        cfg.min_age = *f.min_age < 0 ? std::nullopt : std::optional<int>(*f.min_age);
    if (f.max_seq_len) {
        if (*f.max_seq_len < 1)
            throw delirisk::InputError("--max-seq-len must be >= 1");
        cfg.max_seq_len = static_cast<std::size_t>(*f.max_seq_len);
    }
    if (f.smote_k) cfg.resample.k_neighbors = *f.smote_k;
    if (f.smote_ratio) cfg.resample.smote_ratio = *f.smote_ratio;
    if (f.downsample_ratio) cfg.resample.downsample_ratio = *f.downsample_ratio;
    if (f.hidden) cfg.train.hidden_size = *f.hidden;
    if (f.dropout) cfg.train.dropout_rate = *f.dropout;
    if (f.lr) cfg.train.learning_rate = *f.lr;
    if (f.epochs) cfg.train.epochs = *f.epochs;
    if (f.batch) cfg.train.batch_size = *f.batch;
    if (f.patience) cfg.train.early_stopping_patience = *f.patience;
    if (f.folds) cfg.folds = *f.folds;
    if (f.bootstrap) cfg.bootstrap_b = *f.bootstrap;
    if (f.km_delirium_only) cfg.km_delirium_only = *f.km_delirium_only;
    if (f.age_adjusted_cci) cfg.age_adjusted_cci = *f.age_adjusted_cci;
    if (f.n_patients) cfg.synth.n_patients = *f.n_patients;
    cfg.synth.seed = cfg.master_seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delirium-risk pipeline over longitudinal EHR tables"};
    app.set_version_flag("--version", std::string("delirisk ") + delirisk::kVersion);
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        std::function<void(const RunConfig&)> run;
    };
    const Sub subs[] = {
        {"synth", "generate a synthetic three-table dataset", delirisk::cli::cmd_synth},
        {"ingest", "validate input tables and summarize them",
         delirisk::cli::cmd_ingest},
        {"cohort", "apply selection rules, write flow and demographics",
         delirisk::cli::cmd_cohort},
        {"comorbidity", "per-patient condition flags and index score",
         delirisk::cli::cmd_comorbidity},
        {"comorbidity-stats", "group prevalence contrasts with intervals",
         delirisk::cli::cmd_comorbidity_stats},
        {"km", "survival curves, bands and the two-group test", delirisk::cli::cmd_km},
        {"features", "per-admission feature sequences", delirisk::cli::cmd_features},
        {"train", "fit the sequence classifier once", delirisk::cli::cmd_train},
        {"evaluate", "stratified cross-validation metrics",
         delirisk::cli::cmd_evaluate},
        {"report", "aggregate stage artifacts into summary.json",
         delirisk::cli::cmd_report},
    };

    std::vector<FlagOverrides> overrides(std::size(subs));
    std::vector<CLI::App*> parsed;
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_common_options(cmd, overrides[i]);
        parsed.push_back(cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (std::size_t i = 0; i < std::size(subs); ++i) {
        if (!parsed[i]->parsed()) continue;
        try {
            delirisk::cli::artifact_log().clear();
            RunConfig cfg = resolve(overrides[i]);
            subs[i].run(cfg);
            delirisk::cli::artifact_log().clear();
        } catch (const delirisk::InputError& e) {
            delirisk::cli::remove_logged_artifacts();
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            delirisk::cli::remove_logged_artifacts();
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 0;
}
