#include "commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "delirisk/cohort.hpp"
#include "delirisk/comorbidity.hpp"
#include "delirisk/csv.hpp"
#include "delirisk/ehr.hpp"
#include "delirisk/errors.hpp"
#include "delirisk/eval.hpp"
#include "delirisk/features.hpp"
#include "delirisk/lstm.hpp"
#include "delirisk/stats.hpp"
#include "delirisk/survival.hpp"
#include "delirisk/svg.hpp"
#include "delirisk/tables.hpp"
#include "delirisk/syngen.hpp"
#include "delirisk/version.hpp"

namespace delirisk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string>& artifact_log() {
    static std::vector<std::string> log;
    return log;
}

void remove_logged_artifacts() {
    for (const auto& path : artifact_log()) {
        std::error_code ec;
        fs::remove(path, ec);
    }
    artifact_log().clear();
}

namespace {

// Artifact about to be written (registered for rollback on failure).
fs::path out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    fs::path p = fs::path(cfg.out_dir) / name;
    artifact_log().push_back(p.string());
    return p;
}

// Artifact from an earlier stage, read-only.
fs::path in_path(const RunConfig& cfg, const std::string& name) {
    return fs::path(cfg.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write artifact: " + path.string());
    out << content;
}

json provenance_json(const RunConfig& cfg) {
    return json{{"tool", std::string("delirisk-") + kVersion},
                {"master_seed", cfg.master_seed},
                {"config_hash", cfg.hash()}};
}

void write_json(const RunConfig& cfg, const std::string& name, json j) {
    j["_provenance"] = provenance_json(cfg);
    write_text(out_path(cfg, name), j.dump(2) + "\n");
}

// Value formatting for feature/curve tables: compact but lossless for
// the integer-valued doubles these tables carry.
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

Dataset load_input(const RunConfig& cfg) {
    return load_dataset(cfg.patients_path, cfg.admissions_path, cfg.diagnoses_path);
}

CohortCriteria load_crit(const RunConfig& cfg) {
    if (cfg.criteria_path.empty()) {
        CohortCriteria crit = default_criteria();
        crit.min_age = cfg.min_age;
        return crit;
    }
    return load_criteria(cfg.criteria_path, cfg.min_age);
}

CharlsonMap load_map(const RunConfig& cfg) {
    if (cfg.charlson_path.empty()) return CharlsonMap::standard();
    return CharlsonMap::load(cfg.charlson_path);
}

Day resolve_study_end(const RunConfig& cfg, const Dataset& ds) {
    if (!cfg.study_end.empty()) return parse_day(cfg.study_end);
    Day end = 0;
    bool any = false;
    for (const auto& p : ds.patients) {
        for (const auto& adm : p.admissions) {
            end = any ? std::max(end, adm.discharge_time) : adm.discharge_time;
            any = true;
        }
    }
    if (!any) throw ComputeError("study end undefined: dataset has no admissions");
    return end;
}

std::vector<DiagnosisCode> full_history(const Patient& p) {
    std::vector<DiagnosisCode> all;
    for (const auto& adm : p.admissions)
        all.insert(all.end(), adm.diagnoses.begin(), adm.diagnoses.end());
    return all;
}

struct GroupedSurvival {
    std::vector<SurvivalObservation> mci;
    std::vector<SurvivalObservation> non_mci;
};

GroupedSurvival survival_groups(const RunConfig& cfg, const Dataset& ds,
                                const std::vector<CohortAssignment>& assignments) {
    Day study_end = resolve_study_end(cfg, ds);
    GroupedSurvival g;
    for (const auto& a : assignments) {
        if (a.excluded) continue;
        if (cfg.km_delirium_only && !a.has_delirium) continue;
        auto obs = to_survival(a, study_end);
        (a.is_mci ? g.mci : g.non_mci).push_back(obs);
    }
    return g;
}

}  // namespace

void cmd_synth(const RunConfig& cfg) {
    SynthConfig scfg = cfg.synth;
    scfg.seed = cfg.master_seed;
    auto result = generate(scfg);
    std::string comment = cfg.provenance();
    save_dataset(result.dataset, out_path(cfg, "patients.csv").string(),
                 out_path(cfg, "admissions.csv").string(),
                 out_path(cfg, "diagnoses.csv").string(), comment);
    std::string gt = "# " + comment + "\nsubject_id,true_risk,label\n";
    for (const auto& row : result.ground_truth)
        gt += row.subject_id + ',' + format_double(row.true_risk, 9) + ',' +
              (row.label ? "1" : "0") + "\n";
    write_text(out_path(cfg, "ground_truth.csv"), gt);
    std::cerr << "synth: wrote " << result.dataset.patients.size()
              << " patients to " << cfg.out_dir << "\n";
}

void cmd_ingest(const RunConfig& cfg) {
    auto ds = load_input(cfg);
    std::size_t n_adm = 0, n_dx = 0;
    for (const auto& p : ds.patients) {
        n_adm += p.admissions.size();
        for (const auto& adm : p.admissions) n_dx += adm.diagnoses.size();
    }
    write_json(cfg, "ingest.json",
               json{{"patients", ds.patients.size()},
                    {"admissions", n_adm},
                    {"diagnoses", n_dx},
                    {"warnings", ds.warnings},
                    {"source", ds.provenance}});
    std::cerr << "ingest: " << ds.patients.size() << " patients, " << n_adm
              << " admissions, " << n_dx << " diagnoses\n";
}

void cmd_cohort(const RunConfig& cfg) {
    auto ds = load_input(cfg);
    auto crit = load_crit(cfg);
    auto assignments = build_cohort(ds, crit);
    auto flow = cohort_flow(assignments);

    write_json(cfg, "cohort.json",
               json{{"total", flow.total},
                    {"excluded", flow.excluded},
                    {"non_mci", json{{"n", flow.non_mci_n},
                                     {"delirium", flow.non_mci_delirium}}},
                    {"mci", json{{"n", flow.mci_n}, {"delirium", flow.mci_delirium}}}});

    std::string rows = "# " + cfg.provenance() + "\n";
    rows +=
        "subject_id,excluded,is_mci,has_delirium,index_admission,"
        "first_delirium,last_discharge,exclusion_reasons\n";
    for (const auto& a : assignments) {
        std::string reasons;
        for (const auto& r : a.exclusion_reasons) {
            if (!reasons.empty()) reasons += ';';
            reasons += r;
        }
        rows += a.subject_id + ',' + (a.excluded ? "1" : "0") + ',' +
                (a.is_mci ? "1" : "0") + ',' + (a.has_delirium ? "1" : "0") + ',' +
                (a.excluded ? "" : format_day(a.index_admission_time)) + ',' +
                (a.first_delirium_time ? format_day(*a.first_delirium_time) : "") +
                ',' + (a.excluded ? "" : format_day(a.last_discharge_time)) + ',' +
                reasons + "\n";
    }
    write_text(out_path(cfg, "cohort_assignments.csv"), rows);

    auto summary = cohort_summary(assignments, ds);
    std::string demo = "# " + cfg.provenance() + "\n";
    demo +=
        "group,n,pct,age_median,age_q1,age_q3,male_n,male_pct,female_n,"
        "female_pct\n";
    if (summary.empty_cohort) {
        demo += "# empty cohort: no included patients\n";
    } else {
        for (const auto& r : summary.rows) {
            demo += r.group + ',' + std::to_string(r.n) + ',' +
                    format_double(r.pct, 2) + ',' + format_double(r.age_median, 1) +
                    ',' + format_double(r.age_q1, 1) + ',' +
                    format_double(r.age_q3, 1) + ',' + std::to_string(r.male_n) +
                    ',' + format_double(r.male_pct, 2) + ',' +
                    std::to_string(r.female_n) + ',' + format_double(r.female_pct, 2) +
                    "\n";
        }
    }
    write_text(out_path(cfg, "demographics.csv"), demo);
    std::cerr << "cohort: total=" << flow.total << " excluded=" << flow.excluded
              << " mci=" << flow.mci_n << " non_mci=" << flow.non_mci_n << "\n";
}

void cmd_comorbidity(const RunConfig& cfg) {
    auto ds = load_input(cfg);
    auto map = load_map(cfg);
    std::string rows = "# " + cfg.provenance() + "\nsubject_id";
    for (const auto& name : condition_names()) rows += ',' + name;
    rows += ",cci\n";
    for (const auto& p : ds.patients) {
        auto profile = comorbidity_flags(full_history(p), map);
        int score = profile.cci;
        if (cfg.age_adjusted_cci) score += cci_age_points(p.anchor_age);
        rows += p.subject_id;
        for (int i = 0; i < kConditionCount; ++i)
            rows += profile.flags[i] ? ",1" : ",0";
        rows += ',' + std::to_string(score) + "\n";
    }
    write_text(out_path(cfg, "comorbidity.csv"), rows);
    std::cerr << "comorbidity: wrote profiles for " << ds.patients.size()
              << " patients\n";
}

void cmd_comorbidity_stats(const RunConfig& cfg) {
    auto ds = load_input(cfg);
    auto crit = load_crit(cfg);
    auto map = load_map(cfg);
    auto assignments = build_cohort(ds, crit);

    // Group membership -> per-condition counts.
    struct Group {
        long long n = 0;
        std::array<long long, kConditionCount> k{};
    };
    Group mci, non_mci, del_mci, del_non_mci;
    for (const auto& a : assignments) {
        if (a.excluded) continue;
        const Patient* p = ds.find(a.subject_id);
        auto profile = comorbidity_flags(full_history(*p), map);
        auto tally = [&](Group& g) {
            ++g.n;
            for (int i = 0; i < kConditionCount; ++i)
                if (profile.flags[i]) ++g.k[i];
        };
        tally(a.is_mci ? mci : non_mci);
        if (a.has_delirium) tally(a.is_mci ? del_mci : del_non_mci);
    }

    auto to_rows = [&](const Group& g1, const Group& g2) {
        std::vector<ConditionCounts> counts;
        for (int i = 0; i < kConditionCount; ++i)
            counts.push_back({condition_names()[i], g1.k[i], std::max(1LL, g1.n),
                              g2.k[i], std::max(1LL, g2.n)});
        return comorbidity_table(counts, cfg.ci_level);
    };
    if (mci.n == 0 || non_mci.n == 0)
        throw ComputeError("comorbidity-stats: a cohort group is empty");
    write_text(out_path(cfg, "comorbidity_stats_mci.csv"),
               comorbidity_stats_csv(to_rows(mci, non_mci), cfg.provenance()));
    if (del_mci.n == 0 || del_non_mci.n == 0) {
        std::cerr << "comorbidity-stats: no event patients in one group; "
                     "delirium contrast skipped\n";
        write_text(out_path(cfg, "comorbidity_stats_delirium.csv"),
                   "# " + cfg.provenance() + "\n# not testable: empty group\n");
    } else {
        write_text(out_path(cfg, "comorbidity_stats_delirium.csv"),
                   comorbidity_stats_csv(to_rows(del_mci, del_non_mci), cfg.provenance()));
    }
    std::cerr << "comorbidity-stats: groups mci=" << mci.n
              << " non_mci=" << non_mci.n << " delirium(mci)=" << del_mci.n
              << " delirium(non_mci)=" << del_non_mci.n << "\n";
}

void cmd_km(const RunConfig& cfg) {
    auto ds = load_input(cfg);
    auto crit = load_crit(cfg);
    auto assignments = build_cohort(ds, crit);
    auto groups = survival_groups(cfg, ds, assignments);
    if (groups.mci.empty() || groups.non_mci.empty())
        throw ComputeError("km: empty survival group (try --km-delirium-only=0)");

    auto mci_curve = km_fit(groups.mci);
    auto non_curve = km_fit(groups.non_mci);
    greenwood_band(mci_curve, cfg.ci_level);
    greenwood_band(non_curve, cfg.ci_level);
    write_text(out_path(cfg, "km_mci.csv"), km_table_csv(mci_curve, cfg.provenance()));
    write_text(out_path(cfg, "km_non_mci.csv"), km_table_csv(non_curve, cfg.provenance()));
    write_text(out_path(cfg, "km_plot.svg"),
               km_plot_svg({{"MCI", mci_curve}, {"non-MCI", non_curve}},
                           cfg.provenance()));

    auto lr = logrank_test(groups.mci, groups.non_mci);
    write_json(cfg, "logrank.json",
               json{{"statistic", lr.statistic},
                    {"p_value", lr.p_value},
                    {"observed", json{{"mci", lr.observed_a},
                                      {"non_mci", lr.observed_b}}},
                    {"expected", json{{"mci", lr.expected_a},
                                      {"non_mci", lr.expected_b}}},
                    {"population",
                     cfg.km_delirium_only ? "delirium-only" : "all-included"}});
    std::cerr << "km: n_mci=" << groups.mci.size()
              << " n_non_mci=" << groups.non_mci.size()
              << " logrank_p=" << format_double(lr.p_value, 6) << "\n";
}

void cmd_features(const RunConfig& cfg) {
    auto ds = load_input(cfg);
    auto crit = load_crit(cfg);
    auto map = load_map(cfg);
    auto assignments = build_cohort(ds, crit);
    auto built = build_sequences(ds, assignments, map, cfg.max_seq_len);

    std::string rows = "# " + cfg.provenance() + "\nsubject_id,step_idx,is_pad";
    for (const auto& name : feature_names()) rows += ',' + name;
    rows += ",label\n";
    for (const auto& seq : built.sequences) {
        for (std::size_t t = 0; t < seq.steps.size(); ++t) {
            rows += seq.subject_id + ',' + std::to_string(t) + ',' +
                    (t < seq.pad_len() ? "1" : "0");
            for (double v : seq.steps[t]) rows += ',' + num(v);
            rows += seq.label ? ",1\n" : ",0\n";
        }
    }
    write_text(out_path(cfg, "features.csv"), rows);
    for (const auto& [subject, reason] : built.dropped)
        std::cerr << "features: dropped " << subject << " (" << reason << ")\n";
    std::cerr << "features: " << built.sequences.size() << " sequences, "
              << built.dropped.size() << " dropped\n";
}

namespace {

std::vector<FeatureSequence> load_feature_file(const RunConfig& cfg) {
    std::vector<std::string> columns = {"subject_id", "step_idx", "is_pad"};
    for (const auto& name : feature_names()) columns.push_back(name);
    columns.push_back("label");
    auto tbl = CsvTable::load(in_path(cfg, "features.csv").string(), columns);

    std::map<std::string, std::map<long long, std::pair<FeatureVector, bool>>> by_subject;
    std::map<std::string, bool> labels;
    std::vector<std::string> order;
    for (std::size_t r = 0; r < tbl.rows(); ++r) {
        std::string sid = tbl.at(r, "subject_id");
        if (!by_subject.count(sid)) order.push_back(sid);
        long long step = parse_int(tbl.at(r, "step_idx"), "step_idx");
        FeatureVector v{};
        for (std::size_t d = 0; d < kFeatureDim; ++d)
            v[d] = parse_double(tbl.at(r, feature_names()[d]), feature_names()[d]);
        bool is_pad = parse_int(tbl.at(r, "is_pad"), "is_pad") != 0;
        by_subject[sid][step] = {v, is_pad};
        labels[sid] = parse_int(tbl.at(r, "label"), "label") != 0;
    }
    if (by_subject.empty()) throw InputError("features.csv has no rows");

    std::size_t max_len = by_subject.begin()->second.size();
    std::vector<FeatureSequence> sequences;
    for (const auto& sid : order) {
        const auto& steps = by_subject[sid];
        if (steps.size() != max_len)
            throw InputError("features.csv: inconsistent step count for " + sid);
        FeatureSequence seq;
        seq.subject_id = sid;
        seq.label = labels[sid];
        seq.steps.assign(max_len, FeatureVector{});
        seq.mask_len = 0;
        for (const auto& [step, data] : steps) {
            if (step < 0 || step >= static_cast<long long>(max_len))
                throw InputError("features.csv: step index out of range for " + sid);
            seq.steps[static_cast<std::size_t>(step)] = data.first;
            if (!data.second) ++seq.mask_len;
        }
        if (seq.mask_len == 0)
            throw InputError("features.csv: no real steps for " + sid);
        sequences.push_back(std::move(seq));
    }
    return sequences;
}

}  // namespace

void cmd_train(const RunConfig& cfg) {
    auto sequences = load_feature_file(cfg);
    std::vector<FlatSample> flats;
    for (const auto& seq : sequences) flats.push_back(flatten(seq));

    // Stratified 80/20 split for validation, then in-fold-style
    // resampling of the training side only.
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < flats.size(); ++i)
        (flats[i].label ? pos : neg).push_back(i);
    if (pos.size() < 2 || neg.size() < 2)
        throw ComputeError("train: need at least two samples of each class");
    Rng split_rng = Rng(cfg.master_seed).derive(rng_tag::kFoldSplit);
    split_rng.shuffle(pos);
    split_rng.shuffle(neg);
    std::vector<FlatSample> train_set, val_set;
    for (std::size_t i = 0; i < pos.size(); ++i)
        (i < std::max<std::size_t>(1, pos.size() / 5) ? val_set : train_set)
            .push_back(flats[pos[i]]);
    for (std::size_t i = 0; i < neg.size(); ++i)
        (i < std::max<std::size_t>(1, neg.size() / 5) ? val_set : train_set)
            .push_back(flats[neg[i]]);

    Rng res_rng = Rng(cfg.master_seed).derive(rng_tag::kResample);
    auto smoted = smotenc(train_set, cfg.resample.k_neighbors,
                          cfg.resample.smote_ratio, res_rng.next_u64());
    auto balanced = downsample_majority(smoted.samples,
                                        cfg.resample.downsample_ratio,
                                        res_rng.next_u64());

    TrainConfig tc = cfg.train;
    tc.master_seed = cfg.master_seed;
    auto result = train(balanced, val_set, tc);
    save_params(result.params, out_path(cfg, "model.ckpt").string(),
                cfg.provenance());

    json history{{"train_loss", result.history.train_loss},
                 {"val_metric", result.history.val_metric},
                 {"val_metric_is_auroc", result.history.val_metric_is_auroc},
                 {"selected_epoch", result.history.selected_epoch},
                 {"n_train_resampled", balanced.size()},
                 {"n_val", val_set.size()},
                 {"warnings", result.warnings}};
    write_json(cfg, "train_history.json", history);
    std::cerr << "train: selected epoch " << result.history.selected_epoch
              << ", best val metric "
              << result.history.val_metric[result.history.selected_epoch] << "\n";
}

void cmd_evaluate(const RunConfig& cfg) {
    auto sequences = load_feature_file(cfg);
    CvConfig cv;
    cv.folds = cfg.folds;
    cv.resample = cfg.resample;
    cv.train = cfg.train;
    cv.bootstrap_b = cfg.bootstrap_b;
    cv.ci_level = cfg.ci_level;
    cv.master_seed = cfg.master_seed;
    cv.threads = cfg.threads;
    auto report = kfold_cv(sequences, cv);

    json folds = json::array();
    for (const auto& f : report.folds) {
        folds.push_back(json{{"fold", f.fold},
                             {"n_train", f.n_train},
                             {"n_train_resampled", f.n_train_resampled},
                             {"n_val", f.n_val},
                             {"auroc", f.fold_auroc},
                             {"auprc", f.fold_auprc},
                             {"brier", f.fold_brier},
                             {"selected_epoch", f.selected_epoch}});
    }
    json metrics{
        {"auroc", report.auroc_point},
        {"auroc_ci", json{{"lo", report.auroc_ci.lo}, {"hi", report.auroc_ci.hi}}},
        {"auprc", report.auprc_point},
        {"auprc_ci", json{{"lo", report.auprc_ci.lo}, {"hi", report.auprc_ci.hi}}},
        {"brier", report.brier_point},
        {"folds", folds},
        {"n_sequences", sequences.size()},
        {"config",
         json{{"folds", cfg.folds},
              {"bootstrap", cfg.bootstrap_b},
              {"smote_k", cfg.resample.k_neighbors},
              {"smote_ratio", cfg.resample.smote_ratio},
              {"downsample_ratio", cfg.resample.downsample_ratio},
              {"hidden_size", cfg.train.hidden_size},
              {"dropout", cfg.train.dropout_rate},
              {"learning_rate", cfg.train.learning_rate},
              {"epochs", cfg.train.epochs},
              {"batch_size", cfg.train.batch_size},
              {"patience", cfg.train.early_stopping_patience}}}};
    write_json(cfg, "metrics.json", metrics);

    auto roc = roc_points(report.pooled);
    std::string roc_csv = "# " + cfg.provenance() + "\nfpr,tpr,threshold\n";
    for (const auto& pt : roc)
        roc_csv += format_double(pt.fpr, 9) + ',' + format_double(pt.tpr, 9) + ',' +
                   (std::isinf(pt.threshold) ? "inf" : format_double(pt.threshold, 9)) +
                   "\n";
    write_text(out_path(cfg, "roc_points.csv"), roc_csv);

    auto pr = pr_points(report.pooled);
    std::string pr_csv = "# " + cfg.provenance() + "\nrecall,precision,threshold\n";
    for (const auto& pt : pr)
        pr_csv += format_double(pt.recall, 9) + ',' + format_double(pt.precision, 9) +
                  ',' + format_double(pt.threshold, 9) + "\n";
    write_text(out_path(cfg, "pr_points.csv"), pr_csv);

    write_text(out_path(cfg, "roc_plot.svg"),
               roc_plot_svg(roc, report.auroc_point, cfg.provenance()));
    std::cerr << "evaluate: pooled auroc=" << format_double(report.auroc_point, 4)
              << " auprc=" << format_double(report.auprc_point, 4)
              << " brier=" << format_double(report.brier_point, 4) << "\n";
}

namespace {

json read_json_artifact(const RunConfig& cfg, const std::string& name) {
    std::ifstream in(in_path(cfg, name));
    if (!in) throw InputError("report: missing stage artifact " + name +
                              " (run the earlier stages first)");
    json j;
    in >> j;
    return j;
}

json csv_artifact_rows(const RunConfig& cfg, const std::string& name) {
    std::ifstream in(in_path(cfg, name));
    if (!in) throw InputError("report: missing stage artifact " + name +
                              " (run the earlier stages first)");
    json rows = json::array();
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (header.empty()) {
            header = fields;
            continue;
        }
        json row;
        for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i)
            row[header[i]] = fields[i];
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

void cmd_report(const RunConfig& cfg) {
    // Pure aggregation of previously written artifacts; nothing is
    // recomputed or retrained here.
    json summary;
    summary["cohort_flow"] = read_json_artifact(cfg, "cohort.json");
    summary["demographics"] = csv_artifact_rows(cfg, "demographics.csv");
    summary["comorbidity_mci_contrast"] =
        csv_artifact_rows(cfg, "comorbidity_stats_mci.csv");
    summary["comorbidity_delirium_contrast"] =
        csv_artifact_rows(cfg, "comorbidity_stats_delirium.csv");
    summary["km"] = json{{"mci", csv_artifact_rows(cfg, "km_mci.csv")},
                         {"non_mci", csv_artifact_rows(cfg, "km_non_mci.csv")},
                         {"logrank", read_json_artifact(cfg, "logrank.json")}};
    summary["model"] = read_json_artifact(cfg, "metrics.json");
    for (auto* key : {"cohort_flow", "model"}) {
        if (summary[key].contains("_provenance")) summary[key].erase("_provenance");
    }
    summary["km"]["logrank"].erase("_provenance");
    write_json(cfg, "summary.json", summary);
    std::cerr << "report: wrote summary.json\n";
}

}  // namespace delirisk::cli
