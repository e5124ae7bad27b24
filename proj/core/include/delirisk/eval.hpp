#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "delirisk/features.hpp"
#include "delirisk/lstm.hpp"

namespace delirisk {

struct ScoredSet {
    std::vector<double> scores;  // in [0, 1]
    std::vector<int> labels;     // 0/1, same length
};

/// Probability that a random positive outranks a random negative, ties
/// counting half (Mann-Whitney form). Requires both classes.
double auroc(const ScoredSet& s);

/// Average precision: sum of precision x recall increments over
/// descending score thresholds, tied scores processed as one group.
/// Requires at least one positive.
double auprc(const ScoredSet& s);

/// Mean squared difference between scores and labels.
double brier(const ScoredSet& s);

struct BootstrapCi {
    double lo = 0.0;
    double hi = 0.0;
    int skipped = 0;  // resamples abandoned after single-class redraws
};

/// Percentile bootstrap over B resamples with replacement. Single-class
/// resamples are redrawn a bounded number of times, then skipped.
BootstrapCi bootstrap_ci(const std::function<double(const ScoredSet&)>& metric_fn,
                         const ScoredSet& s, int B = 1000, double level = 0.95,
                         std::uint64_t seed = 0);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};
struct PrPoint {
    double recall = 0.0;
    double precision = 1.0;
    double threshold = 0.0;
};

/// Curve points at every distinct score threshold (for plotting).
std::vector<RocPoint> roc_points(const ScoredSet& s);
std::vector<PrPoint> pr_points(const ScoredSet& s);

struct ResampleConfig {
    int k_neighbors = 5;
    double smote_ratio = 1.0;       // minority/majority after oversampling
    double downsample_ratio = 1.0;  // majority/minority after downsampling
};

struct CvConfig {
    int folds = 10;
    ResampleConfig resample;
    TrainConfig train;  // per-fold seeds are derived from master_seed
    int bootstrap_b = 1000;
    double ci_level = 0.95;
    std::uint64_t master_seed = 42;
    int threads = 1;  // 0 = hardware concurrency
};

struct FoldDetail {
    int fold = 0;
    std::size_t n_train = 0;            // outer training portion
    std::size_t n_train_resampled = 0;  // after SMOTE + downsampling
    std::size_t n_val = 0;
    double fold_auroc = 0.0;
    double fold_auprc = 0.0;
    double fold_brier = 0.0;
    int selected_epoch = 0;
    std::vector<std::string> val_subjects;       // held-out fold members
    std::vector<std::string> resample_subjects;  // inputs to resampling
};

struct MetricsReport {
    double auroc_point = 0.0;
    BootstrapCi auroc_ci;
    double auprc_point = 0.0;
    BootstrapCi auprc_ci;
    double brier_point = 0.0;
    std::vector<FoldDetail> folds;
    ScoredSet pooled;  // out-of-fold scores, sequence input order
    CvConfig config;   // echo
    std::vector<std::string> warnings;
};

/// Stratified k-fold cross-validation of the full resample-train-score
/// pipeline. Resampling and early stopping see only each fold's training
/// portion (an inner stratified split provides the early-stopping set);
/// the held-out fold is scored once. Headline metrics pool the
/// out-of-fold scores; per-fold metrics are also reported. Deterministic
/// for a fixed master_seed and invariant to the thread count.
MetricsReport kfold_cv(const std::vector<FeatureSequence>& sequences,
                       const CvConfig& config);

}  // namespace delirisk
