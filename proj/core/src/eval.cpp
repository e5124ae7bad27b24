#include "delirisk/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "delirisk/errors.hpp"
#include "delirisk/rng.hpp"

namespace delirisk {

namespace {

void validate_scored(const ScoredSet& s) {
    if (s.scores.empty()) throw ComputeError("metric on empty score set");
    if (s.scores.size() != s.labels.size())
        throw ComputeError("scores and labels differ in length");
}

std::pair<long long, long long> class_counts(const ScoredSet& s) {
    long long pos = 0, neg = 0;
    for (int l : s.labels) (l ? pos : neg)++;
    return {pos, neg};
}

}  // namespace

double auroc(const ScoredSet& s) {
    validate_scored(s);
    auto [pos, neg] = class_counts(s);
    if (pos == 0 || neg == 0)
        throw ComputeError("auroc undefined: a single class is present");

    std::size_t n = s.scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.scores[a] < s.scores[b];
    });

    // Rank-sum with average ranks over tied scores.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && s.scores[order[j]] == s.scores[order[i]]) ++j;
        double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t)
            if (s.labels[order[t]]) rank_sum_pos += avg_rank;
        i = j;
    }
    double p = static_cast<double>(pos);
    double u = rank_sum_pos - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(neg));
}

double auprc(const ScoredSet& s) {
    validate_scored(s);
    auto [pos, neg] = class_counts(s);
    (void)neg;
    if (pos == 0) throw ComputeError("auprc undefined: no positives");

    std::vector<std::size_t> order(s.scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.scores[a] > s.scores[b];
    });

    double ap = 0.0;
    double tp = 0.0, fp = 0.0;
    double prev_recall = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && s.scores[order[j]] == s.scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t) (s.labels[order[t]] ? tp : fp) += 1.0;
        double recall = tp / static_cast<double>(pos);
        double precision = tp + fp > 0.0 ? tp / (tp + fp) : 1.0;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

double brier(const ScoredSet& s) {
    validate_scored(s);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
        double x = s.scores[i];
        if (!(x >= 0.0 && x <= 1.0))
            throw ComputeError("brier: score outside [0, 1]");
        double d = x - static_cast<double>(s.labels[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(s.scores.size());
}

BootstrapCi bootstrap_ci(const std::function<double(const ScoredSet&)>& metric_fn,
                         const ScoredSet& s, int B, double level,
                         std::uint64_t seed) {
    validate_scored(s);
    if (B < 1) throw InputError("bootstrap_ci: B must be >= 1");
    Rng rng(seed);
    std::size_t n = s.scores.size();
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(B));
    BootstrapCi ci;

    ScoredSet re;
    re.scores.resize(n);
    re.labels.resize(n);
    for (int b = 0; b < B; ++b) {
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            bool pos = false, neg = false;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t j = static_cast<std::size_t>(rng.uniform_int(n));
                re.scores[i] = s.scores[j];
                re.labels[i] = s.labels[j];
                (re.labels[i] ? pos : neg) = true;
            }
            ok = pos && neg;
        }
        if (!ok) {
            ++ci.skipped;
            continue;
        }
        stats.push_back(metric_fn(re));
    }
    if (stats.empty())
        throw ComputeError("bootstrap_ci: every resample was single-class");

    std::sort(stats.begin(), stats.end());
    auto quantile = [&](double q) {
        double idx = q * static_cast<double>(stats.size() - 1);
        std::size_t lo = static_cast<std::size_t>(std::floor(idx));
        std::size_t hi = static_cast<std::size_t>(std::ceil(idx));
        double frac = idx - static_cast<double>(lo);
        return stats[lo] + frac * (stats[hi] - stats[lo]);
    };
    double alpha = 1.0 - level;
    ci.lo = quantile(0.5 * alpha);
    ci.hi = quantile(1.0 - 0.5 * alpha);
    return ci;
}

std::vector<RocPoint> roc_points(const ScoredSet& s) {
    validate_scored(s);
    auto [pos, neg] = class_counts(s);
    if (pos == 0 || neg == 0)
        throw ComputeError("roc_points: a single class is present");
    std::vector<std::size_t> order(s.scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.scores[a] > s.scores[b];
    });
    std::vector<RocPoint> pts;
    pts.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    double tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && s.scores[order[j]] == s.scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t) (s.labels[order[t]] ? tp : fp) += 1.0;
        pts.push_back({fp / static_cast<double>(neg), tp / static_cast<double>(pos),
                       s.scores[order[i]]});
        i = j;
    }
    return pts;
}

std::vector<PrPoint> pr_points(const ScoredSet& s) {
    validate_scored(s);
    auto [pos, neg] = class_counts(s);
    (void)neg;
    if (pos == 0) throw ComputeError("pr_points: no positives");
    std::vector<std::size_t> order(s.scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.scores[a] > s.scores[b];
    });
    std::vector<PrPoint> pts;
    double tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && s.scores[order[j]] == s.scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t) (s.labels[order[t]] ? tp : fp) += 1.0;
        pts.push_back({tp / static_cast<double>(pos), tp / (tp + fp),
                       s.scores[order[i]]});
        i = j;
    }
    return pts;
}

namespace {

// Stratified assignment: shuffle each class, deal round-robin.
std::vector<int> stratified_folds(const std::vector<FeatureSequence>& sequences,
                                  int k, Rng rng) {
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < sequences.size(); ++i)
        (sequences[i].label ? pos_idx : neg_idx).push_back(i);
    if (static_cast<int>(pos_idx.size()) < k || static_cast<int>(neg_idx.size()) < k)
        throw InputError("kfold_cv: stratification infeasible, need >= " +
                         std::to_string(k) + " samples per class");
    std::vector<int> fold_of(sequences.size(), -1);
    rng.shuffle(pos_idx);
    rng.shuffle(neg_idx);
    for (std::size_t i = 0; i < pos_idx.size(); ++i)
        fold_of[pos_idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < neg_idx.size(); ++i)
        fold_of[neg_idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    return fold_of;
}

struct FoldOutput {
    FoldDetail detail;
    std::vector<std::pair<std::size_t, double>> scores;  // (sample idx, score)
};

}  // namespace

MetricsReport kfold_cv(const std::vector<FeatureSequence>& sequences,
                       const CvConfig& config) {
    if (config.folds < 2) throw InputError("kfold_cv: folds must be >= 2");
    Rng master(config.master_seed);
    std::vector<int> fold_of =
        stratified_folds(sequences, config.folds, master.derive(rng_tag::kFoldSplit));

    std::vector<FlatSample> flats;
    flats.reserve(sequences.size());
    for (const auto& seq : sequences) flats.push_back(flatten(seq));

    auto run_fold = [&](int f) {
        FoldOutput out;
        out.detail.fold = f;

        std::vector<std::size_t> train_idx, val_idx;
        for (std::size_t i = 0; i < flats.size(); ++i)
            (fold_of[i] == f ? val_idx : train_idx).push_back(i);
        out.detail.n_train = train_idx.size();
        out.detail.n_val = val_idx.size();
        for (std::size_t i : val_idx)
            out.detail.val_subjects.push_back(flats[i].subject_id);

        // Inner stratified split of the training portion: 1/5 (at least
        // one per class) is held for early stopping, the rest is
        // resampled and trained on.
        std::vector<std::size_t> tr_pos, tr_neg;
        for (std::size_t i : train_idx)
            (flats[i].label ? tr_pos : tr_neg).push_back(i);
        if (tr_pos.empty() || tr_neg.empty())
            throw ComputeError("kfold_cv: fold training portion is single-class");
        Rng inner_rng = master.derive(rng_tag::kInnerSplit)
                            .derive(static_cast<std::uint64_t>(f));
        inner_rng.shuffle(tr_pos);
        inner_rng.shuffle(tr_neg);
        std::vector<FlatSample> inner_train, inner_val;
        if (tr_pos.size() >= 2 && tr_neg.size() >= 2) {
            auto take = [](std::size_t n) { return std::max<std::size_t>(1, n / 5); };
            std::size_t n_val_pos = take(tr_pos.size());
            std::size_t n_val_neg = take(tr_neg.size());
            for (std::size_t i = 0; i < tr_pos.size(); ++i)
                (i < n_val_pos ? inner_val : inner_train).push_back(flats[tr_pos[i]]);
            for (std::size_t i = 0; i < tr_neg.size(); ++i)
                (i < n_val_neg ? inner_val : inner_train).push_back(flats[tr_neg[i]]);
        } else {
            // Too few samples to carve out an early-stopping set; reuse
            // the training portion (still disjoint from the held-out
            // fold).
            for (std::size_t i : tr_pos) inner_train.push_back(flats[i]);
            for (std::size_t i : tr_neg) inner_train.push_back(flats[i]);
            inner_val = inner_train;
        }
        for (const auto& s : inner_train)
            out.detail.resample_subjects.push_back(s.subject_id);

        Rng res_rng = master.derive(rng_tag::kResample)
                          .derive(static_cast<std::uint64_t>(f));
        std::uint64_t smote_seed = res_rng.next_u64();
        std::uint64_t down_seed = res_rng.next_u64();
        auto smoted = smotenc(inner_train, config.resample.k_neighbors,
                              config.resample.smote_ratio, smote_seed);
        auto balanced = downsample_majority(
            smoted.samples, config.resample.downsample_ratio, down_seed);
        out.detail.n_train_resampled = balanced.size();

        TrainConfig tc = config.train;
        tc.master_seed = master.derive(rng_tag::kFoldTrain)
                             .derive(static_cast<std::uint64_t>(f))
                             .next_u64();
        TrainResult trained = train(balanced, inner_val, tc);
        out.detail.selected_epoch = trained.history.selected_epoch;

        ScoredSet fold_scored;
        for (std::size_t i : val_idx) {
            double p = lstm_forward(trained.params, flats[i]);
            out.scores.emplace_back(i, p);
            fold_scored.scores.push_back(p);
            fold_scored.labels.push_back(flats[i].label ? 1 : 0);
        }
        out.detail.fold_auroc = auroc(fold_scored);
        out.detail.fold_auprc = auprc(fold_scored);
        out.detail.fold_brier = brier(fold_scored);
        return out;
    };

    // Folds are independent; run them on a small pool. Results are merged
    // in fold order, so the report does not depend on scheduling.
    std::vector<FoldOutput> outputs(static_cast<std::size_t>(config.folds));
    unsigned n_threads = config.threads > 0
                             ? static_cast<unsigned>(config.threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(config.folds));
    if (n_threads <= 1) {
        for (int f = 0; f < config.folds; ++f)
            outputs[static_cast<std::size_t>(f)] = run_fold(f);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    int f;
                    while ((f = next.fetch_add(1)) < config.folds)
                        outputs[static_cast<std::size_t>(f)] = run_fold(f);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    MetricsReport report;
    report.config = config;
    report.pooled.scores.assign(sequences.size(), 0.0);
    report.pooled.labels.assign(sequences.size(), 0);
    for (auto& out : outputs) {
        for (auto& [idx, score] : out.scores) {
            report.pooled.scores[idx] = score;
            report.pooled.labels[idx] = sequences[idx].label ? 1 : 0;
        }
        report.folds.push_back(std::move(out.detail));
    }

    report.auroc_point = auroc(report.pooled);
    report.auprc_point = auprc(report.pooled);
    report.brier_point = brier(report.pooled);
    std::uint64_t boot_seed = master.derive(rng_tag::kBootstrap).next_u64();
    report.auroc_ci = bootstrap_ci([](const ScoredSet& s) { return auroc(s); },
                                   report.pooled, config.bootstrap_b,
                                   config.ci_level, boot_seed);
    report.auprc_ci = bootstrap_ci([](const ScoredSet& s) { return auprc(s); },
                                   report.pooled, config.bootstrap_b,
                                   config.ci_level, boot_seed ^ 0x5bd1e995u);
    return report;
}

}  // namespace delirisk
