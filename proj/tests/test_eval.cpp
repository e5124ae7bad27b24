#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "delirisk/errors.hpp"
#include "delirisk/eval.hpp"
#include "delirisk/rng.hpp"
#include "oracles.hpp"

using namespace delirisk;

TEST_CASE("auroc: worked examples") {
    CHECK(auroc({{0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}}) == doctest::Approx(0.75));
    CHECK(auroc({{0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}}) == doctest::Approx(0.5));
    CHECK(auroc({{0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(auroc({{0.1, 0.2}, {1, 1}}), ComputeError);
    CHECK_THROWS_AS(auroc({{}, {}}), ComputeError);
}

TEST_CASE("auroc equals exhaustive pair counting") {
    Rng rng(100);
    for (int trial = 0; trial < 400; ++trial) {
        std::size_t n = 2 + rng.uniform_int(30);
        ScoredSet s;
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            s.scores.push_back(std::floor(rng.uniform() * 8.0) / 8.0);  // ties likely
            int l = rng.bernoulli(0.4) ? 1 : 0;
            s.labels.push_back(l);
            (l ? pos : neg) = true;
        }
        if (!pos || !neg) continue;
        double expected = oracle::auroc_pairs(s.scores, s.labels);
        CHECK(auroc(s) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("auroc: invariant under strictly increasing transforms") {
    Rng rng(101);
    ScoredSet s;
    for (int i = 0; i < 50; ++i) {
        s.scores.push_back(rng.uniform());
        s.labels.push_back(i % 3 == 0 ? 1 : 0);
    }
    double base = auroc(s);
    ScoredSet warped = s;
    for (auto& x : warped.scores) x = std::exp(3.0 * x);
    CHECK(auroc(warped) == base);
}

TEST_CASE("auroc: score negation flips the ranking") {
    Rng rng(102);
    ScoredSet s;
    std::set<double> used;
    for (int i = 0; i < 40; ++i) {
        double x;
        do {
            x = rng.uniform();
        } while (used.count(x));
        used.insert(x);
        s.scores.push_back(x);
        s.labels.push_back(i % 4 == 0 ? 1 : 0);
    }
    ScoredSet negated = s;
    for (auto& x : negated.scores) x = -x;
    CHECK(auroc(negated) == doctest::Approx(1.0 - auroc(s)).epsilon(1e-12));
}

TEST_CASE("auprc: worked examples") {
    CHECK(auprc({{0.9, 0.1}, {1, 0}}) == doctest::Approx(1.0));
    CHECK(auprc({{0.9, 0.1}, {0, 1}}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(auprc({{0.9, 0.1}, {0, 0}}), ComputeError);
}

TEST_CASE("auprc equals the threshold-stepped reference on small sets") {
    Rng rng(103);
    const double grid[4] = {0.2, 0.4, 0.6, 0.8};
    for (std::size_t n = 2; n <= 8; ++n) {
        for (int rep = 0; rep < 30; ++rep) {
            std::vector<double> scores(n);
            for (auto& x : scores) x = grid[rng.uniform_int(4)];
            // Every label pattern with at least one positive.
            for (unsigned mask = 1; mask < (1u << n); ++mask) {
                ScoredSet s;
                s.scores = scores;
                for (std::size_t i = 0; i < n; ++i)
                    s.labels.push_back((mask >> i) & 1u);
                double expected = oracle::average_precision_stepped(s.scores, s.labels);
                CHECK(auprc(s) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("auprc: random scores land near prevalence") {
    Rng rng(104);
    ScoredSet s;
    const double prevalence = 0.3;
    for (int i = 0; i < 10000; ++i) {
        s.scores.push_back(rng.uniform());
        s.labels.push_back(rng.bernoulli(prevalence) ? 1 : 0);
    }
    CHECK(auprc(s) == doctest::Approx(prevalence).epsilon(0.17));
}

TEST_CASE("brier: hand cases and prevalence minimum") {
    CHECK(brier({{1.0, 0.0, 1.0}, {1, 0, 1}}) == 0.0);
    CHECK(brier({{0.5, 0.5}, {0, 1}}) == doctest::Approx(0.25));
    CHECK(brier({{0.8, 0.3}, {1, 0}}) == doctest::Approx(0.065).epsilon(1e-12));
    CHECK_THROWS_AS(brier({{1.2}, {1}}), ComputeError);

    ScoredSet s;
    for (int i = 0; i < 10; ++i) {
        s.scores.push_back(0.0);
        s.labels.push_back(i < 3 ? 1 : 0);
    }
    double best = 1e9;
    double best_c = -1.0;
    for (int ci = 0; ci <= 100; ++ci) {
        double c = 0.01 * ci;
        ScoredSet constant = s;
        for (auto& x : constant.scores) x = c;
        double b = brier(constant);
        if (b < best) {
            best = b;
            best_c = c;
        }
    }
    CHECK(best_c == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("bootstrap_ci: constant metric collapses to the point") {
    ScoredSet s{{0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}};
    auto ci = bootstrap_ci([](const ScoredSet&) { return 0.42; }, s, 200, 0.95, 1);
    CHECK(ci.lo == 0.42);
    CHECK(ci.hi == 0.42);
}

TEST_CASE("bootstrap_ci: covers the point estimate across seeds") {
    Rng rng(105);
    ScoredSet s;
    for (int i = 0; i < 120; ++i) {
        int label = rng.bernoulli(0.4) ? 1 : 0;
        double score = label ? 0.3 + 0.7 * rng.uniform() : 0.6 * rng.uniform();
        s.scores.push_back(score);
        s.labels.push_back(label);
    }
    double point = auroc(s);
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto ci = bootstrap_ci([](const ScoredSet& x) { return auroc(x); }, s, 300,
                               0.95, seed);
        if (ci.lo <= point && point <= ci.hi) ++covered;
    }
    CHECK(covered >= 50 * 99 / 100);
}

TEST_CASE("bootstrap_ci: interval narrows with sample size") {
    auto make = [](int n, std::uint64_t seed) {
        Rng rng(seed);
        ScoredSet s;
        for (int i = 0; i < n; ++i) {
            int label = rng.bernoulli(0.5) ? 1 : 0;
            s.scores.push_back(label ? 0.4 + 0.6 * rng.uniform() : 0.6 * rng.uniform());
            s.labels.push_back(label);
        }
        return s;
    };
    auto metric = [](const ScoredSet& x) { return auroc(x); };
    auto small = bootstrap_ci(metric, make(50, 1), 400, 0.95, 2);
    auto large = bootstrap_ci(metric, make(5000, 1), 400, 0.95, 2);
    CHECK(large.hi - large.lo < small.hi - small.lo);
}

TEST_CASE("roc and pr point sequences are well-formed") {
    ScoredSet s{{0.9, 0.7, 0.7, 0.4, 0.2}, {1, 1, 0, 0, 0}};
    auto roc = roc_points(s);
    CHECK(roc.front().fpr == 0.0);
    CHECK(roc.front().tpr == 0.0);
    CHECK(roc.back().fpr == 1.0);
    CHECK(roc.back().tpr == 1.0);
    for (std::size_t i = 1; i < roc.size(); ++i) {
        CHECK(roc[i].fpr >= roc[i - 1].fpr);
        CHECK(roc[i].tpr >= roc[i - 1].tpr);
    }
    auto pr = pr_points(s);
    CHECK(pr.front().precision == doctest::Approx(1.0));
    CHECK(pr.back().recall == doctest::Approx(1.0));
}

namespace {

// Small separable sequence set for harness tests.
std::vector<FeatureSequence> toy_sequences(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<FeatureSequence> out;
    for (int i = 0; i < n; ++i) {
        FeatureSequence seq;
        seq.subject_id = "t" + std::to_string(i);
        seq.label = i % 2 == 0;
        seq.steps.assign(3, FeatureVector{});
        seq.mask_len = 1 + rng.uniform_int(3);
        for (std::size_t t = 3 - seq.mask_len; t < 3; ++t) {
            auto& v = seq.steps[t];
            v[kSlotAge] = seq.label ? 86.0 + 4.0 * rng.uniform()
                                    : 70.0 + 4.0 * rng.uniform();
            v[kSlotGender] = rng.bernoulli(0.5) ? 1.0 : 0.0;
            v[kSlotDxCount] = std::floor(5.0 * rng.uniform());
            v[kSlotCci] = seq.label ? 5.0 : 1.0;
        }
        out.push_back(std::move(seq));
    }
    return out;
}

CvConfig toy_config() {
    CvConfig cfg;
    cfg.folds = 3;
    cfg.resample.k_neighbors = 2;
    cfg.train.hidden_size = 4;
    cfg.train.epochs = 4;
    cfg.train.batch_size = 8;
    cfg.bootstrap_b = 50;
    cfg.master_seed = 9;
    cfg.threads = 1;
    return cfg;
}

}  // namespace

TEST_CASE("kfold_cv: stratification, partition and no leakage") {
    auto sequences = toy_sequences(36, 1);
    auto cfg = toy_config();
    auto report = kfold_cv(sequences, cfg);

    REQUIRE(report.folds.size() == 3);
    std::set<std::string> seen;
    for (const auto& fold : report.folds) {
        // Balanced input: stratified folds stay balanced within 1.
        long long pos = 0;
        for (const auto& id : fold.val_subjects) {
            seen.insert(id);
            int idx = std::stoi(id.substr(1));
            pos += idx % 2 == 0 ? 1 : 0;
        }
        CHECK(std::llabs(2 * pos - static_cast<long long>(fold.val_subjects.size())) <=
              1);
        // Resampling never saw the held-out fold.
        for (const auto& id : fold.resample_subjects)
            CHECK(std::find(fold.val_subjects.begin(), fold.val_subjects.end(), id) ==
                  fold.val_subjects.end());
    }
    CHECK(seen.size() == sequences.size());

    CHECK(report.pooled.scores.size() == sequences.size());
    CHECK(report.auroc_point >= 0.0);
    CHECK(report.auroc_point <= 1.0);
    CHECK(report.auroc_ci.lo <= report.auroc_point);
    CHECK(report.auroc_point <= report.auroc_ci.hi);
    CHECK(report.auprc_ci.lo <= report.auprc_point);
    CHECK(report.auprc_point <= report.auprc_ci.hi);
}

TEST_CASE("kfold_cv: four balanced samples, two folds") {
    auto sequences = toy_sequences(4, 2);
    CvConfig cfg = toy_config();
    cfg.folds = 2;
    cfg.resample.k_neighbors = 1;
    cfg.train.epochs = 1;
    cfg.bootstrap_b = 10;
    auto report = kfold_cv(sequences, cfg);
    for (const auto& fold : report.folds) {
        CHECK(fold.val_subjects.size() == 2);
        int pos = 0;
        for (const auto& id : fold.val_subjects)
            pos += std::stoi(id.substr(1)) % 2 == 0 ? 1 : 0;
        CHECK(pos == 1);
    }
}

TEST_CASE("kfold_cv: deterministic and thread-invariant") {
    auto sequences = toy_sequences(30, 3);
    auto cfg = toy_config();
    auto a = kfold_cv(sequences, cfg);
    auto b = kfold_cv(sequences, cfg);
    CHECK(a.pooled.scores == b.pooled.scores);
    CHECK(a.auroc_point == b.auroc_point);
    CHECK(a.auroc_ci.lo == b.auroc_ci.lo);

    cfg.threads = 3;
    auto c = kfold_cv(sequences, cfg);
    CHECK(a.pooled.scores == c.pooled.scores);
    CHECK(a.auprc_point == c.auprc_point);
    for (std::size_t f = 0; f < a.folds.size(); ++f) {
        CHECK(a.folds[f].fold_auroc == c.folds[f].fold_auroc);
        CHECK(a.folds[f].fold_brier == c.folds[f].fold_brier);
    }
}

TEST_CASE("kfold_cv: infeasible stratification is rejected") {
    auto sequences = toy_sequences(8, 4);
    CvConfig cfg = toy_config();
    cfg.folds = 5;  // only 4 per class
    CHECK_THROWS_AS(kfold_cv(sequences, cfg), InputError);
}
