#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "delirisk/eval.hpp"
#include "delirisk/features.hpp"
#include "delirisk/lstm.hpp"
#include "delirisk/rng.hpp"
#include "delirisk/stats.hpp"
#include "delirisk/survival.hpp"

using namespace delirisk;

namespace {

std::vector<SurvivalObservation> survival_data(std::size_t n) {
    Rng rng(7);
    std::vector<SurvivalObservation> obs;
    obs.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        obs.push_back({rng.exponential(12.0), rng.bernoulli(0.6)});
    return obs;
}

ScoredSet scored_data(std::size_t n) {
    Rng rng(11);
    ScoredSet s;
    for (std::size_t i = 0; i < n; ++i) {
        int label = rng.bernoulli(0.3) ? 1 : 0;
        s.scores.push_back(label ? 0.3 + 0.7 * rng.uniform() : 0.7 * rng.uniform());
        s.labels.push_back(label);
    }
    return s;
}

FlatSample lstm_sample(std::size_t steps) {
    Rng rng(3);
    FlatSample s;
    s.subject_id = "b";
    s.label = true;
    s.mask_len = steps;
    s.values.assign(steps * kFeatureDim, 0.0);
    for (auto& v : s.values) v = rng.uniform();
    return s;
}

std::vector<FlatSample> smote_data(std::size_t n) {
    Rng rng(5);
    std::vector<FlatSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        FlatSample s = lstm_sample(8);
        s.subject_id = "s" + std::to_string(i);
        s.label = i < n / 3;
        for (auto& v : s.values) v = std::floor(rng.uniform() * 20.0);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

static void BM_KmFit(benchmark::State& state) {
    auto obs = survival_data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto curve = km_fit(obs);
        benchmark::DoNotOptimize(curve);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KmFit)->Range(1 << 10, 1 << 16)->Complexity();

static void BM_LogRank(benchmark::State& state) {
    auto a = survival_data(static_cast<std::size_t>(state.range(0)));
    auto b = survival_data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto r = logrank_test(a, b);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_LogRank)->Range(1 << 10, 1 << 15);

static void BM_Chi2Sf(benchmark::State& state) {
    double x = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(chi2_sf(x, 1));
        x = x < 30.0 ? x + 0.1 : 0.1;
    }
}
BENCHMARK(BM_Chi2Sf);

static void BM_Auroc(benchmark::State& state) {
    auto s = scored_data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(auroc(s));
}
BENCHMARK(BM_Auroc)->Range(1 << 10, 1 << 16);

static void BM_LstmForward(benchmark::State& state) {
    Rng rng(1);
    auto params = LstmParams::init(32, static_cast<int>(kFeatureDim), rng);
    auto sample = lstm_sample(8);
    for (auto _ : state) benchmark::DoNotOptimize(lstm_forward(params, sample));
}
BENCHMARK(BM_LstmForward);

static void BM_LstmBackward(benchmark::State& state) {
    Rng rng(1);
    auto params = LstmParams::init(32, static_cast<int>(kFeatureDim), rng);
    std::vector<FlatSample> batch_data;
    for (int i = 0; i < 32; ++i) batch_data.push_back(lstm_sample(8));
    std::vector<const FlatSample*> batch;
    for (const auto& s : batch_data) batch.push_back(&s);
    for (auto _ : state) {
        auto grad = lstm_backward(params, batch, {}, 0.0);
        benchmark::DoNotOptimize(grad);
    }
}
BENCHMARK(BM_LstmBackward);

static void BM_Smotenc(benchmark::State& state) {
    auto samples = smote_data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto r = smotenc(samples, 5, 1.0, 9);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_Smotenc)->Range(1 << 7, 1 << 10);

BENCHMARK_MAIN();
