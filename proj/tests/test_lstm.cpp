#include <doctest.h>

#include <cmath>

#include "delirisk/errors.hpp"
#include "delirisk/eval.hpp"
#include "delirisk/lstm.hpp"
#include "delirisk/rng.hpp"

using namespace delirisk;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

FlatSample sample_with(std::vector<std::vector<double>> real_steps,
                       std::size_t total_steps, bool label,
                       const std::string& id = "s") {
    FlatSample s;
    s.subject_id = id;
    s.label = label;
    s.mask_len = real_steps.size();
    s.values.assign(total_steps * kFeatureDim, 0.0);
    std::size_t start = total_steps - real_steps.size();
    for (std::size_t t = 0; t < real_steps.size(); ++t)
        for (std::size_t d = 0; d < kFeatureDim && d < real_steps[t].size(); ++d)
            s.values[(start + t) * kFeatureDim + d] = real_steps[t][d];
    return s;
}

FlatSample random_sample(Rng& rng, std::size_t total, std::size_t real, bool label) {
    std::vector<std::vector<double>> steps(real, std::vector<double>(kFeatureDim));
    for (auto& step : steps)
        for (auto& v : step) v = 2.0 * rng.uniform() - 1.0;
    return sample_with(std::move(steps), total, label);
}

}  // namespace

TEST_CASE("forward: all-zero parameters always emit one half") {
    auto params = LstmParams::zeros(4);
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        auto s = random_sample(rng, 5, 1 + rng.uniform_int(5), rng.bernoulli(0.5));
        CHECK(lstm_forward(params, s) == 0.5);
    }
}

TEST_CASE("forward: single-cell trace reproduces the closed form") {
    auto params = LstmParams::zeros(1);
    const double big = 20.0;
    params.b(0)[0] = big;                 // input gate ~ 1
    params.b(2)[0] = std::atanh(0.5);     // cell candidate = 0.5
    params.b(3)[0] = big;                 // output gate ~ 1
    params.w_out()[0] = 1.0;

    auto s = sample_with({{0.3, 1.0, 2.0}}, 1, true);
    double i = sigmoid(big);
    double g = 0.5;
    double h = sigmoid(big) * std::tanh(i * g);
    double expected = sigmoid(h);
    CHECK(lstm_forward(params, s) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("forward: padded steps change nothing") {
    Rng rng(7);
    auto params = LstmParams::init(3, static_cast<int>(kFeatureDim), rng);
    std::vector<std::vector<double>> steps(2, std::vector<double>(kFeatureDim));
    for (auto& st : steps)
        for (auto& v : st) v = rng.uniform();
    auto padded = sample_with(steps, 6, true);
    auto tight = sample_with(steps, 2, true);
    CHECK(lstm_forward(params, padded) == lstm_forward(params, tight));

    auto more_padding = sample_with(steps, 7, true);
    CHECK(lstm_forward(params, padded) == lstm_forward(params, more_padding));
}

TEST_CASE("forward: output stays inside (0,1) for wild inputs") {
    Rng rng(13);
    auto params = LstmParams::init(4, static_cast<int>(kFeatureDim), rng);
    for (auto& v : params.theta) v *= 50.0;
    for (int i = 0; i < 20; ++i) {
        auto s = random_sample(rng, 4, 4, true);
        for (auto& v : s.values) v *= 1e3;
        double p = lstm_forward(params, s);
        CHECK(std::isfinite(p));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("forward: rejects width and mask violations") {
    auto params = LstmParams::zeros(2);
    FlatSample s;
    s.values.assign(kFeatureDim, 0.0);
    s.mask_len = 0;
    CHECK_THROWS_AS(lstm_forward(params, s), ComputeError);
    s.mask_len = 2;
    CHECK_THROWS_AS(lstm_forward(params, s), ComputeError);
}

TEST_CASE("bce_loss: hand values") {
    CHECK(bce_loss(0.5, true) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(0.5, false) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(0.25, true) == doctest::Approx(1.3862943611).epsilon(1e-9));
    CHECK(bce_loss(1.0 - 1e-15, true) < 1e-11);
    CHECK(bce_loss(1.0, true) < 1e-11);  // clamped, still finite
    CHECK(std::isfinite(bce_loss(0.0, true)));
}

TEST_CASE("backward: head at its optimum has zero head/body gradients") {
    Rng rng(3);
    auto params = LstmParams::init(3, static_cast<int>(kFeatureDim), rng);
    for (int j = 0; j < params.hidden; ++j) params.w_out()[j] = 0.0;
    params.b_out() = 0.0;  // sigmoid(0) = mean label of a balanced batch

    auto a = random_sample(rng, 3, 2, true);
    auto b = random_sample(rng, 3, 3, false);
    std::vector<const FlatSample*> batch{&a, &b};
    auto grad = lstm_backward(params, batch, {}, 0.0);

    // Every parameter except the dense weights sees zero gradient, and
    // the dense bias is stationary because sigma(b)=mean(y).
    std::size_t wout_begin = params.size() - params.hidden - 1;
    for (std::size_t i = 0; i < wout_begin; ++i)
        CHECK(grad[i] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(grad[params.size() - 1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("backward: duplicating the batch leaves the mean gradient alone") {
    Rng rng(17);
    auto params = LstmParams::init(4, static_cast<int>(kFeatureDim), rng);
    auto a = random_sample(rng, 4, 2, true);
    auto b = random_sample(rng, 4, 4, false);
    std::vector<const FlatSample*> batch{&a, &b};
    std::vector<const FlatSample*> doubled{&a, &b, &a, &b};
    auto g1 = lstm_backward(params, batch, {}, 0.0);
    auto g2 = lstm_backward(params, doubled, {}, 0.0);
    for (std::size_t i = 0; i < g1.size(); ++i)
        CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12));
}

TEST_CASE("backward: gradients are identical with and without padding") {
    Rng rng(23);
    auto params = LstmParams::init(3, static_cast<int>(kFeatureDim), rng);
    std::vector<std::vector<double>> steps(2, std::vector<double>(kFeatureDim));
    for (auto& st : steps)
        for (auto& v : st) v = rng.uniform();
    auto padded = sample_with(steps, 6, true);
    auto tight = sample_with(steps, 2, true);
    std::vector<const FlatSample*> b1{&padded}, b2{&tight};
    auto g1 = lstm_backward(params, b1, {}, 0.0);
    auto g2 = lstm_backward(params, b2, {}, 0.0);
    CHECK(g1 == g2);
}

TEST_CASE("grad_check: analytic matches central differences") {
    Rng rng(0);
    for (int hidden : {1, 3}) {
        for (std::size_t len : {1u, 4u}) {
            auto params = LstmParams::init(hidden, static_cast<int>(kFeatureDim), rng);
            auto s = random_sample(rng, len, len, rng.bernoulli(0.5));
            CHECK(grad_check(params, s) < 1e-4);
        }
    }
}

TEST_CASE("grad_check: halving eps keeps the error second-order small") {
    Rng rng(42);
    auto params = LstmParams::init(3, static_cast<int>(kFeatureDim), rng);
    auto s = random_sample(rng, 4, 4, true);
    double e1 = grad_check(params, s, 1e-5);
    double e2 = grad_check(params, s, 5e-6);
    CHECK(e2 < 4.0 * e1 + 1e-7);
}

TEST_CASE("grad_check: rejects empty effective sequences") {
    auto params = LstmParams::zeros(2);
    FlatSample s;
    s.values.assign(2 * kFeatureDim, 0.0);
    s.mask_len = 0;
    CHECK_THROWS_AS(grad_check(params, s), ComputeError);
}

namespace {

// Linearly separable toy problem: positives have high first-slot values.
std::vector<FlatSample> separable(Rng& rng, int n, std::size_t steps) {
    std::vector<FlatSample> out;
    for (int i = 0; i < n; ++i) {
        bool label = i % 2 == 0;
        std::size_t real = 1 + rng.uniform_int(steps);
        std::vector<std::vector<double>> sv(real, std::vector<double>(kFeatureDim));
        for (auto& st : sv) {
            st[kSlotAge] = label ? 85.0 + 5.0 * rng.uniform()
                                 : 70.0 + 5.0 * rng.uniform();
            st[kSlotGender] = rng.bernoulli(0.5);
            st[kSlotDxCount] = std::floor(6.0 * rng.uniform());
            st[kSlotCci] = label ? 6.0 : 1.0;
        }
        out.push_back(sample_with(std::move(sv), steps, label,
                                  "t" + std::to_string(i)));
    }
    return out;
}

}  // namespace

TEST_CASE("train: learns a separable problem and is deterministic") {
    Rng rng(55);
    auto train_set = separable(rng, 60, 3);
    auto val_set = separable(rng, 24, 3);

    TrainConfig cfg;
    cfg.hidden_size = 8;
    cfg.epochs = 50;
    cfg.batch_size = 16;
    cfg.master_seed = 7;

    auto r1 = train(train_set, val_set, cfg);
    CHECK(r1.history.val_metric_is_auroc);
    double best = r1.history.val_metric[r1.history.selected_epoch];
    CHECK(best >= 0.95);
    // The selected epoch is the argmax of the validation metric.
    for (double m : r1.history.val_metric) CHECK(best >= m);

    auto r2 = train(train_set, val_set, cfg);
    CHECK(r1.params.theta == r2.params.theta);
    CHECK(r1.history.train_loss == r2.history.train_loss);
    CHECK(r1.history.val_metric == r2.history.val_metric);
    CHECK(r1.history.selected_epoch == r2.history.selected_epoch);
}

TEST_CASE("train: loss decreases on the separable set without dropout") {
    Rng rng(56);
    auto train_set = separable(rng, 40, 2);
    auto val_set = separable(rng, 20, 2);
    TrainConfig cfg;
    cfg.hidden_size = 4;
    cfg.dropout_rate = 0.0;
    cfg.epochs = 30;
    cfg.early_stopping_patience = 30;
    cfg.master_seed = 11;
    auto r = train(train_set, val_set, cfg);
    CHECK(r.history.train_loss.back() < r.history.train_loss.front());
}

TEST_CASE("train: single-class validation falls back to loss with a warning") {
    Rng rng(57);
    auto train_set = separable(rng, 30, 2);
    std::vector<FlatSample> val_set;
    for (int i = 0; i < 6; ++i) val_set.push_back(train_set[2 * i]);  // all positive
    TrainConfig cfg;
    cfg.hidden_size = 4;
    cfg.epochs = 3;
    auto r = train(train_set, val_set, cfg);
    CHECK_FALSE(r.history.val_metric_is_auroc);
    REQUIRE_FALSE(r.warnings.empty());
}

TEST_CASE("train: invalid configs rejected") {
    Rng rng(58);
    auto data = separable(rng, 10, 2);
    TrainConfig cfg;
    cfg.dropout_rate = 1.0;
    CHECK_THROWS_AS(train(data, data, cfg), InputError);
    cfg = TrainConfig{};
    cfg.epochs = 0;
    CHECK_THROWS_AS(train(data, data, cfg), InputError);
    cfg = TrainConfig{};
    CHECK_THROWS_AS(train({}, data, cfg), InputError);
}

TEST_CASE("checkpoint: bitwise round trip") {
    Rng rng(60);
    auto params = LstmParams::init(5, static_cast<int>(kFeatureDim), rng);
    params.input_offset[0] = 79.31;
    params.input_scale[0] = 6.77;
    std::string path = "/tmp/delirisk-ckpt-test.txt";
    save_params(params, path, "round-trip check");
    auto loaded = load_params(path);
    CHECK(loaded.hidden == params.hidden);
    CHECK(loaded.input == params.input);
    CHECK(loaded.theta == params.theta);
    CHECK(loaded.input_offset == params.input_offset);
    CHECK(loaded.input_scale == params.input_scale);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_params("/tmp/does-not-exist-ckpt.txt"), InputError);
}
