#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "delirisk/features.hpp"
#include "delirisk/rng.hpp"

namespace delirisk {

/// Single-layer LSTM with a dropout layer on the final hidden state and a
/// sigmoid dense head. All trainable parameters live in one contiguous
/// vector with the layout
///   [W_i W_f W_g W_o | U_i U_f U_g U_o | b_i b_f b_g b_o | w_out b_out]
/// where each W_* is hidden x input (row-major), each U_* hidden x hidden
/// and each b_* hidden. The input standardization (offset/scale per input
/// dimension, nominal dimensions untouched) is part of the model but not
/// trained.
struct LstmParams {
    int hidden = 0;
    int input = 0;
    std::vector<double> theta;
    std::vector<double> input_offset;  // size = input
    std::vector<double> input_scale;   // size = input, strictly positive

    static LstmParams zeros(int hidden, int input = static_cast<int>(kFeatureDim));
    /// Uniform(-s, s) with s = 1/sqrt(hidden), then forget-gate biases
    /// set to 1. Draw order follows the theta layout.
    static LstmParams init(int hidden, int input, Rng& rng);

    std::size_t size() const { return theta.size(); }

    // Gate order: 0 = input, 1 = forget, 2 = cell, 3 = output.
    double* W(int gate);
    const double* W(int gate) const;
    double* U(int gate);
    const double* U(int gate) const;
    double* b(int gate);
    const double* b(int gate) const;
    double* w_out();
    const double* w_out() const;
    double& b_out();
    double b_out() const;
};

/// Checkpoint I/O. Text format with hex-float values; round-trips
/// bitwise. A non-empty comment is stored as a leading '#' line.
void save_params(const LstmParams& params, const std::string& path,
                 const std::string& comment = "");
LstmParams load_params(const std::string& path);

struct TrainConfig {
    int hidden_size = 32;
    double dropout_rate = 0.2;
    double learning_rate = 1e-3;
    int epochs = 50;
    int batch_size = 32;
    int early_stopping_patience = 5;
    std::uint64_t master_seed = 42;
};

struct TrainHistory {
    std::vector<double> train_loss;  // per epoch, mean sample loss
    std::vector<double> val_metric;  // per epoch
    bool val_metric_is_auroc = true;  // false: fell back to val loss
    int selected_epoch = 0;           // 0-based index into the vectors
};

/// Forward pass on one flattened sample. Padded steps leave the hidden
/// and cell state untouched. `dropout_mask` (size hidden, entries 0/1)
/// enables inverted dropout on the readout; pass nullptr for inference.
/// Returns the event probability.
double lstm_forward(const LstmParams& params, const FlatSample& sample,
                    const double* dropout_mask = nullptr, double dropout_rate = 0.0);

/// Binary cross-entropy with probabilities clamped at 1e-12.
double bce_loss(double p, bool label);

/// Mean-BCE gradient over a batch, exact backpropagation through time.
/// The returned vector mirrors params.theta. Optional per-sample dropout
/// masks (batch.size() x hidden) must match the forward configuration.
std::vector<double> lstm_backward(const LstmParams& params,
                                  const std::vector<const FlatSample*>& batch,
                                  const std::vector<const double*>& dropout_masks,
                                  double dropout_rate, double* mean_loss = nullptr);

/// Central-difference verification of the analytic gradient on one
/// sample, dropout disabled. Returns the max relative error over all
/// parameters.
double grad_check(const LstmParams& params, const FlatSample& sample,
                  double eps = 1e-5);

struct TrainResult {
    LstmParams params;
    TrainHistory history;
    std::vector<std::string> warnings;
};

/// Adam training with early stopping on the validation AUROC (validation
/// loss when the validation set is single-class). Deterministic for a
/// fixed master_seed.
TrainResult train(const std::vector<FlatSample>& train_set,
                  const std::vector<FlatSample>& val_set, const TrainConfig& config);

}  // namespace delirisk
