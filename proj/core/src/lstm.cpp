#include "delirisk/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "delirisk/errors.hpp"
#include "delirisk/eval.hpp"

namespace delirisk {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t theta_size(int hidden, int input) {
    return 4u * hidden * input + 4u * hidden * hidden + 4u * hidden + hidden + 1u;
}

}  // namespace

LstmParams LstmParams::zeros(int hidden, int input) {
    LstmParams p;
    p.hidden = hidden;
    p.input = input;
    p.theta.assign(theta_size(hidden, input), 0.0);
    p.input_offset.assign(input, 0.0);
    p.input_scale.assign(input, 1.0);
    return p;
}

LstmParams LstmParams::init(int hidden, int input, Rng& rng) {
    LstmParams p = zeros(hidden, input);
    double s = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto& v : p.theta) v = (2.0 * rng.uniform() - 1.0) * s;
    double* bf = p.b(1);
    for (int j = 0; j < hidden; ++j) bf[j] = 1.0;
    return p;
}

double* LstmParams::W(int gate) { return theta.data() + gate * hidden * input; }
const double* LstmParams::W(int gate) const {
    return theta.data() + gate * hidden * input;
}
double* LstmParams::U(int gate) {
    return theta.data() + 4 * hidden * input + gate * hidden * hidden;
}
const double* LstmParams::U(int gate) const {
    return theta.data() + 4 * hidden * input + gate * hidden * hidden;
}
double* LstmParams::b(int gate) {
    return theta.data() + 4 * hidden * input + 4 * hidden * hidden + gate * hidden;
}
const double* LstmParams::b(int gate) const {
    return theta.data() + 4 * hidden * input + 4 * hidden * hidden + gate * hidden;
}
double* LstmParams::w_out() {
    return theta.data() + 4 * hidden * input + 4 * hidden * hidden + 4 * hidden;
}
const double* LstmParams::w_out() const {
    return theta.data() + 4 * hidden * input + 4 * hidden * hidden + 4 * hidden;
}
double& LstmParams::b_out() { return theta.back(); }
double LstmParams::b_out() const { return theta.back(); }

namespace {

// Per-sample forward state kept for backpropagation. R = real steps.
struct ForwardCache {
    int real_steps = 0;
    std::vector<double> xn;                // R x F, standardized inputs
    std::vector<double> gi, gf, gg, go;    // R x H, post-activation gates
    std::vector<double> c, h;              // (R+1) x H, index 0 = initial
    std::vector<double> tc;                // R x H, tanh(c_t)
    double logit = 0.0;
    double prob = 0.5;
};

void forward_cached(const LstmParams& p, const FlatSample& sample,
                    const double* dropout_mask, double dropout_rate,
                    ForwardCache& fc) {
    const int H = p.hidden;
    const int F = p.input;
    const std::size_t total_steps = sample.values.size() / kFeatureDim;
    if (static_cast<int>(kFeatureDim) != F)
        throw ComputeError("lstm: sample width does not match model input width");
    if (sample.mask_len < 1 || sample.mask_len > total_steps)
        throw ComputeError("lstm: mask_len outside [1, steps]");
    const int R = static_cast<int>(sample.mask_len);
    const std::size_t start = total_steps - sample.mask_len;

    fc.real_steps = R;
    fc.xn.assign(static_cast<std::size_t>(R) * F, 0.0);
    fc.gi.assign(static_cast<std::size_t>(R) * H, 0.0);
    fc.gf.assign(static_cast<std::size_t>(R) * H, 0.0);
    fc.gg.assign(static_cast<std::size_t>(R) * H, 0.0);
    fc.go.assign(static_cast<std::size_t>(R) * H, 0.0);
    fc.tc.assign(static_cast<std::size_t>(R) * H, 0.0);
    fc.c.assign(static_cast<std::size_t>(R + 1) * H, 0.0);
    fc.h.assign(static_cast<std::size_t>(R + 1) * H, 0.0);

    for (int r = 0; r < R; ++r) {
        const double* x = sample.values.data() + (start + r) * kFeatureDim;
        double* xn = fc.xn.data() + static_cast<std::size_t>(r) * F;
        for (int d = 0; d < F; ++d) {
            if (!std::isfinite(x[d]))
                throw ComputeError("lstm: non-finite input value");
            xn[d] = (x[d] - p.input_offset[d]) / p.input_scale[d];
        }
        const double* h_prev = fc.h.data() + static_cast<std::size_t>(r) * H;
        const double* c_prev = fc.c.data() + static_cast<std::size_t>(r) * H;
        double* h_next = fc.h.data() + static_cast<std::size_t>(r + 1) * H;
        double* c_next = fc.c.data() + static_cast<std::size_t>(r + 1) * H;
        for (int j = 0; j < H; ++j) {
            double zi = p.b(0)[j], zf = p.b(1)[j], zg = p.b(2)[j], zo = p.b(3)[j];
            const double* wi = p.W(0) + static_cast<std::size_t>(j) * F;
            const double* wf = p.W(1) + static_cast<std::size_t>(j) * F;
            const double* wg = p.W(2) + static_cast<std::size_t>(j) * F;
            const double* wo = p.W(3) + static_cast<std::size_t>(j) * F;
            for (int d = 0; d < F; ++d) {
                double xd = xn[d];
                zi += wi[d] * xd;
                zf += wf[d] * xd;
                zg += wg[d] * xd;
                zo += wo[d] * xd;
            }
            const double* ui = p.U(0) + static_cast<std::size_t>(j) * H;
            const double* uf = p.U(1) + static_cast<std::size_t>(j) * H;
            const double* ug = p.U(2) + static_cast<std::size_t>(j) * H;
            const double* uo = p.U(3) + static_cast<std::size_t>(j) * H;
            for (int k = 0; k < H; ++k) {
                double hk = h_prev[k];
                zi += ui[k] * hk;
                zf += uf[k] * hk;
                zg += ug[k] * hk;
                zo += uo[k] * hk;
            }
            double i = sigmoid(zi);
            double f = sigmoid(zf);
            double g = std::tanh(zg);
            double o = sigmoid(zo);
            double cc = f * c_prev[j] + i * g;
            double tc = std::tanh(cc);
            std::size_t rj = static_cast<std::size_t>(r) * H + j;
            fc.gi[rj] = i;
            fc.gf[rj] = f;
            fc.gg[rj] = g;
            fc.go[rj] = o;
            c_next[j] = cc;
            fc.tc[rj] = tc;
            h_next[j] = o * tc;
        }
    }

    const double* h_last = fc.h.data() + static_cast<std::size_t>(R) * H;
    double keep = 1.0 - dropout_rate;
    double z = p.b_out();
    for (int j = 0; j < H; ++j) {
        double hv = h_last[j];
        if (dropout_mask) hv = hv * dropout_mask[j] / keep;
        z += p.w_out()[j] * hv;
    }
    fc.logit = z;
    fc.prob = sigmoid(z);
}

}  // namespace

double lstm_forward(const LstmParams& params, const FlatSample& sample,
                    const double* dropout_mask, double dropout_rate) {
    ForwardCache fc;
    forward_cached(params, sample, dropout_mask, dropout_rate, fc);
    return fc.prob;
}

double bce_loss(double p, bool label) {
    double q = std::min(1.0 - 1e-12, std::max(1e-12, p));
    return label ? -std::log(q) : -std::log(1.0 - q);
}

std::vector<double> lstm_backward(const LstmParams& params,
                                  const std::vector<const FlatSample*>& batch,
                                  const std::vector<const double*>& dropout_masks,
                                  double dropout_rate, double* mean_loss) {
    if (batch.empty()) throw ComputeError("lstm_backward: empty batch");
    if (!dropout_masks.empty() && dropout_masks.size() != batch.size())
        throw ComputeError("lstm_backward: dropout mask count mismatch");
    const int H = params.hidden;
    const int F = params.input;
    std::vector<double> grad(params.size(), 0.0);
    double loss_sum = 0.0;

    ForwardCache fc;
    std::vector<double> dh(H), dc(H), dh_prev(H);
    std::vector<double> dzi(H), dzf(H), dzg(H), dzo(H);

    const std::size_t w_off = 0;
    const std::size_t u_off = 4u * H * F;
    const std::size_t b_off = u_off + 4u * H * H;
    const std::size_t wout_off = b_off + 4u * H;
    double keep = 1.0 - dropout_rate;

    for (std::size_t s = 0; s < batch.size(); ++s) {
        const FlatSample& sample = *batch[s];
        const double* mask = dropout_masks.empty() ? nullptr : dropout_masks[s];
        forward_cached(params, sample, mask, dropout_rate, fc);
        loss_sum += bce_loss(fc.prob, sample.label);

        // d(mean BCE)/d(logit) for this sample, before the 1/B factor.
        double dz = fc.prob - (sample.label ? 1.0 : 0.0);
        const int R = fc.real_steps;
        const double* h_last = fc.h.data() + static_cast<std::size_t>(R) * H;
        for (int j = 0; j < H; ++j) {
            double hv = h_last[j];
            double wv = params.w_out()[j];
            if (mask) {
                hv = hv * mask[j] / keep;
                wv = wv * mask[j] / keep;
            }
            grad[wout_off + j] += dz * hv;
            dh[j] = dz * wv;
            dc[j] = 0.0;
        }
        grad[wout_off + H] += dz;

        for (int r = R - 1; r >= 0; --r) {
            const std::size_t rH = static_cast<std::size_t>(r) * H;
            const double* c_prev = fc.c.data() + rH;
            const double* h_prev = fc.h.data() + rH;
            const double* xn = fc.xn.data() + static_cast<std::size_t>(r) * F;
            for (int j = 0; j < H; ++j) {
                double i = fc.gi[rH + j];
                double f = fc.gf[rH + j];
                double g = fc.gg[rH + j];
                double o = fc.go[rH + j];
                double tc = fc.tc[rH + j];
                double d_o = dh[j] * tc;
                double d_c = dc[j] + dh[j] * o * (1.0 - tc * tc);
                double d_f = d_c * c_prev[j];
                double d_i = d_c * g;
                double d_g = d_c * i;
                dzi[j] = d_i * i * (1.0 - i);
                dzf[j] = d_f * f * (1.0 - f);
                dzg[j] = d_g * (1.0 - g * g);
                dzo[j] = d_o * o * (1.0 - o);
                dc[j] = d_c * f;
            }
            for (int j = 0; j < H; ++j) {
                const std::size_t jf = static_cast<std::size_t>(j) * F;
                const std::size_t jh = static_cast<std::size_t>(j) * H;
                double zi = dzi[j], zf = dzf[j], zg = dzg[j], zo = dzo[j];
                double* gwi = grad.data() + w_off + 0u * H * F + jf;
                double* gwf = grad.data() + w_off + 1u * H * F + jf;
                double* gwg = grad.data() + w_off + 2u * H * F + jf;
                double* gwo = grad.data() + w_off + 3u * H * F + jf;
                for (int d = 0; d < F; ++d) {
                    double xd = xn[d];
                    gwi[d] += zi * xd;
                    gwf[d] += zf * xd;
                    gwg[d] += zg * xd;
                    gwo[d] += zo * xd;
                }
                double* gui = grad.data() + u_off + 0u * H * H + jh;
                double* guf = grad.data() + u_off + 1u * H * H + jh;
                double* gug = grad.data() + u_off + 2u * H * H + jh;
                double* guo = grad.data() + u_off + 3u * H * H + jh;
                for (int k = 0; k < H; ++k) {
                    double hk = h_prev[k];
                    gui[k] += zi * hk;
                    guf[k] += zf * hk;
                    gug[k] += zg * hk;
                    guo[k] += zo * hk;
                }
                grad[b_off + 0u * H + j] += zi;
                grad[b_off + 1u * H + j] += zf;
                grad[b_off + 2u * H + j] += zg;
                grad[b_off + 3u * H + j] += zo;
            }
            // dL/dh_{r-1} through the recurrent connections.
            for (int k = 0; k < H; ++k) dh_prev[k] = 0.0;
            for (int j = 0; j < H; ++j) {
                const double* ui = params.U(0) + static_cast<std::size_t>(j) * H;
                const double* uf = params.U(1) + static_cast<std::size_t>(j) * H;
                const double* ug = params.U(2) + static_cast<std::size_t>(j) * H;
                const double* uo = params.U(3) + static_cast<std::size_t>(j) * H;
                double zi = dzi[j], zf = dzf[j], zg = dzg[j], zo = dzo[j];
                for (int k = 0; k < H; ++k)
                    dh_prev[k] += ui[k] * zi + uf[k] * zf + ug[k] * zg + uo[k] * zo;
            }
            std::swap(dh, dh_prev);
        }
    }

    double inv_b = 1.0 / static_cast<double>(batch.size());
    for (auto& g : grad) {
        g *= inv_b;
        if (!std::isfinite(g))
            throw ComputeError("lstm_backward: non-finite gradient");
    }
    if (mean_loss) *mean_loss = loss_sum * inv_b;
    return grad;
}

double grad_check(const LstmParams& params, const FlatSample& sample, double eps) {
    if (sample.mask_len < 1)
        throw ComputeError("grad_check: sample has no real steps");
    std::vector<const FlatSample*> batch{&sample};
    std::vector<const double*> no_masks;
    std::vector<double> analytic = lstm_backward(params, batch, no_masks, 0.0);

    LstmParams probe = params;
    double max_rel = 0.0;
    for (std::size_t idx = 0; idx < probe.theta.size(); ++idx) {
        double saved = probe.theta[idx];
        probe.theta[idx] = saved + eps;
        double lp = bce_loss(lstm_forward(probe, sample), sample.label);
        probe.theta[idx] = saved - eps;
        double lm = bce_loss(lstm_forward(probe, sample), sample.label);
        probe.theta[idx] = saved;
        double numeric = (lp - lm) / (2.0 * eps);
        double a = analytic[idx];
        double rel = std::fabs(a - numeric) /
                     std::max({std::fabs(a), std::fabs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

void save_params(const LstmParams& params, const std::string& path,
                 const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write checkpoint: " + path);
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "delirisk-lstm 1\n";
    out << "hidden " << params.hidden << " input " << params.input << "\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%a", v);
        out << buf << "\n";
    };
    out << "theta " << params.theta.size() << "\n";
    for (double v : params.theta) put(v);
    out << "offset " << params.input_offset.size() << "\n";
    for (double v : params.input_offset) put(v);
    out << "scale " << params.input_scale.size() << "\n";
    for (double v : params.input_scale) put(v);
}

LstmParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open checkpoint: " + path);
    // Skip provenance comment lines.
    while (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
    }
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "delirisk-lstm" || version != 1)
        throw InputError("not a recognized checkpoint: " + path);
    std::string key;
    int hidden = 0, input = 0;
    in >> key >> hidden;
    if (key != "hidden") throw InputError("corrupt checkpoint: " + path);
    in >> key >> input;
    if (key != "input") throw InputError("corrupt checkpoint: " + path);
    if (hidden < 1 || input < 1) throw InputError("corrupt checkpoint: " + path);

    LstmParams p = LstmParams::zeros(hidden, input);
    auto read_block = [&](const char* name, std::vector<double>& dst,
                          std::size_t expected) {
        std::size_t n = 0;
        in >> key >> n;
        if (key != name || n != expected)
            throw InputError("corrupt checkpoint block '" + std::string(name) +
                             "' in " + path);
        std::string tok;
        for (std::size_t i = 0; i < n; ++i) {
            in >> tok;
            dst[i] = std::strtod(tok.c_str(), nullptr);
        }
        if (!in) throw InputError("truncated checkpoint: " + path);
    };
    read_block("theta", p.theta, p.theta.size());
    read_block("offset", p.input_offset, static_cast<std::size_t>(input));
    read_block("scale", p.input_scale, static_cast<std::size_t>(input));
    return p;
}

namespace {

void validate_config(const TrainConfig& c) {
    if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0))
        throw InputError("train: dropout_rate must lie in [0, 1)");
    if (c.hidden_size < 1 || c.epochs < 1 || c.batch_size < 1 ||
        c.early_stopping_patience < 1)
        throw InputError("train: counts must be positive");
    if (!(c.learning_rate > 0.0)) throw InputError("train: learning_rate must be > 0");
}

}  // namespace

TrainResult train(const std::vector<FlatSample>& train_set,
                  const std::vector<FlatSample>& val_set, const TrainConfig& config) {
    validate_config(config);
    if (train_set.empty() || val_set.empty())
        throw InputError("train: train and validation sets must be non-empty");

    TrainResult result;
    const int H = config.hidden_size;
    const int F = static_cast<int>(kFeatureDim);

    Rng master(config.master_seed);
    Rng init_rng = master.derive(rng_tag::kTrainInit);
    LstmParams params = LstmParams::init(H, F, init_rng);

    // Standardize continuous inputs with training-set statistics (real
    // steps only); nominal inputs pass through.
    {
        const std::size_t n_steps = train_set.front().values.size() / kFeatureDim;
        for (int d = 0; d < F; ++d) {
            if (is_nominal_slot(static_cast<std::size_t>(d))) continue;
            double sum = 0.0, sum2 = 0.0;
            std::size_t cnt = 0;
            for (const auto& s : train_set) {
                std::size_t start = n_steps - s.mask_len;
                for (std::size_t t = start; t < n_steps; ++t) {
                    double x = s.values[t * kFeatureDim + d];
                    sum += x;
                    sum2 += x * x;
                    ++cnt;
                }
            }
            if (cnt == 0) continue;
            double mean = sum / static_cast<double>(cnt);
            double var = std::max(0.0, sum2 / static_cast<double>(cnt) - mean * mean);
            double sd = std::sqrt(var);
            params.input_offset[d] = mean;
            params.input_scale[d] = sd > 1e-12 ? sd : 1.0;
        }
    }

    bool val_has_both = false;
    {
        bool pos = false, neg = false;
        for (const auto& s : val_set) (s.label ? pos : neg) = true;
        val_has_both = pos && neg;
    }
    result.history.val_metric_is_auroc = val_has_both;
    if (!val_has_both)
        result.warnings.push_back(
            "validation set is single-class; early stopping on validation loss");

    std::vector<double> adam_m(params.size(), 0.0), adam_v(params.size(), 0.0);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    long long adam_t = 0;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    LstmParams best_params = params;
    double best_metric = val_has_both ? -1.0 : std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int stale = 0;

    std::vector<const FlatSample*> batch;
    std::vector<const double*> batch_masks;
    std::vector<double> mask_storage;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng epoch_rng = master.derive(rng_tag::kTrainEpoch)
                            .derive(static_cast<std::uint64_t>(epoch));
        Rng dropout_rng = master.derive(rng_tag::kDropout)
                              .derive(static_cast<std::uint64_t>(epoch));
        epoch_rng.shuffle(order);

        double epoch_loss = 0.0;
        for (std::size_t pos = 0; pos < order.size(); pos += config.batch_size) {
            std::size_t end = std::min(order.size(),
                                       pos + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t i = pos; i < end; ++i) batch.push_back(&train_set[order[i]]);

            batch_masks.clear();
            if (config.dropout_rate > 0.0) {
                mask_storage.assign(batch.size() * static_cast<std::size_t>(H), 1.0);
                for (std::size_t s = 0; s < batch.size(); ++s) {
                    double* mask = mask_storage.data() + s * static_cast<std::size_t>(H);
                    for (int j = 0; j < H; ++j)
                        mask[j] = dropout_rng.uniform() < config.dropout_rate ? 0.0 : 1.0;
                    batch_masks.push_back(mask);
                }
            }

            double batch_loss = 0.0;
            std::vector<double> grad = lstm_backward(params, batch, batch_masks,
                                                     config.dropout_rate, &batch_loss);
            if (!std::isfinite(batch_loss))
                throw ComputeError("train: loss diverged at epoch " +
                                   std::to_string(epoch));
            epoch_loss += batch_loss * static_cast<double>(batch.size());

            ++adam_t;
            double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
            double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
            for (std::size_t i = 0; i < params.theta.size(); ++i) {
                double g = grad[i];
                adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * g;
                adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * g * g;
                double mhat = adam_m[i] / bc1;
                double vhat = adam_v[i] / bc2;
                params.theta[i] -= config.learning_rate * mhat /
                                   (std::sqrt(vhat) + adam_eps);
            }
        }
        epoch_loss /= static_cast<double>(train_set.size());
        result.history.train_loss.push_back(epoch_loss);

        // Validation pass (inference mode).
        double val_metric = 0.0;
        if (val_has_both) {
            ScoredSet scored;
            scored.scores.reserve(val_set.size());
            scored.labels.reserve(val_set.size());
            for (const auto& s : val_set) {
                scored.scores.push_back(lstm_forward(params, s));
                scored.labels.push_back(s.label);
            }
            val_metric = auroc(scored);
        } else {
            double loss = 0.0;
            for (const auto& s : val_set)
                loss += bce_loss(lstm_forward(params, s), s.label);
            val_metric = loss / static_cast<double>(val_set.size());
        }
        result.history.val_metric.push_back(val_metric);

        bool improved = val_has_both ? (val_metric > best_metric)
                                     : (val_metric < best_metric);
        if (improved) {
            best_metric = val_metric;
            best_epoch = epoch;
            best_params = params;
            stale = 0;
        } else if (++stale >= config.early_stopping_patience) {
            break;
        }
    }

    result.history.selected_epoch = best_epoch;
    result.params = std::move(best_params);
    return result;
}

}  // namespace delirisk
