#include "delirisk/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "delirisk/errors.hpp"
#include "delirisk/rng.hpp"

namespace delirisk {

const std::array<std::string, kFeatureDim>& feature_names() {
    static const std::array<std::string, kFeatureDim> names = [] {
        std::array<std::string, kFeatureDim> n;
        n[kSlotAge] = "age";
        n[kSlotGender] = "gender";
        n[kSlotDxCount] = "dx_count";
        for (int i = 0; i < kConditionCount; ++i)
            n[kSlotFlagsBegin + i] = condition_names()[i];
        n[kSlotCci] = "cci";
        return n;
    }();
    return names;
}

SequenceBuild build_sequences(const Dataset& dataset,
                              const std::vector<CohortAssignment>& assignments,
                              const CharlsonMap& map, std::size_t max_seq_len) {
    if (max_seq_len < 1)
        throw InputError("build_sequences: max_seq_len must be >= 1");
    SequenceBuild out;
    for (const auto& a : assignments) {
        if (a.excluded) continue;
        const Patient* p = dataset.find(a.subject_id);
        if (!p) throw ComputeError("assignment for unknown subject " + a.subject_id);
        if (p->admissions.empty()) continue;

        Day index_time = p->admissions.front().admit_time;
        std::vector<FeatureVector> steps;
        ComorbidityProfile cumulative;
        std::vector<DiagnosisCode> history;
        for (const auto& adm : p->admissions) {
            if (a.has_delirium && adm.admit_time >= *a.first_delirium_time) break;
            for (const auto& dx : adm.diagnoses) history.push_back(dx);
            cumulative = comorbidity_flags(history, map);
            FeatureVector v{};
            double years = static_cast<double>(adm.admit_time - index_time) / 365.25;
            v[kSlotAge] = static_cast<double>(p->anchor_age) + std::floor(years);
            v[kSlotGender] = p->gender == Gender::Female ? 1.0 : 0.0;
            v[kSlotDxCount] = static_cast<double>(adm.diagnoses.size());
            for (int i = 0; i < kConditionCount; ++i)
                v[kSlotFlagsBegin + i] = cumulative.flags[i] ? 1.0 : 0.0;
            v[kSlotCci] = static_cast<double>(cumulative.cci);
            steps.push_back(v);
        }
        if (steps.empty()) {
            out.dropped.emplace_back(a.subject_id, "no pre-onset history");
            continue;
        }
        if (steps.size() > max_seq_len)
            steps.erase(steps.begin(),
                        steps.end() - static_cast<std::ptrdiff_t>(max_seq_len));

        FeatureSequence seq;
        seq.subject_id = a.subject_id;
        seq.label = a.has_delirium;
        seq.mask_len = steps.size();
        seq.steps.assign(max_seq_len, FeatureVector{});
        std::copy(steps.begin(), steps.end(),
                  seq.steps.begin() + static_cast<std::ptrdiff_t>(max_seq_len - steps.size()));
        out.sequences.push_back(std::move(seq));
    }
    return out;
}

std::vector<std::size_t> nominal_slots(std::size_t max_seq_len) {
    std::vector<std::size_t> out;
    out.reserve(16 * max_seq_len);
    for (std::size_t t = 0; t < max_seq_len; ++t) {
        for (std::size_t d = 0; d < kFeatureDim; ++d) {
            if (is_nominal_slot(d)) out.push_back(t * kFeatureDim + d);
        }
    }
    return out;
}

FlatSample flatten(const FeatureSequence& seq) {
    FlatSample f;
    f.subject_id = seq.subject_id;
    f.label = seq.label;
    f.mask_len = seq.mask_len;
    f.values.reserve(seq.steps.size() * kFeatureDim);
    for (const auto& step : seq.steps)
        f.values.insert(f.values.end(), step.begin(), step.end());
    return f;
}

FeatureSequence unflatten(const FlatSample& flat, std::size_t max_seq_len) {
    if (flat.values.size() != max_seq_len * kFeatureDim)
        throw InputError("unflatten: length mismatch, got " +
                         std::to_string(flat.values.size()) + " values for max_seq_len " +
                         std::to_string(max_seq_len));
    FeatureSequence seq;
    seq.subject_id = flat.subject_id;
    seq.label = flat.label;
    seq.mask_len = flat.mask_len;
    seq.steps.assign(max_seq_len, FeatureVector{});
    for (std::size_t t = 0; t < max_seq_len; ++t)
        for (std::size_t d = 0; d < kFeatureDim; ++d)
            seq.steps[t][d] = flat.values[t * kFeatureDim + d];
    return seq;
}

namespace {

std::size_t steps_of(const FlatSample& s) { return s.values.size() / kFeatureDim; }

// First real (non-padding) step index.
std::size_t first_real_step(const FlatSample& s) {
    return steps_of(s) - s.mask_len;
}

// Majority label = the more frequent one; false wins ties so that an
// exactly balanced input has a stable (no-op) interpretation.
bool minority_label(const std::vector<FlatSample>& samples) {
    std::size_t pos = 0;
    for (const auto& s : samples) pos += s.label ? 1 : 0;
    return 2 * pos <= samples.size();
}

}  // namespace

SmotencResult smotenc(const std::vector<FlatSample>& samples, int k,
                      double target_minority_ratio, std::uint64_t rng_seed) {
    if (k < 1) throw InputError("smotenc: k must be >= 1");
    if (samples.empty()) throw InputError("smotenc: empty sample list");
    const std::size_t n_steps = steps_of(samples.front());
    for (const auto& s : samples) {
        if (s.values.size() != n_steps * kFeatureDim)
            throw InputError("smotenc: inconsistent flattened lengths");
    }

    bool min_label = minority_label(samples);
    std::vector<std::size_t> minority, majority;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (samples[i].label == min_label ? minority : majority).push_back(i);

    SmotencResult result;
    result.samples = samples;
    long long target =
        std::llround(target_minority_ratio * static_cast<double>(majority.size()));
    long long n_synth = target - static_cast<long long>(minority.size());
    if (n_synth <= 0) return result;

    if (minority.size() < static_cast<std::size_t>(k) + 1)
        throw InputError("smotenc: minority class has " +
                         std::to_string(minority.size()) +
                         " samples, need at least k+1 = " + std::to_string(k + 1));

    // Nominal penalty m: median of the per-continuous-slot standard
    // deviations of the minority class, real-step values only.
    std::vector<double> stds;
    for (std::size_t t = 0; t < n_steps; ++t) {
        for (std::size_t d = 0; d < kFeatureDim; ++d) {
            if (is_nominal_slot(d)) continue;
            std::size_t slot = t * kFeatureDim + d;
            double sum = 0.0, sum2 = 0.0;
            std::size_t cnt = 0;
            for (std::size_t idx : minority) {
                if (t < first_real_step(samples[idx])) continue;
                double x = samples[idx].values[slot];
                sum += x;
                sum2 += x * x;
                ++cnt;
            }
            if (cnt == 0) continue;
            double mean = sum / static_cast<double>(cnt);
            double var = std::max(0.0, sum2 / static_cast<double>(cnt) - mean * mean);
            stds.push_back(std::sqrt(var));
        }
    }
    double m = 0.0;
    if (!stds.empty()) {
        std::sort(stds.begin(), stds.end());
        std::size_t n = stds.size();
        m = n % 2 == 1 ? stds[n / 2] : 0.5 * (stds[n / 2 - 1] + stds[n / 2]);
    }
    if (m == 0.0) result.zero_variance_fallback = true;
    result.nominal_penalty = m;

    // Pairwise squared distances over slots real in both samples.
    auto sq_dist = [&](const FlatSample& a, const FlatSample& b) {
        std::size_t start = std::max(first_real_step(a), first_real_step(b));
        double acc = 0.0;
        for (std::size_t t = start; t < n_steps; ++t) {
            const double* pa = a.values.data() + t * kFeatureDim;
            const double* pb = b.values.data() + t * kFeatureDim;
            for (std::size_t d = 0; d < kFeatureDim; ++d) {
                if (is_nominal_slot(d)) {
                    if (pa[d] != pb[d]) acc += m * m;
                } else {
                    double diff = pa[d] - pb[d];
                    acc += diff * diff;
                }
            }
        }
        return acc;
    };

    // k nearest minority neighbors per minority sample (ties by index).
    std::size_t nm = minority.size();
    std::vector<std::vector<std::size_t>> neighbors(nm);
    std::vector<std::pair<double, std::size_t>> dists;
    for (std::size_t i = 0; i < nm; ++i) {
        dists.clear();
        for (std::size_t j = 0; j < nm; ++j) {
            if (j == i) continue;
            dists.emplace_back(sq_dist(samples[minority[i]], samples[minority[j]]), j);
        }
        std::size_t kk = std::min<std::size_t>(k, dists.size());
        std::partial_sort(dists.begin(), dists.begin() + kk, dists.end());
        neighbors[i].reserve(kk);
        for (std::size_t j = 0; j < kk; ++j)
            neighbors[i].push_back(minority[dists[j].second]);
    }

    // Draw order (fixed, so seeded runs replay exactly): one shuffle of
    // the minority index list, then per synthetic sample one neighbor
    // pick and one lambda.
    Rng rng(rng_seed);
    std::vector<std::size_t> order(nm);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    for (long long s = 0; s < n_synth; ++s) {
        std::size_t mi = order[static_cast<std::size_t>(s) % nm];
        const FlatSample& seed_sample = samples[minority[mi]];
        const auto& nbrs = neighbors[mi];
        std::size_t pick = static_cast<std::size_t>(rng.uniform_int(nbrs.size()));
        const FlatSample& nbr = samples[nbrs[pick]];
        double lambda = rng.uniform();

        FlatSample synth;
        synth.subject_id = "synthetic-" + std::to_string(s);
        synth.label = min_label;
        synth.mask_len = seed_sample.mask_len;
        synth.values.assign(n_steps * kFeatureDim, 0.0);
        std::size_t start = first_real_step(seed_sample);
        for (std::size_t t = start; t < n_steps; ++t) {
            for (std::size_t d = 0; d < kFeatureDim; ++d) {
                std::size_t slot = t * kFeatureDim + d;
                if (is_nominal_slot(d)) {
                    std::map<double, int> votes;
                    for (std::size_t nb : nbrs) votes[samples[nb].values[slot]]++;
                    double best = seed_sample.values[slot];
                    int best_votes = 0;
                    bool tie = false;
                    for (const auto& [value, count] : votes) {
                        if (count > best_votes) {
                            best_votes = count;
                            best = value;
                            tie = false;
                        } else if (count == best_votes) {
                            tie = true;
                        }
                    }
                    synth.values[slot] = tie ? seed_sample.values[slot] : best;
                } else {
                    double a = seed_sample.values[slot];
                    synth.values[slot] = a + lambda * (nbr.values[slot] - a);
                }
            }
        }
        result.samples.push_back(std::move(synth));
    }
    return result;
}

std::vector<FlatSample> downsample_majority(const std::vector<FlatSample>& samples,
                                            double target_majority_ratio,
                                            std::uint64_t rng_seed) {
    if (samples.empty()) throw InputError("downsample_majority: empty sample list");
    bool min_label = minority_label(samples);
    std::vector<std::size_t> majority;
    std::size_t n_minority = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].label == min_label) ++n_minority;
        else majority.push_back(i);
    }
    long long keep =
        std::llround(target_majority_ratio * static_cast<double>(n_minority));
    if (keep > static_cast<long long>(majority.size()))
        throw ComputeError("downsample_majority: ratio requests " +
                           std::to_string(keep) + " majority samples, only " +
                           std::to_string(majority.size()) + " exist");

    Rng rng(rng_seed);
    rng.shuffle(majority);
    std::vector<bool> kept(samples.size(), false);
    for (long long i = 0; i < keep; ++i) kept[majority[static_cast<std::size_t>(i)]] = true;

    std::vector<FlatSample> out;
    out.reserve(n_minority + static_cast<std::size_t>(keep));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].label == min_label || kept[i]) out.push_back(samples[i]);
    }
    return out;
}

}  // namespace delirisk
