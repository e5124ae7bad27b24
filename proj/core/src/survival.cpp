#include "delirisk/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "delirisk/errors.hpp"
#include "delirisk/stats.hpp"

namespace delirisk {

SurvivalObservation to_survival(const CohortAssignment& assignment, Day study_end) {
    if (assignment.excluded)
        throw ComputeError("to_survival: assignment is excluded from the cohort");
    SurvivalObservation o;
    if (assignment.has_delirium) {
        Day onset = *assignment.first_delirium_time;
        if (onset < assignment.index_admission_time)
            throw ComputeError("to_survival: event before index admission for subject " +
                               assignment.subject_id);
        o.event = true;
        o.duration = months_between(assignment.index_admission_time, onset);
    } else {
        Day end = std::min(assignment.last_discharge_time, study_end);
        end = std::max(end, assignment.index_admission_time);
        o.event = false;
        o.duration = months_between(assignment.index_admission_time, end);
    }
    return o;
}

namespace {

// Running product of (n_i - d_i)/n_i kept as an exact reduced fraction
// while it fits; falls back to a running double product afterwards.
// For small risk sets (n <= 20 or so) the reduced terms stay below 2^53,
// so the emitted double is the correctly rounded value of the exact
// rational.
class SurvivalAccumulator {
public:
    void step(long long n, long long d) {
        if (exact_) {
            num_ *= static_cast<unsigned __int128>(n - d);
            den_ *= static_cast<unsigned __int128>(n);
            reduce();
            if (num_ > kDoubleExact || den_ > kDoubleExact) {
                value_ = ratio();
                exact_ = false;
            }
        } else {
            value_ *= 1.0 - static_cast<double>(d) / static_cast<double>(n);
        }
    }

    double value() const { return exact_ ? ratio() : value_; }

private:
    static constexpr unsigned __int128 kDoubleExact =
        (static_cast<unsigned __int128>(1) << 53);

    static unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
        while (b != 0) {
            unsigned __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    void reduce() {
        if (num_ == 0) {
            den_ = 1;
            return;
        }
        unsigned __int128 g = gcd128(num_, den_);
        num_ /= g;
        den_ /= g;
    }

    double ratio() const {
        return static_cast<double>(static_cast<std::uint64_t>(num_)) /
               static_cast<double>(static_cast<std::uint64_t>(den_));
    }

    bool exact_ = true;
    unsigned __int128 num_ = 1;
    unsigned __int128 den_ = 1;
    double value_ = 1.0;
};

}  // namespace

KMCurve km_fit(const std::vector<SurvivalObservation>& obs) {
    if (obs.empty()) throw ComputeError("km_fit: empty observation list");
    for (const auto& o : obs) {
        if (!(o.duration >= 0.0) || !std::isfinite(o.duration))
            throw ComputeError("km_fit: durations must be finite and non-negative");
    }
    std::vector<const SurvivalObservation*> sorted;
    sorted.reserve(obs.size());
    for (const auto& o : obs) sorted.push_back(&o);
    std::sort(sorted.begin(), sorted.end(),
              [](const SurvivalObservation* x, const SurvivalObservation* y) {
                  if (x->duration != y->duration) return x->duration < y->duration;
                  return x->event > y->event;  // events before censorings
              });

    KMCurve curve;
    curve.total_n = static_cast<long long>(obs.size());
    SurvivalAccumulator surv;
    double var_sum = 0.0;  // sum of d / (n (n - d))
    bool var_infinite = false;

    long long at_risk = curve.total_n;
    std::size_t i = 0;
    while (i < sorted.size()) {
        double t = sorted[i]->duration;
        long long events = 0, censored = 0;
        while (i < sorted.size() && sorted[i]->duration == t) {
            (sorted[i]->event ? events : censored)++;
            ++i;
        }
        if (events > 0) {
            KMPoint pt;
            pt.time = t;
            pt.n_at_risk = at_risk;
            pt.n_events = events;
            surv.step(at_risk, events);
            pt.survival = surv.value();
            if (at_risk == events) var_infinite = true;
            if (var_infinite) {
                pt.greenwood_var = std::numeric_limits<double>::infinity();
                pt.degenerate = true;
            } else {
                var_sum += static_cast<double>(events) /
                           (static_cast<double>(at_risk) *
                            static_cast<double>(at_risk - events));
                pt.greenwood_var = pt.survival * pt.survival * var_sum;
            }
            pt.ci_lo = pt.survival;
            pt.ci_hi = pt.survival;
            curve.points.push_back(pt);
            curve.total_events += events;
        }
        at_risk -= events + censored;
    }
    return curve;
}

void greenwood_band(KMCurve& curve, double level, BandTransform transform) {
    double z = z_quantile(0.5 * (1.0 + level));
    for (auto& pt : curve.points) {
        if (pt.degenerate || std::isinf(pt.greenwood_var)) {
            pt.degenerate = true;
            pt.ci_lo = 0.0;
            pt.ci_hi = pt.survival;
            continue;
        }
        double s = pt.survival;
        double v = pt.greenwood_var;
        if (v == 0.0) {
            pt.ci_lo = s;
            pt.ci_hi = s;
            continue;
        }
        if (transform == BandTransform::Linear) {
            double half = z * std::sqrt(v);
            pt.ci_lo = std::max(0.0, s - half);
            pt.ci_hi = std::min(1.0, s + half);
        } else {
            if (s <= 0.0) {
                pt.ci_lo = 0.0;
                pt.ci_hi = 0.0;
                continue;
            }
            if (s >= 1.0) {
                pt.ci_lo = 1.0;
                pt.ci_hi = 1.0;
                continue;
            }
            // Delta method on theta = log(-log S).
            double log_s = std::log(s);
            double se_theta = std::sqrt(v) / (s * std::fabs(log_s));
            double theta = std::log(-log_s);
            pt.ci_lo = std::exp(-std::exp(theta + z * se_theta));
            pt.ci_hi = std::exp(-std::exp(theta - z * se_theta));
        }
    }
}

LogRankResult logrank_test(const std::vector<SurvivalObservation>& group_a,
                           const std::vector<SurvivalObservation>& group_b) {
    if (group_a.empty() || group_b.empty())
        throw ComputeError("logrank_test: both groups must be non-empty");

    struct Tagged {
        double time;
        bool event;
        bool in_a;
    };
    std::vector<Tagged> all;
    all.reserve(group_a.size() + group_b.size());
    for (const auto& o : group_a) all.push_back({o.duration, o.event, true});
    for (const auto& o : group_b) all.push_back({o.duration, o.event, false});
    std::sort(all.begin(), all.end(), [](const Tagged& x, const Tagged& y) {
        if (x.time != y.time) return x.time < y.time;
        return x.event > y.event;
    });

    long long at_risk_a = static_cast<long long>(group_a.size());
    long long at_risk_b = static_cast<long long>(group_b.size());
    double observed_a = 0.0, expected_a = 0.0, variance = 0.0;
    long long total_events = 0;

    std::size_t i = 0;
    while (i < all.size()) {
        double t = all[i].time;
        long long d_a = 0, d_b = 0, c_a = 0, c_b = 0;
        while (i < all.size() && all[i].time == t) {
            const auto& x = all[i];
            if (x.event) (x.in_a ? d_a : d_b)++;
            else (x.in_a ? c_a : c_b)++;
            ++i;
        }
        long long d = d_a + d_b;
        if (d > 0) {
            double n = static_cast<double>(at_risk_a + at_risk_b);
            double na = static_cast<double>(at_risk_a);
            double nb = static_cast<double>(at_risk_b);
            double dd = static_cast<double>(d);
            observed_a += static_cast<double>(d_a);
            expected_a += na * dd / n;
            if (n > 1.0)
                variance += dd * (n - dd) * na * nb / (n * n * (n - 1.0));
            total_events += d;
        }
        at_risk_a -= d_a + c_a;
        at_risk_b -= d_b + c_b;
    }

    if (total_events == 0)
        throw ComputeError("logrank_test: no events in either group, not testable");

    LogRankResult r;
    r.observed_a = observed_a;
    r.expected_a = expected_a;
    r.observed_b = static_cast<double>(total_events) - observed_a;
    r.expected_b = static_cast<double>(total_events) - expected_a;
    double diff = observed_a - expected_a;
    if (variance <= 0.0) {
        // All events fell where one group had the whole risk set; no
        // information about a difference.
        r.statistic = 0.0;
        r.p_value = 1.0;
        return r;
    }
    r.statistic = diff * diff / variance;
    r.p_value = chi2_sf(r.statistic, 1);
    return r;
}

}  // namespace delirisk
