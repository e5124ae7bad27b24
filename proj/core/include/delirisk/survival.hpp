#pragma once

#include <string>
#include <vector>

#include "delirisk/cohort.hpp"
#include "delirisk/ehr.hpp"

namespace delirisk {

/// Time-to-event observation. `duration` is in months; `event` false
/// means right-censored.
struct SurvivalObservation {
    double duration = 0.0;
    bool event = false;
};

/// Map a cohort assignment to an observation: event at the first
/// delirium-coded admission, otherwise censored at the last discharge or
/// the study end, whichever is earlier. Durations count from the index
/// admission.
SurvivalObservation to_survival(const CohortAssignment& assignment, Day study_end);

enum class BandTransform { Linear, LogLog };

/// One product-limit step (a distinct event time).
struct KMPoint {
    double time = 0.0;
    long long n_at_risk = 0;
    long long n_events = 0;
    double survival = 1.0;
    double greenwood_var = 0.0;  // +inf once the risk set is exhausted
    double ci_lo = 0.0;
    double ci_hi = 1.0;
    bool degenerate = false;  // variance undefined at/after this point
};

struct KMCurve {
    std::vector<KMPoint> points;
    long long total_n = 0;
    long long total_events = 0;
};

/// Kaplan-Meier product-limit fit. Ties between events and censorings at
/// the same time: events first (censored observations stay in the risk
/// set for that time). Survival values are computed as exact integer
/// ratios while the running products fit, so small-sample results are
/// correctly rounded.
KMCurve km_fit(const std::vector<SurvivalObservation>& obs);

/// Attach Greenwood confidence bands in place.
/// linear: S +- z*sqrt(V), clipped to [0,1].
/// loglog: exp(-exp(log(-log S) -+ z*se)), always inside (0,1) and
/// asymmetric about S. Points with exhausted risk sets get (0, S) and the
/// degenerate flag.
void greenwood_band(KMCurve& curve, double level = 0.95,
                    BandTransform transform = BandTransform::LogLog);

struct LogRankResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double observed_a = 0.0;
    double expected_a = 0.0;
    double observed_b = 0.0;
    double expected_b = 0.0;
};

/// Two-sample log-rank test. Throws ComputeError when there are no events
/// (not testable).
LogRankResult logrank_test(const std::vector<SurvivalObservation>& group_a,
                           const std::vector<SurvivalObservation>& group_b);

}  // namespace delirisk
