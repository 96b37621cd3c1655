#pragma once

#include <cstdint>
#include <vector>

namespace fkmix {

struct EstimateResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    double n_effective = 0.0;
    double tau_int = 0.5; // in samples
    int64_t n_raw = 0;
    uint64_t seed = 0;
};

// Integrated autocorrelation time of the pooled series, lags taken within each
// chain around the pooled mean. Sokal's window: the first W with W >= c*tau(W).
double tau_int(const std::vector<std::vector<double>>& chains, double c = 6.0);

// Mean over all samples with stderr from the pooled variance inflated by 2*tau.
EstimateResult summarize(const std::vector<std::vector<double>>& chains, uint64_t seed = 0);

// Series scaled by a constant (statistics scale accordingly).
EstimateResult scaled(EstimateResult r, double factor);

} // namespace fkmix
