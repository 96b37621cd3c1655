#pragma once

#include "fkmix/coupling.hpp"
#include "fkmix/events.hpp"
#include "fkmix/stats.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace fkmix {

// Output of one chain: one integer-valued series per channel, plus the stream
// position it ended at. Chains are the unit of work, checkpointing and merging.
struct ChainRecord {
    uint64_t chain = 0;
    std::vector<std::vector<double>> series;
    uint64_t cursor = 0;
};

enum class DeltaStatistic {
    // upper_e - lower_e after each sweep, in {0,1}
    Indicator,
    // E[upper_e - lower_e | other edges] at each update of the four edges at
    // the origin, accumulated over a full sweep followed by window refreshes
    Conditional,
};

struct RunControl {
    uint64_t seed = 1;
    int workers = 1;
    int burn_in = -1;        // sweeps; negative selects default_burn_in(R)
    int stride = 1;          // sweeps between samples
    int samples_per_chain = 1000;
    int chains = 4;          // initial (and, without a target, final) chain count
    double target_rel_err = 0.0; // add chains until reached; 0 disables
    int max_chains = 256;
    DeltaStatistic statistic = DeltaStatistic::Conditional;
    int window_radius = 8;   // Conditional only; 0 disables the refresh
    int window_sweeps = 16;
    bool check_loops = true; // ratio_A: compare both detectors on every sample
    std::vector<ChainRecord> resume;                 // completed chains to reuse
    std::function<void(const ChainRecord&)> on_chain; // called in chain order
};

int default_burn_in(int R);

struct PointResult {
    EstimateResult estimate;
    int chains = 0;
    bool target_met = true;
    std::vector<ChainRecord> records;
};

PointResult estimate_delta_R(const RcmParams& params, int R, const RunControl& ctl);
PointResult estimate_delta_rR(const RcmParams& params, int r, int R, const RunControl& ctl);
// (phi1[A] - phi0[A]) / phi0[A]; also reports the plain difference.
struct RatioResult {
    PointResult ratio;
    EstimateResult difference;
    EstimateResult free_probability;
    int64_t detector_checks = 0;
};
RatioResult estimate_ratio_A(const RcmParams& params, int r, double delta, int R, const RunControl& ctl);
// phi1[a^l_R]. Each sample is averaged over both states of the edge whose
// midpoint is the reference point, weighted by its heat-bath probability.
PointResult estimate_nested_sign(const RcmParams& params, int R, double a, const RunControl& ctl);

struct FitPoint {
    double scale = 0.0;
    EstimateResult estimate;
};

struct ExponentFit {
    double exponent = 0.0;
    double stderr_ = 0.0;
    double intercept = 0.0; // log c in c * scale^-exponent
    std::pair<double, double> ci95{0.0, 0.0};
    std::vector<FitPoint> points;
};

// Weighted least squares of log(mean) on log(scale); the interval is the
// percentile interval of refits on means redrawn from N(mean, stderr).
ExponentFit fit_exponent(const std::vector<FitPoint>& points, int resamples = 10000, uint64_t seed = 1);

// Runs fn(chain) for chains [first, last) on the given number of threads; the
// output order and content do not depend on the thread count.
std::vector<ChainRecord> run_chains(uint64_t first, uint64_t last, int workers,
                                    const std::function<ChainRecord(uint64_t)>& fn);

} // namespace fkmix
