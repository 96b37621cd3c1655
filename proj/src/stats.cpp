#include "fkmix/stats.hpp"
#include "fkmix/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace fkmix {

namespace {

struct Pooled {
    double mean = 0.0;
    double var = 0.0;
    int64_t n = 0;
};

Pooled pool(const std::vector<std::vector<double>>& chains) {
    Pooled p;
    double sum = 0.0;
    for (const auto& c : chains) {
        for (double x : c)
            sum += x;
        p.n += static_cast<int64_t>(c.size());
    }
    if (p.n == 0)
        return p;
    p.mean = sum / static_cast<double>(p.n);
    double ss = 0.0;
    for (const auto& c : chains)
        for (double x : c)
            ss += (x - p.mean) * (x - p.mean);
    p.var = ss / static_cast<double>(p.n);
    return p;
}

} // namespace

double tau_int(const std::vector<std::vector<double>>& chains, double c) {
    Pooled p = pool(chains);
    if (p.n < 2 || p.var <= 0.0)
        return 0.5;
    size_t longest = 0;
    for (const auto& ch : chains)
        longest = std::max(longest, ch.size());
    double tau = 0.5;
    for (size_t t = 1; t < longest; ++t) {
        double acc = 0.0;
        int64_t pairs = 0;
        for (const auto& ch : chains) {
            for (size_t i = 0; i + t < ch.size(); ++i)
                acc += (ch[i] - p.mean) * (ch[i + t] - p.mean);
            if (ch.size() > t)
                pairs += static_cast<int64_t>(ch.size() - t);
        }
        if (pairs == 0)
            break;
        tau += acc / static_cast<double>(pairs) / p.var;
        if (static_cast<double>(t) >= c * tau)
            break;
    }
    return std::max(tau, 0.5);
}

EstimateResult summarize(const std::vector<std::vector<double>>& chains, uint64_t seed) {
    Pooled p = pool(chains);
    EstimateResult r;
    r.seed = seed;
    r.n_raw = p.n;
    if (p.n == 0)
        throw domain_error("no samples to summarize");
    r.mean = p.mean;
    r.tau_int = tau_int(chains);
    r.n_effective = static_cast<double>(p.n) / (2.0 * r.tau_int);
    r.stderr_ = p.n > 1 ? std::sqrt(p.var / r.n_effective) : 0.0;
    return r;
}

EstimateResult scaled(EstimateResult r, double factor) {
    r.mean *= factor;
    r.stderr_ *= std::abs(factor);
    return r;
}

} // namespace fkmix
