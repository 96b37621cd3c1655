#include "fkmix/coupling.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fkmix {

CoupledState make_coupled(const BoxLattice& lat, const RcmParams& params, uint64_t stream_id) {
    if (params.q < 1)
        throw domain_error("the monotone coupling needs q >= 1");
    CoupledState s;
    s.lower = make_chain(lat, BoundaryCondition::free(), params, false, stream_id);
    s.upper = make_chain(lat, BoundaryCondition::wired(), params, true, stream_id);
    return s;
}

void coupled_sweep(const BoxLattice& lat, CoupledState& state, Stream& rng) {
    ConnectivityOracle lo(lat, state.lower.bc), hi(lat, state.upper.bc);
    const double p = state.lower.params.p, pp = state.lower.params.p_pivotal();
    uint8_t* a = state.lower.config.bits.data();
    uint8_t* b = state.upper.config.bits.data();
    for (int e = 0; e < lat.num_edges(); ++e) {
        double u = rng.uniform();
        a[e] = u < (lo.joined_without(a, EdgeId{e}) ? p : pp);
        b[e] = u < (hi.joined_without(b, EdgeId{e}) ? p : pp);
        if (a[e] > b[e])
            throw std::logic_error("coupled chains lost their order at edge " + std::to_string(e));
    }
    ++state.lower.sweeps;
    ++state.upper.sweeps;
    ++state.sweeps;
}

std::vector<EdgeId> origin_edges(const BoxLattice& lat) {
    return {lat.horizontal(0, 0), lat.horizontal(-1, 0), lat.vertical(0, 0), lat.vertical(0, -1)};
}

std::vector<EdgeId> window_edges(const BoxLattice& lat, int m) {
    if (m < 1 || m > lat.R())
        throw domain_error("window radius must lie in [1, R]");
    std::vector<EdgeId> out;
    for (int e = 0; e < lat.num_edges(); ++e) {
        auto [u, v] = lat.ends(EdgeId{e});
        if (std::max(std::abs(u.x), std::abs(u.y)) <= m && std::max(std::abs(v.x), std::abs(v.y)) <= m)
            out.push_back(EdgeId{e});
    }
    return out;
}

CoupledChain::CoupledChain(const BoxLattice& lat, const RcmParams& params, uint64_t seed, uint64_t chain_id)
    : lat_(lat), state_(make_coupled(lat, params, chain_id)), rng_(seed, chain_id),
      lo_(lat, BoundaryCondition::free()), hi_(lat, BoundaryCondition::wired()),
      watched_(lat.num_edges(), 0) {}

void CoupledChain::watch(const std::vector<EdgeId>& edges) {
    std::fill(watched_.begin(), watched_.end(), 0);
    for (EdgeId e : edges) {
        lat_.check(e);
        watched_[e.v] = 1;
    }
}

int64_t CoupledChain::take_hits() {
    int64_t h = hits_;
    hits_ = 0;
    return h;
}

void CoupledChain::update(const EdgeId* edges, int count) {
    const double p = state_.lower.params.p, pp = state_.lower.params.p_pivotal();
    uint8_t* a = state_.lower.config.bits.data();
    uint8_t* b = state_.upper.config.bits.data();
    const int n = edges ? count : lat_.num_edges();
    // at q = 1 connectivity does not enter the update
    const bool flat = p == pp;
    for (int i = 0; i < n; ++i) {
        const int e = edges ? edges[i].v : i;
        double u = rng_.uniform();
        const bool skip = flat && !watched_[e];
        bool ja = skip || lo_.joined_without(a, EdgeId{e});
        bool jb = skip || hi_.joined_without(b, EdgeId{e});
        if (watched_[e] && jb && !ja)
            ++hits_;
        a[e] = u < (ja ? p : pp);
        b[e] = u < (jb ? p : pp);
        if (a[e] > b[e])
            throw std::logic_error("coupled chains lost their order at edge " + std::to_string(e));
    }
    if (!edges) {
        ++state_.lower.sweeps;
        ++state_.upper.sweeps;
        ++state_.sweeps;
    }
}

EstimateResult coupled_event_difference(CoupledChain& chain, const ConfigPredicate& event, int n,
                                        const CoupledSampling& sampling) {
    if (n <= 0)
        throw domain_error("coupled_event_difference needs n > 0");
    for (int i = 0; i < sampling.burn_in; ++i)
        chain.sweep();
    std::vector<std::vector<double>> series(1);
    series[0].reserve(n);
    for (int i = 0; i < n; ++i) {
        for (int s = 0; s < sampling.stride; ++s)
            chain.sweep();
        series[0].push_back(static_cast<double>(event(chain.upper())) - static_cast<double>(event(chain.lower())));
    }
    EstimateResult r = summarize(series);
    return r;
}

} // namespace fkmix
