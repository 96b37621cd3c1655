#pragma once

#include "fkmix/rcm.hpp"
#include "fkmix/stats.hpp"

#include <functional>
#include <vector>

namespace fkmix {

struct CoupledState {
    ChainState lower; // free boundary
    ChainState upper; // wired boundary
    uint64_t sweeps = 0;
};

// lower all closed, upper all open.
CoupledState make_coupled(const BoxLattice& lat, const RcmParams& params, uint64_t stream_id = 0);

// One shared uniform per edge, ascending edge order; throws std::logic_error
// if the edgewise order lower <= upper is ever broken.
void coupled_sweep(const BoxLattice& lat, CoupledState& state, Stream& rng);

// The edge {(0,0),(1,0)} and its images under the symmetries of the box that fix the origin.
std::vector<EdgeId> origin_edges(const BoxLattice& lat);
// Edges with both ends in [-m,m]^2, ascending.
std::vector<EdgeId> window_edges(const BoxLattice& lat, int m);

// A coupled pair with its own stream and connectivity workspaces.
class CoupledChain {
public:
    CoupledChain(const BoxLattice& lat, const RcmParams& params, uint64_t seed, uint64_t chain_id);

    void sweep() { update(nullptr, 0); }
    // Heat-bath update of the listed edges in the given order.
    void sweep_edges(const std::vector<EdgeId>& edges) { update(edges.data(), static_cast<int>(edges.size())); }

    // Edges whose update is watched: watched_hits() counts watched updates in
    // which e is pivotal for the lower chain but not for the upper one. At such
    // an update E[upper_e - lower_e | rest] = p - p_pivotal; at any other it is 0.
    void watch(const std::vector<EdgeId>& edges);
    int64_t take_hits();

    const CoupledState& state() const { return state_; }
    const EdgeConfig& lower() const { return state_.lower.config; }
    const EdgeConfig& upper() const { return state_.upper.config; }
    Stream& rng() { return rng_; }
    uint64_t work() const { return lo_.work() + hi_.work(); }

private:
    void update(const EdgeId* edges, int count);

    const BoxLattice& lat_;
    CoupledState state_;
    Stream rng_;
    ConnectivityOracle lo_;
    ConnectivityOracle hi_;
    std::vector<uint8_t> watched_;
    int64_t hits_ = 0;
};

using ConfigPredicate = std::function<bool(const EdgeConfig&)>;

struct CoupledSampling {
    int burn_in = 100;
    int stride = 1;
};

// 1{event(upper)} - 1{event(lower)} over n subsampled coupled states.
EstimateResult coupled_event_difference(CoupledChain& chain, const ConfigPredicate& event, int n,
                                        const CoupledSampling& sampling = {});

} // namespace fkmix
