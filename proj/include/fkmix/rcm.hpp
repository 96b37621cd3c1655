#pragma once

#include "fkmix/lattice.hpp"
#include "fkmix/rng.hpp"

#include <cstdint>
#include <vector>

namespace fkmix {

double critical_p(double q);
double kappa_of_q(double q);
double q_of_kappa(double kappa);

struct RcmParams {
    double q = 2.0;
    double p = 0.5;

    RcmParams() = default;
    RcmParams(double q_, double p_);
    static RcmParams critical(double q) { return RcmParams(q, critical_p(q)); }

    // Probability that a pivotal edge is open: p / (p + (1-p) q).
    double p_pivotal() const { return p / (p + (1.0 - p) * q); }
};

double log_weight(const BoxLattice& lat, const EdgeConfig& cfg, const BoundaryCondition& bc, const RcmParams& params);

// Conditional probability that e is open given the rest (plain BFS).
double heat_bath_prob(const BoxLattice& lat, const EdgeConfig& cfg, EdgeId e, const BoundaryCondition& bc,
                      const RcmParams& params);

// Answers "are the endpoints of e joined in cfg minus e" for free and wired
// boundary conditions by growing four searches in lockstep: one primal search
// from each endpoint and one dual search from each face next to e. The first
// search to meet its partner or to run dry decides the answer, so the cost is
// that of the smallest of the clusters involved. Partition conditions fall back
// to a plain BFS.
class ConnectivityOracle {
public:
    ConnectivityOracle(const BoxLattice& lat, const BoundaryCondition& bc);

    bool joined_without(const uint8_t* cfg, EdgeId e);
    uint64_t work() const { return work_; }

private:
    bool search(const uint8_t* c, int e);
    void new_epoch();

    const BoxLattice& lat_;
    BoundaryCondition bc_;
    bool wired_;
    std::vector<uint32_t> pmark_;
    std::vector<uint32_t> dmark_;
    uint32_t epoch_ = 0;
    std::vector<int> queue_[4];
    uint64_t work_ = 0;
};

struct ChainState {
    EdgeConfig config;
    BoundaryCondition bc = BoundaryCondition::free();
    RcmParams params;
    uint64_t stream_id = 0;
    uint64_t sweeps = 0;
};

ChainState make_chain(const BoxLattice& lat, const BoundaryCondition& bc, const RcmParams& params, bool all_open,
                      uint64_t stream_id = 0);

// One heat-bath update of every edge in ascending index order, one uniform per edge.
void glauber_sweep(const BoxLattice& lat, ChainState& state, Stream& rng);
void glauber_sweep(const BoxLattice& lat, ChainState& state, Stream& rng, ConnectivityOracle& oracle);

// Edwards-Sokal step for integer q in {2,3,4}, free or wired boundary.
void swendsen_wang_step(const BoxLattice& lat, ChainState& state, Stream& rng);

// Exact sample by monotone coupling from the past over heat-bath sweeps. The
// sweep run at time -t always uses block (t-1)*|E|/2 of stream (seed, stream_id),
// so restarts from further back reuse the same randomness.
EdgeConfig cftp_sample(const BoxLattice& lat, const BoundaryCondition& bc, const RcmParams& params, uint64_t seed,
                       uint64_t stream_id, int max_sweeps = 1 << 16, int* sweeps_used = nullptr);

struct Enumeration {
    std::vector<double> prob; // indexed by config bitmask, bit i = edge i
    double Z = 0.0;
    std::vector<double> marginal; // per edge
};

constexpr int kMaxEnumerationEdges = 24;

Enumeration enumerate_measure(const BoxLattice& lat, const BoundaryCondition& bc, const RcmParams& params);

EdgeConfig config_from_mask(const BoxLattice& lat, uint64_t mask);

} // namespace fkmix
