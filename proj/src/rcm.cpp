#include "fkmix/rcm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace fkmix {

double critical_p(double q) {
    if (!(q > 0))
        throw domain_error("critical_p needs q > 0");
    return std::sqrt(q) / (1.0 + std::sqrt(q));
}

double kappa_of_q(double q) {
    if (!(q > 0 && q <= 4))
        throw domain_error("kappa_of_q needs q in (0,4], got " + std::to_string(q));
    return 4.0 * std::numbers::pi / std::acos(-std::sqrt(q) / 2.0);
}

double q_of_kappa(double kappa) {
    if (!(kappa >= 4 && kappa < 8))
        throw domain_error("q_of_kappa needs kappa in [4,8), got " + std::to_string(kappa));
    double c = 2.0 * std::cos(4.0 * std::numbers::pi / kappa - std::numbers::pi);
    return c * c;
}

RcmParams::RcmParams(double q_, double p_) : q(q_), p(p_) {
    if (!(q > 0))
        throw domain_error("cluster weight q must be positive");
    if (!(p > 0 && p < 1))
        throw domain_error("edge weight p must lie in (0,1)");
}

double log_weight(const BoxLattice& lat, const EdgeConfig& cfg, const BoundaryCondition& bc, const RcmParams& params) {
    int open = cfg.open_count();
    int closed = cfg.size() - open;
    int k = cluster_count(lat, cfg, bc);
    return open * std::log(params.p) + closed * std::log1p(-params.p) + k * std::log(params.q);
}

double heat_bath_prob(const BoxLattice& lat, const EdgeConfig& cfg, EdgeId e, const BoundaryCondition& bc,
                      const RcmParams& params) {
    lat.check(e);
    auto [u, v] = lat.end_ids(e);
    return connected(lat, cfg, bc, u, v, e) ? params.p : params.p_pivotal();
}

ConnectivityOracle::ConnectivityOracle(const BoxLattice& lat, const BoundaryCondition& bc)
    : lat_(lat), bc_(bc), wired_(bc.kind() == BoundaryCondition::Kind::Wired),
      pmark_(lat.num_vertices() + 1, 0), dmark_(lat.num_dual_vertices() + 1, 0) {
    for (auto& q : queue_)
        q.reserve(lat.num_vertices() + 2);
}

void ConnectivityOracle::new_epoch() {
    ++epoch_;
    if (epoch_ >= 0x3fffffff) {
        std::fill(pmark_.begin(), pmark_.end(), 0);
        std::fill(dmark_.begin(), dmark_.end(), 0);
        epoch_ = 1;
    }
}

bool ConnectivityOracle::joined_without(const uint8_t* cfg, EdgeId e) {
    if (bc_.kind() == BoundaryCondition::Kind::Partition) {
        EdgeConfig c;
        c.bits.assign(cfg, cfg + lat_.num_edges());
        auto [u, v] = lat_.end_ids(e);
        return connected(lat_, c, bc_, u, v, e);
    }
    return search(cfg, e.v);
}

// Primal node ids: vertices, then S = the wired super-vertex.
// Dual node ids: dual vertices, then O = the single outer face of the free box.
bool ConnectivityOracle::search(const uint8_t* c, int e) {
    new_epoch();
    const int R = lat_.R(), L = lat_.side(), D1 = L + 1;
    const int nh = lat_.num_horizontal();
    const int S = lat_.num_vertices(), O = lat_.num_dual_vertices();
    const bool wired = wired_;
    const uint32_t st[4] = {4 * epoch_, 4 * epoch_ + 1, 4 * epoch_ + 2, 4 * epoch_ + 3};

    auto hedge = [&](int x, int y) { return (y + R) * (L - 1) + (x + R); };
    auto vedge = [&](int x, int y) { return nh + (y + R) * L + (x + R); };
    auto did = [&](int a, int b) { return (b + R + 1) * D1 + (a + R + 1); };
    auto outside = [&](int a, int b) { return a < -R || a >= R || b < -R || b >= R; };
    auto dnode = [&](int a, int b) { return (!wired && outside(a, b)) ? O : did(a, b); };
    auto boundary = [&](int x, int y) { return x == -R || x == R || y == -R || y == R; };

    int ax, ay, bx, by;
    if (e < nh) {
        ax = e % (L - 1) - R;
        ay = e / (L - 1) - R;
        bx = ax + 1;
        by = ay;
    } else {
        int k = e - nh;
        ax = k % L - R;
        ay = k / L - R;
        bx = ax;
        by = ay + 1;
    }
    if (wired && boundary(ax, ay) && boundary(bx, by))
        return true;
    int f1 = e < nh ? dnode(ax, ay - 1) : dnode(ax - 1, ay);
    int f2 = dnode(ax, ay);
    if (f1 == f2)
        return false;
    int u = (ay + R) * L + (ax + R), v = (by + R) * L + (bx + R);

    for (auto& q : queue_)
        q.clear();
    size_t head[4] = {0, 0, 0, 0};
    pmark_[u] = st[0];
    pmark_[v] = st[1];
    dmark_[f1] = st[2];
    dmark_[f2] = st[3];
    queue_[0].push_back(u);
    queue_[1].push_back(v);
    queue_[2].push_back(f1);
    queue_[3].push_back(f2);

    for (;;) {
        for (int i = 0; i < 4; ++i) {
            auto& q = queue_[i];
            if (head[i] == q.size())
                return i >= 2;
            int n = q[head[i]++];
            ++work_;
            const uint32_t me = st[i], other = st[i ^ 1];
            if (i < 2) {
                auto visit = [&](int w) {
                    if (pmark_[w] == other)
                        return true;
                    if (pmark_[w] != me) {
                        pmark_[w] = me;
                        q.push_back(w);
                    }
                    return false;
                };
                if (n == S) {
                    for (int t = -R; t <= R; ++t) {
                        if (visit((-R + R) * L + (t + R)) || visit((R + R) * L + (t + R)) ||
                            visit((t + R) * L + 0) || visit((t + R) * L + 2 * R))
                            return true;
                    }
                    continue;
                }
                int x = n % L - R, y = n / L - R;
                if (wired && boundary(x, y) && visit(S))
                    return true;
                int ed;
                if (x < R && (ed = hedge(x, y)) != e && c[ed] && visit(n + 1))
                    return true;
                if (x > -R && (ed = hedge(x - 1, y)) != e && c[ed] && visit(n - 1))
                    return true;
                if (y < R && (ed = vedge(x, y)) != e && c[ed] && visit(n + L))
                    return true;
                if (y > -R && (ed = vedge(x, y - 1)) != e && c[ed] && visit(n - L))
                    return true;
            } else {
                auto visit = [&](int w) {
                    if (dmark_[w] == other)
                        return true;
                    if (dmark_[w] != me) {
                        dmark_[w] = me;
                        q.push_back(w);
                    }
                    return false;
                };
                int ed;
                if (n == O) {
                    for (int t = -R; t < R; ++t) {
                        if ((ed = hedge(t, -R)) != e && !c[ed] && visit(did(t, -R)))
                            return false;
                        if ((ed = hedge(t, R)) != e && !c[ed] && visit(did(t, R - 1)))
                            return false;
                        if ((ed = vedge(-R, t)) != e && !c[ed] && visit(did(-R, t)))
                            return false;
                        if ((ed = vedge(R, t)) != e && !c[ed] && visit(did(R - 1, t)))
                            return false;
                    }
                    continue;
                }
                int a = n % D1 - R - 1, b = n / D1 - R - 1;
                if (outside(a, b)) {
                    // wired: an outer face touches the box along one boundary edge only
                    if (b == -R - 1 && a >= -R && a < R) {
                        if ((ed = hedge(a, -R)) != e && !c[ed] && visit(did(a, -R)))
                            return false;
                    } else if (b == R && a >= -R && a < R) {
                        if ((ed = hedge(a, R)) != e && !c[ed] && visit(did(a, R - 1)))
                            return false;
                    } else if (a == -R - 1 && b >= -R && b < R) {
                        if ((ed = vedge(-R, b)) != e && !c[ed] && visit(did(-R, b)))
                            return false;
                    } else if (a == R && b >= -R && b < R) {
                        if ((ed = vedge(R, b)) != e && !c[ed] && visit(did(R - 1, b)))
                            return false;
                    }
                    continue;
                }
                if ((ed = hedge(a, b + 1)) != e && !c[ed] && visit(dnode(a, b + 1)))
                    return false;
                if ((ed = hedge(a, b)) != e && !c[ed] && visit(dnode(a, b - 1)))
                    return false;
                if ((ed = vedge(a + 1, b)) != e && !c[ed] && visit(dnode(a + 1, b)))
                    return false;
                if ((ed = vedge(a, b)) != e && !c[ed] && visit(dnode(a - 1, b)))
                    return false;
            }
        }
    }
}

ChainState make_chain(const BoxLattice& lat, const BoundaryCondition& bc, const RcmParams& params, bool all_open,
                      uint64_t stream_id) {
    ChainState s;
    s.config = EdgeConfig(lat, all_open);
    s.bc = bc;
    s.params = params;
    s.stream_id = stream_id;
    return s;
}

void glauber_sweep(const BoxLattice& lat, ChainState& state, Stream& rng, ConnectivityOracle& oracle) {
    const double p = state.params.p, pp = state.params.p_pivotal();
    uint8_t* c = state.config.bits.data();
    const bool flat = p == pp;
    for (int e = 0; e < lat.num_edges(); ++e) {
        double u = rng.uniform();
        double pe = flat || oracle.joined_without(c, EdgeId{e}) ? p : pp;
        c[e] = u < pe ? 1 : 0;
    }
    ++state.sweeps;
}

void glauber_sweep(const BoxLattice& lat, ChainState& state, Stream& rng) {
    ConnectivityOracle oracle(lat, state.bc);
    glauber_sweep(lat, state, rng, oracle);
}

void swendsen_wang_step(const BoxLattice& lat, ChainState& state, Stream& rng) {
    double q = state.params.q;
    int qi = static_cast<int>(std::lround(q));
    if (q != qi || qi < 2 || qi > 4)
        throw domain_error("Swendsen-Wang needs integer q in {2,3,4}, got " + std::to_string(q));
    if (state.bc.kind() == BoundaryCondition::Kind::Partition)
        throw domain_error("Swendsen-Wang supports free and wired boundary conditions only");
    int nclusters = 0;
    auto label = cluster_labels(lat, state.config, state.bc, &nclusters);
    std::vector<int> color(nclusters);
    for (auto& col : color)
        col = static_cast<int>(rng.below(static_cast<uint32_t>(qi)));
    for (int e = 0; e < lat.num_edges(); ++e) {
        auto [a, b] = lat.end_ids(EdgeId{e});
        double u = rng.uniform();
        state.config.bits[e] = (color[label[a]] == color[label[b]] && u < state.params.p) ? 1 : 0;
    }
    ++state.sweeps;
}

EdgeConfig cftp_sample(const BoxLattice& lat, const BoundaryCondition& bc, const RcmParams& params, uint64_t seed,
                       uint64_t stream_id, int max_sweeps, int* sweeps_used) {
    if (params.q < 1)
        throw domain_error("coupling from the past needs q >= 1");
    const uint64_t blocks_per_sweep = static_cast<uint64_t>(lat.num_edges()) / 2;
    ConnectivityOracle lo_oracle(lat, bc), hi_oracle(lat, bc);
    Stream rng(seed, stream_id);
    const double p = params.p, pp = params.p_pivotal();
    for (int T = 1; T <= max_sweeps; T *= 2) {
        EdgeConfig lo(lat, false), hi(lat, true);
        for (int t = T; t >= 1; --t) {
            rng.seek(static_cast<uint64_t>(t - 1) * blocks_per_sweep);
            for (int e = 0; e < lat.num_edges(); ++e) {
                double u = rng.uniform();
                double pl = lo_oracle.joined_without(lo.bits.data(), EdgeId{e}) ? p : pp;
                double ph = hi_oracle.joined_without(hi.bits.data(), EdgeId{e}) ? p : pp;
                lo.bits[e] = u < pl;
                hi.bits[e] = u < ph;
            }
        }
        if (lo == hi) {
            if (sweeps_used)
                *sweeps_used = T;
            return lo;
        }
    }
    throw resource_error("coupling from the past did not coalesce within " + std::to_string(max_sweeps) + " sweeps");
}

EdgeConfig config_from_mask(const BoxLattice& lat, uint64_t mask) {
    EdgeConfig c(lat, false);
    for (int e = 0; e < lat.num_edges(); ++e)
        c.bits[e] = (mask >> e) & 1;
    return c;
}

Enumeration enumerate_measure(const BoxLattice& lat, const BoundaryCondition& bc, const RcmParams& params) {
    const int E = lat.num_edges();
    if (E > kMaxEnumerationEdges)
        throw resource_error("enumeration limited to " + std::to_string(kMaxEnumerationEdges) + " edges, lattice has " +
                             std::to_string(E));
    const uint64_t n = uint64_t{1} << E;
    Enumeration out;
    out.prob.resize(n);
    out.marginal.assign(E, 0.0);
    double lp = std::log(params.p), lq = std::log1p(-params.p), lk = std::log(params.q);
    for (uint64_t m = 0; m < n; ++m) {
        EdgeConfig c = config_from_mask(lat, m);
        int open = std::popcount(m);
        int k = cluster_count(lat, c, bc);
        out.prob[m] = std::exp(open * lp + (E - open) * lq + k * lk);
    }
    double Z = 0.0;
    for (double w : out.prob)
        Z += w;
    out.Z = Z;
    for (uint64_t m = 0; m < n; ++m) {
        out.prob[m] /= Z;
        for (int e = 0; e < E; ++e)
            if ((m >> e) & 1)
                out.marginal[e] += out.prob[m];
    }
    return out;
}

} // namespace fkmix
