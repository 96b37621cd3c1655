#include <doctest.h>

#include "fkmix/rcm.hpp"
#include "helpers.hpp"

#include <cmath>
#include <numeric>

using namespace fkmix;

TEST_CASE("critical point and the q-kappa map") {
    CHECK(critical_p(1.0) == doctest::Approx(0.5));
    CHECK(critical_p(2.0) == doctest::Approx(std::sqrt(2.0) / (1 + std::sqrt(2.0))));
    CHECK(critical_p(4.0) == doctest::Approx(2.0 / 3));
    CHECK(kappa_of_q(1.0) == doctest::Approx(6.0));
    CHECK(kappa_of_q(2.0) == doctest::Approx(16.0 / 3));
    CHECK(kappa_of_q(3.0) == doctest::Approx(24.0 / 5));
    CHECK(kappa_of_q(4.0) == doctest::Approx(4.0));
    for (double q : {0.3, 1.0, 1.7, 2.5, 3.9})
        CHECK(q_of_kappa(kappa_of_q(q)) == doctest::Approx(q).epsilon(1e-12));
    CHECK_THROWS_AS(kappa_of_q(4.5), domain_error);
    CHECK_THROWS_AS(q_of_kappa(8.0), domain_error);
    CHECK_THROWS_AS(RcmParams(0.0, 0.5), domain_error);
    CHECK_THROWS_AS(RcmParams(2.0, 1.0), domain_error);
    auto pc = RcmParams::critical(2.0);
    // at the self-dual point a pivotal edge is open with probability 1 - p
    CHECK(pc.p_pivotal() == doctest::Approx(1.0 - pc.p));
}

TEST_CASE("lockstep oracle agrees with plain search") {
    Stream rng(23, 0);
    auto params = RcmParams::critical(2.0);
    for (int trial = 0; trial < 40; ++trial) {
        BoxLattice lat(2 + trial % 7);
        EdgeConfig cfg = testing::random_config(lat, 0.3 + 0.01 * trial, rng);
        for (auto bc : {BoundaryCondition::free(), BoundaryCondition::wired()}) {
            ConnectivityOracle oracle(lat, bc);
            for (int e = 0; e < lat.num_edges(); ++e) {
                double hb = heat_bath_prob(lat, cfg, EdgeId{e}, bc, params);
                bool joined = oracle.joined_without(cfg.bits.data(), EdgeId{e});
                REQUIRE(hb == (joined ? params.p : params.p_pivotal()));
            }
        }
    }
}

TEST_CASE("heat-bath probability matches weight ratios") {
    Stream rng(29, 0);
    BoxLattice lat(3);
    RcmParams params(2.7, 0.55);
    auto bc = BoundaryCondition::wired();
    EdgeConfig cfg = testing::random_config(lat, 0.5, rng);
    for (int e = 0; e < lat.num_edges(); ++e) {
        EdgeConfig open = cfg, closed = cfg;
        open.set(EdgeId{e}, true);
        closed.set(EdgeId{e}, false);
        double ratio = std::exp(log_weight(lat, open, bc, params) - log_weight(lat, closed, bc, params));
        CHECK(heat_bath_prob(lat, cfg, EdgeId{e}, bc, params) == doctest::Approx(ratio / (1 + ratio)));
    }
}

namespace {

// weight p^o (1-p)^c q^k with clusters counted by a local union-find
struct Brute {
    std::vector<double> marginal;
    double Z = 0;
};

int find(std::vector<int>& par, int a) {
    while (par[a] != a)
        a = par[a] = par[par[a]];
    return a;
}

Brute brute_force(const BoxLattice& lat, bool wired, double q, double p) {
    int n = lat.num_vertices(), m = lat.num_edges();
    Brute out;
    out.marginal.assign(m, 0.0);
    for (uint64_t mask = 0; mask < (uint64_t{1} << m); ++mask) {
        std::vector<int> par(n + 1);
        std::iota(par.begin(), par.end(), 0);
        int k = wired ? n + 1 : n;
        auto join = [&](int a, int b) {
            a = find(par, a), b = find(par, b);
            if (a != b) {
                par[a] = b;
                --k;
            }
        };
        if (wired)
            for (int v = 0; v < n; ++v) {
                Point pt = lat.point(v);
                if (std::abs(pt.x) == lat.R() || std::abs(pt.y) == lat.R())
                    join(v, n);
            }
        int open = 0;
        for (int e = 0; e < m; ++e)
            if (mask >> e & 1) {
                auto [a, b] = lat.ends(EdgeId{e});
                join(lat.vertex(a), lat.vertex(b));
                ++open;
            }
        double w = std::pow(p, open) * std::pow(1 - p, m - open) * std::pow(q, k);
        out.Z += w;
        for (int e = 0; e < m; ++e)
            if (mask >> e & 1)
                out.marginal[e] += w;
    }
    for (double& x : out.marginal)
        x /= out.Z;
    return out;
}

} // namespace

TEST_CASE("enumeration matches a brute-force sum") {
    BoxLattice lat(1);
    for (double q : {1.0, 2.0, 3.5}) {
        auto params = RcmParams::critical(q);
        for (bool wired : {false, true}) {
            auto bc = wired ? BoundaryCondition::wired() : BoundaryCondition::free();
            auto en = enumerate_measure(lat, bc, params);
            auto ref = brute_force(lat, wired, q, params.p);
            double total = std::accumulate(en.prob.begin(), en.prob.end(), 0.0);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            for (int e = 0; e < lat.num_edges(); ++e)
                CHECK(en.marginal[e] == doctest::Approx(ref.marginal[e]).epsilon(1e-12));
        }
    }
    // Delta(1) for the Ising-FK model is strictly positive and the same for all four origin edges
    auto params = RcmParams::critical(2.0);
    auto f = brute_force(lat, false, 2.0, params.p), w = brute_force(lat, true, 2.0, params.p);
    double d0 = w.marginal[lat.horizontal(0, 0).v] - f.marginal[lat.horizontal(0, 0).v];
    CHECK(d0 > 0.01);
    for (EdgeId e : {lat.horizontal(-1, 0), lat.vertical(0, 0), lat.vertical(0, -1)})
        CHECK(w.marginal[e.v] - f.marginal[e.v] == doctest::Approx(d0).epsilon(1e-12));
    CHECK(config_from_mask(lat, 0b101).open_count() == 2);
}

TEST_CASE("enumeration refuses large boxes") {
    CHECK_THROWS_AS(enumerate_measure(BoxLattice(2), BoundaryCondition::free(), RcmParams::critical(2.0)),
                    resource_error);
}

TEST_CASE("samplers reproduce exact marginals on the smallest box") {
    BoxLattice lat(1);
    auto params = RcmParams::critical(2.0);
    for (bool wired : {false, true}) {
        auto bc = wired ? BoundaryCondition::wired() : BoundaryCondition::free();
        auto en = enumerate_measure(lat, bc, params);
        EdgeId e0 = lat.horizontal(0, 0);
        double exact = en.marginal[e0.v];
        const int n = 40000;

        Stream rng(100 + wired, 0);
        ChainState hb = make_chain(lat, bc, params, false);
        double hits = 0;
        for (int i = 0; i < 200; ++i)
            glauber_sweep(lat, hb, rng);
        for (int i = 0; i < n; ++i) {
            glauber_sweep(lat, hb, rng);
            hits += hb.config[e0];
        }
        // a handful of sweeps decorrelate this box, allow for it
        double sd = std::sqrt(exact * (1 - exact) / n) * 2;
        CHECK(std::abs(hits / n - exact) < 4 * sd);

        ChainState sw = make_chain(lat, bc, params, true);
        hits = 0;
        for (int i = 0; i < n; ++i) {
            swendsen_wang_step(lat, sw, rng);
            hits += sw.config[e0];
        }
        CHECK(std::abs(hits / n - exact) < 4 * sd);

        const int m = 4000;
        hits = 0;
        for (int i = 0; i < m; ++i)
            hits += cftp_sample(lat, bc, params, 7, static_cast<uint64_t>(i))[e0];
        double sd1 = std::sqrt(exact * (1 - exact) / m);
        CHECK(std::abs(hits / m - exact) < 4 * sd1);
    }
}

TEST_CASE("sweeps are deterministic and the oracle overload matches") {
    BoxLattice lat(6);
    auto params = RcmParams::critical(3.0);
    for (auto bc : {BoundaryCondition::free(), BoundaryCondition::wired()}) {
        ChainState a = make_chain(lat, bc, params, true), b = a;
        Stream ra(9, 4), rb(9, 4);
        ConnectivityOracle oracle(lat, bc);
        for (int i = 0; i < 20; ++i) {
            glauber_sweep(lat, a, ra);
            glauber_sweep(lat, b, rb, oracle);
        }
        CHECK(a.config == b.config);
        CHECK(a.sweeps == 20);
    }
}

TEST_CASE("sampler argument checks") {
    BoxLattice lat(2);
    ChainState s = make_chain(lat, BoundaryCondition::free(), RcmParams::critical(1.5), false);
    Stream rng(1, 1);
    CHECK_THROWS_AS(swendsen_wang_step(lat, s, rng), domain_error);
    CHECK_THROWS_AS(cftp_sample(lat, BoundaryCondition::free(), RcmParams::critical(0.5), 1, 0), domain_error);
    CHECK_THROWS_AS(cftp_sample(BoxLattice(6), BoundaryCondition::free(), RcmParams::critical(2.0), 1, 0, 1),
                    resource_error);
}
