#include <doctest.h>

#include "fkmix/coupling.hpp"
#include "fkmix/rcm.hpp"

#include <cmath>

using namespace fkmix;

namespace {

bool below(const EdgeConfig& a, const EdgeConfig& b) {
    for (int i = 0; i < a.size(); ++i)
        if (a.bits[i] > b.bits[i])
            return false;
    return true;
}

} // namespace

TEST_CASE("origin edges and refresh windows") {
    BoxLattice lat(5);
    auto o = origin_edges(lat);
    REQUIRE(o.size() == 4);
    for (EdgeId e : o) {
        auto [a, b] = lat.ends(e);
        CHECK(((a == Point{0, 0}) || (b == Point{0, 0})));
    }
    for (int m : {1, 3, 5}) {
        auto w = window_edges(lat, m);
        CHECK(static_cast<int>(w.size()) == 2 * (2 * m + 1) * 2 * m);
        for (size_t i = 1; i < w.size(); ++i)
            CHECK(w[i - 1].v < w[i].v);
    }
    CHECK_THROWS_AS(window_edges(lat, 6), domain_error);
    CHECK_THROWS_AS(window_edges(lat, 0), domain_error);
}

TEST_CASE("at q = 1 the pair coalesces in one sweep") {
    BoxLattice lat(6);
    auto params = RcmParams::critical(1.0);
    CoupledState s = make_coupled(lat, params);
    CHECK(s.lower.config.open_count() == 0);
    CHECK(s.upper.config.open_count() == lat.num_edges());
    Stream rng(4, 0);
    coupled_sweep(lat, s, rng);
    CHECK(s.lower.config == s.upper.config);
    CHECK(s.sweeps == 1);
}

TEST_CASE("order is kept over many sweeps") {
    BoxLattice lat(4);
    for (double q : {2.0, 3.0, 4.0}) {
        CoupledState s = make_coupled(lat, RcmParams::critical(q));
        Stream rng(5, static_cast<uint64_t>(q));
        bool ok = true;
        for (int i = 0; i < 10000 && ok; ++i) {
            coupled_sweep(lat, s, rng);
            ok = below(s.lower.config, s.upper.config);
        }
        CHECK(ok);
    }
    BoxLattice big(12);
    CoupledChain chain(big, RcmParams::critical(2.0), 6, 0);
    auto win = window_edges(big, 4);
    for (int i = 0; i < 200; ++i) {
        chain.sweep();
        chain.sweep_edges(win);
        REQUIRE(below(chain.lower(), chain.upper()));
    }
}

TEST_CASE("coupled marginals match independent chains") {
    BoxLattice lat(4);
    auto params = RcmParams::critical(2.0);
    CoupledChain chain(lat, params, 7, 0);
    ChainState free_chain = make_chain(lat, BoundaryCondition::free(), params, false);
    ChainState wired_chain = make_chain(lat, BoundaryCondition::wired(), params, true);
    Stream rf(8, 0), rw(9, 0);
    const int burn = 200, n = 30000;
    for (int i = 0; i < burn; ++i) {
        chain.sweep();
        glauber_sweep(lat, free_chain, rf);
        glauber_sweep(lat, wired_chain, rw);
    }
    std::vector<double> cl, cu, il, iu;
    for (int i = 0; i < n; ++i) {
        chain.sweep();
        glauber_sweep(lat, free_chain, rf);
        glauber_sweep(lat, wired_chain, rw);
        cl.push_back(chain.lower().open_count());
        cu.push_back(chain.upper().open_count());
        il.push_back(free_chain.config.open_count());
        iu.push_back(wired_chain.config.open_count());
    }
    auto a = summarize({cl}), b = summarize({il});
    CHECK(std::abs(a.mean - b.mean) < 4 * std::hypot(a.stderr_, b.stderr_));
    a = summarize({cu}), b = summarize({iu});
    CHECK(std::abs(a.mean - b.mean) < 4 * std::hypot(a.stderr_, b.stderr_));
}

TEST_CASE("watched hits and event differences reproduce the exact gap") {
    BoxLattice lat(1);
    auto params = RcmParams::critical(2.0);
    EdgeId e0 = lat.horizontal(0, 0);
    double exact = enumerate_measure(lat, BoundaryCondition::wired(), params).marginal[e0.v] -
                   enumerate_measure(lat, BoundaryCondition::free(), params).marginal[e0.v];

    CoupledChain chain(lat, params, 10, 0);
    chain.watch(origin_edges(lat));
    for (int i = 0; i < 100; ++i)
        chain.sweep();
    chain.take_hits();
    std::vector<double> series;
    for (int i = 0; i < 40000; ++i) {
        chain.sweep();
        series.push_back(static_cast<double>(chain.take_hits()) * (params.p - params.p_pivotal()) / 4.0);
    }
    auto rb = summarize({series});
    CHECK(std::abs(rb.mean - exact) < 4 * rb.stderr_);

    CoupledChain other(lat, params, 11, 0);
    auto diff = coupled_event_difference(other, [&](const EdgeConfig& c) { return c[e0]; }, 40000);
    CHECK(diff.n_raw == 40000);
    CHECK(std::abs(diff.mean - exact) < 4 * diff.stderr_);
}

TEST_CASE("coupled chains are reproducible") {
    BoxLattice lat(6);
    auto params = RcmParams::critical(3.0);
    CoupledChain a(lat, params, 12, 3), b(lat, params, 12, 3), c(lat, params, 12, 4);
    for (int i = 0; i < 30; ++i) {
        a.sweep();
        b.sweep();
        c.sweep();
    }
    CHECK(a.lower() == b.lower());
    CHECK(a.upper() == b.upper());
    CHECK(a.rng().cursor() == b.rng().cursor());
    CHECK_FALSE(a.upper() == c.upper());
}
