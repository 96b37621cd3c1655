#include <doctest.h>

#include "fkmix/coupling.hpp"
#include "fkmix/events.hpp"
#include "fkmix/rcm.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

using namespace fkmix;
using fkmix::testing::random_config;
using fkmix::testing::random_two_phase;
using fkmix::testing::disc;
using fkmix::testing::ring;

namespace {

constexpr auto kFree = BoundaryCondition::Kind::Free;
constexpr auto kWired = BoundaryCondition::Kind::Wired;

// The mirror-image algorithm: flood faces inward from outside the annulus,
// blocked by open primal edges of the annulus (this stops at the outermost
// primal circuit), then look for a dual circuit among the faces left over.
bool event_A_from_outside(const BoxLattice& lat, const EdgeConfig& cfg, const AnnulusSpec& ann) {
    auto face_norm2 = [](int a, int b) { return std::max(std::abs(2 * a + 1), std::abs(2 * b + 1)); };
    auto in_p = [&](int x, int y) { return in_annulus_primal(ann, x, y); };
    std::vector<uint8_t> outside(lat.num_dual_vertices(), 0);
    std::vector<int> queue;
    for (int f = 0; f < lat.num_dual_vertices(); ++f) {
        Point p = lat.dual_point(f);
        if (face_norm2(p.x, p.y) > 2 * ann.r_outer) {
            outside[f] = 1;
            queue.push_back(f);
        }
    }
    for (size_t h = 0; h < queue.size(); ++h) {
        Point p = lat.dual_point(queue[h]);
        if (face_norm2(p.x, p.y) < 2 * ann.r_inner)
            return false;
        const int da[4] = {1, 0, -1, 0}, db[4] = {0, 1, 0, -1};
        for (int d = 0; d < 4; ++d) {
            int a = p.x + da[d], b = p.y + db[d];
            if (a < -lat.R() - 1 || a > lat.R() || b < -lat.R() - 1 || b > lat.R())
                continue;
            // primal edge between the two faces
            Point u, v;
            if (d == 0) u = {p.x + 1, p.y}, v = {p.x + 1, p.y + 1};
            if (d == 2) u = {p.x, p.y}, v = {p.x, p.y + 1};
            if (d == 1) u = {p.x, p.y + 1}, v = {p.x + 1, p.y + 1};
            if (d == 3) u = {p.x, p.y}, v = {p.x + 1, p.y};
            if (lat.contains(u.x, u.y) && lat.contains(v.x, v.y) && in_p(u.x, u.y) && in_p(v.x, v.y)) {
                EdgeId e = u.x == v.x ? lat.vertical(u.x, u.y) : lat.horizontal(u.x, u.y);
                if (cfg[e])
                    continue;
            }
            int f = lat.dual_vertex(a, b);
            if (!outside[f]) {
                outside[f] = 1;
                queue.push_back(f);
            }
        }
    }
    // dual circuit among faces not reached: open every primal edge next to a
    // reached face so that no dual path can use it
    EdgeConfig masked = cfg;
    for (int e = 0; e < lat.num_edges(); ++e) {
        auto [f1, f2] = lat.faces(EdgeId{e});
        if (outside[f1] || outside[f2])
            masked.bits[e] = 1;
    }
    return has_noncontractible_circuit(lat, masked, ann, Side::Dual);
}

double signed_area2(const Loop& l) {
    double s = 0;
    for (size_t i = 0, j = l.corners.size() - 1; i < l.corners.size(); j = i++)
        s += static_cast<double>(l.corners[j].x) * l.corners[i].y - static_cast<double>(l.corners[i].x) * l.corners[j].y;
    return s;
}

int dual_cluster_count(const BoxLattice& lat, const EdgeConfig& cfg, bool merge_outside) {
    UnionFind uf(lat.num_dual_vertices());
    int outer = -1;
    for (int f = 0; f < lat.num_dual_vertices(); ++f) {
        Point p = lat.dual_point(f);
        if (lat.dual_outside(p.x, p.y) && merge_outside) {
            if (outer < 0)
                outer = f;
            uf.unite(outer, f);
        }
    }
    for (int e = 0; e < lat.num_edges(); ++e) {
        if (cfg.bits[e])
            continue;
        auto [f1, f2] = lat.faces(EdgeId{e});
        uf.unite(f1, f2);
    }
    return uf.components();
}

} // namespace

TEST_CASE("horizontal crossings") {
    BoxLattice lat(4);
    Rect rect{-2, -1, 2, 1};
    CHECK(has_horizontal_crossing(lat, EdgeConfig(lat, true), rect));
    CHECK_FALSE(has_horizontal_crossing(lat, EdgeConfig(lat, false), rect));
    EdgeConfig line(lat, false);
    for (int x = -2; x < 2; ++x)
        line.set(lat.horizontal(x, 0), true);
    CHECK(has_horizontal_crossing(lat, line, rect));
    line.set(lat.horizontal(0, 0), false);
    CHECK_FALSE(has_horizontal_crossing(lat, line, rect));
    // a detour outside the rectangle does not count
    line.set(lat.vertical(0, 0), true);
    line.set(lat.vertical(1, 0), true);
    line.set(lat.vertical(0, 1), true);
    line.set(lat.vertical(1, 1), true);
    line.set(lat.horizontal(0, 2), true);
    CHECK_FALSE(has_horizontal_crossing(lat, line, rect));
    CHECK(has_horizontal_crossing(lat, line, Rect{-2, -1, 2, 2}));
    CHECK_THROWS_AS(has_horizontal_crossing(lat, line, Rect{1, 0, 1, 2}), domain_error);
    CHECK_THROWS_AS(has_horizontal_crossing(lat, line, Rect{-5, 0, 1, 2}), domain_error);
}

TEST_CASE("non-contractible circuits") {
    BoxLattice lat(6);
    AnnulusSpec ann{1, 5};
    for (int rho = 2; rho <= 5; ++rho) {
        EdgeConfig c = ring(lat, rho);
        CHECK(has_noncontractible_circuit(lat, c, ann, Side::Primal));
        c.set(lat.horizontal(0, rho), false);
        CHECK_FALSE(has_noncontractible_circuit(lat, c, ann, Side::Primal));
    }
    // a ring on the inner boundary is not in the annulus
    CHECK_FALSE(has_noncontractible_circuit(lat, ring(lat, 1), ann, Side::Primal));
    CHECK_FALSE(has_noncontractible_circuit(lat, ring(lat, 6), ann, Side::Primal));
    CHECK_FALSE(has_noncontractible_circuit(lat, EdgeConfig(lat, false), ann, Side::Primal));
    CHECK(has_noncontractible_circuit(lat, EdgeConfig(lat, false), ann, Side::Dual));
    CHECK_FALSE(has_noncontractible_circuit(lat, EdgeConfig(lat, true), ann, Side::Dual));
    CHECK(has_noncontractible_circuit(lat, EdgeConfig(lat, true), ann, Side::Primal));
    // a contractible loop of open edges is not enough
    EdgeConfig sq(lat, false);
    sq.set(lat.horizontal(3, 3), true);
    sq.set(lat.horizontal(3, 4), true);
    sq.set(lat.vertical(3, 3), true);
    sq.set(lat.vertical(4, 3), true);
    CHECK_FALSE(has_noncontractible_circuit(lat, sq, ann, Side::Primal));
    CHECK_THROWS_AS(has_noncontractible_circuit(lat, sq, AnnulusSpec{2, 7}, Side::Primal), domain_error);
}

TEST_CASE("circuit detection agrees with the dual crossing") {
    SUBCASE("exhaustive over 8 edges of a tiny annulus") {
        BoxLattice lat(3);
        AnnulusSpec ann{1, 3};
        Stream rng(5, 1);
        EdgeConfig base = random_config(lat, 0.85, rng);
        std::vector<EdgeId> free_edges;
        for (int x = 1; x <= 2; ++x)
            for (int y = -2; y <= 1; ++y)
                free_edges.push_back(lat.vertical(x, y));
        REQUIRE(free_edges.size() == 8);
        int found = 0;
        for (int mask = 0; mask < 256; ++mask) {
            EdgeConfig c = base;
            for (int i = 0; i < 8; ++i)
                c.set(free_edges[i], (mask >> i) & 1);
            bool a = has_noncontractible_circuit(lat, c, ann, Side::Primal);
            REQUIRE(a == has_primal_circuit_by_dual_crossing(lat, c, ann));
            found += a;
        }
        CHECK(found > 0);
        CHECK(found < 256);
    }
    SUBCASE("random configurations") {
        BoxLattice lat(7);
        Stream rng(6, 2);
        int found = 0;
        for (int i = 0; i < 1000; ++i) {
            double p = 0.3 + 0.4 * (i % 11) / 10.0;
            EdgeConfig c = random_config(lat, p, rng);
            AnnulusSpec ann{1 + i % 3, 4 + i % 4};
            bool a = has_noncontractible_circuit(lat, c, ann, Side::Primal);
            REQUIRE(a == has_primal_circuit_by_dual_crossing(lat, c, ann));
            found += a;
        }
        CHECK(found > 30);
        CHECK(found < 970);
    }
}

TEST_CASE("event A on constructed configurations") {
    BoxLattice lat(8);
    AnnulusSpec ann{2, 7};
    // dual circuit at radius 3.5: close every edge crossing the ring of faces there
    EdgeConfig nested(lat, true);
    for (int e = 0; e < lat.num_edges(); ++e) {
        auto [u, v] = lat.ends(EdgeId{e});
        int nu = std::max(std::abs(u.x), std::abs(u.y)), nv = std::max(std::abs(v.x), std::abs(v.y));
        if ((nu == 3 && nv == 4) || (nu == 4 && nv == 3))
            nested.bits[e] = 0;
    }
    CHECK(event_A(lat, nested, ann));
    CHECK(event_A_from_outside(lat, nested, ann));
    CHECK(event_A_via_loops(lat, nested, kFree, ann));
    CHECK(event_A_via_loops(lat, nested, kWired, ann));

    CHECK_FALSE(event_A(lat, EdgeConfig(lat, true), ann));
    CHECK_FALSE(event_A_via_loops(lat, EdgeConfig(lat, true), kFree, ann));
    CHECK_FALSE(event_A(lat, EdgeConfig(lat, false), ann));
    // primal circuit only
    CHECK_FALSE(event_A(lat, disc(lat, 5), ann));
    CHECK_FALSE(event_A_via_loops(lat, disc(lat, 5), kWired, ann));
    // an inner ring leaves room for a dual circuit inside it
    CHECK(event_A(lat, ring(lat, 5), ann));

    // dual circuits only outside the primal circuit
    EdgeConfig wrong = disc(lat, 3);
    CHECK_FALSE(event_A(lat, wrong, ann));
    CHECK_FALSE(event_A_from_outside(lat, wrong, ann));
    // primal circuit, then dual circuit, then primal circuit again: true through the outer pair
    EdgeConfig three = ring(lat, 3);
    for (int e = 0; e < lat.num_edges(); ++e) {
        auto [u, v] = lat.ends(EdgeId{e});
        int nu = std::max(std::abs(u.x), std::abs(u.y)), nv = std::max(std::abs(v.x), std::abs(v.y));
        if (nu == 6 && nv == 6)
            three.bits[e] = 1;
    }
    CHECK(event_A(lat, three, ann));
    CHECK(event_A_from_outside(lat, three, ann));
    CHECK(event_A_via_loops(lat, three, kFree, ann));
    CHECK(event_A_via_loops(lat, three, kWired, ann));
}

TEST_CASE("event A agrees with the outside-in algorithm and with loop parity") {
    BoxLattice lat(9);
    Stream rng(8, 3);
    int hits = 0;
    for (int i = 0; i < 600; ++i) {
        // sparse inside, dense outside, so that A happens often
        AnnulusSpec ann{1 + i % 4, 5 + i % 5};
        int split = ann.r_inner + 1 + static_cast<int>(rng.below(ann.r_outer - ann.r_inner));
        EdgeConfig c = random_two_phase(lat, split, 0.1 + 0.1 * (i % 3), 0.9 - 0.1 * (i % 2), rng);
        bool a = event_A(lat, c, ann);
        REQUIRE(a == event_A_from_outside(lat, c, ann));
        REQUIRE(a == event_A_via_loops(lat, c, kFree, ann));
        REQUIRE(a == event_A_via_loops(lat, c, kWired, ann));
        hits += a;
    }
    CHECK(hits > 30);
}

TEST_CASE("loops use every corner once") {
    Stream rng(9, 4);
    for (int R : {1, 2, 5}) {
        BoxLattice lat(R);
        for (int i = 0; i < 40; ++i) {
            EdgeConfig c = random_config(lat, 0.5, rng);
            for (auto bc : {kFree, kWired}) {
                LoopSet set = extract_loops(lat, c, bc);
                std::set<std::pair<int, int>> seen;
                size_t total = set.outer_corners;
                for (const Loop& l : set.loops) {
                    total += l.corners.size();
                    for (Point p : l.corners)
                        seen.insert({p.x, p.y});
                }
                CHECK(total == static_cast<size_t>(set.corner_count));
                CHECK(seen.size() + set.outer_corners == static_cast<size_t>(set.corner_count));
            }
        }
    }
}

TEST_CASE("loop count equals primal plus dual clusters minus one") {
    Stream rng(10, 5);
    for (int R : {1, 3, 6}) {
        BoxLattice lat(R);
        for (int i = 0; i < 50; ++i) {
            EdgeConfig c = random_config(lat, 0.2 + 0.6 * (i % 5) / 4.0, rng);
            int kf = cluster_count(lat, c, BoundaryCondition::free());
            int kw = cluster_count(lat, c, BoundaryCondition::wired());
            CHECK(extract_loops(lat, c, kFree).loops.size() ==
                  static_cast<size_t>(kf + dual_cluster_count(lat, c, true) - 1));
            CHECK(extract_loops(lat, c, kWired).loops.size() ==
                  static_cast<size_t>(kw + dual_cluster_count(lat, c, false) - 1));
        }
    }
}

TEST_CASE("simple loop configurations") {
    BoxLattice lat(4);
    LoopSet closed = extract_loops(lat, EdgeConfig(lat, false), kFree);
    CHECK(closed.loops.size() == static_cast<size_t>(lat.num_vertices()));
    for (const Loop& l : closed.loops) {
        CHECK(l.corners.size() == 4);
        CHECK(l.level == 1);
    }
    CHECK(loops_around_origin(closed) == 0);
    // wired: the fused boundary cluster has one inner interface around everything
    CHECK(loops_around_origin(extract_loops(lat, EdgeConfig(lat, false), kWired)) == 1);

    LoopSet one = extract_loops(lat, ring(lat, 2), kFree);
    std::vector<int> levels;
    for (const Loop& l : one.loops)
        if (l.around_origin)
            levels.push_back(l.level);
    std::sort(levels.begin(), levels.end());
    CHECK(levels == std::vector<int>{1, 2});

    EdgeConfig two = ring(lat, 1);
    for (int e = 0; e < lat.num_edges(); ++e)
        two.bits[e] |= ring(lat, 3).bits[e];
    LoopSet nested = extract_loops(lat, two, kFree);
    CHECK(loops_around_origin(nested) == 4);
    nesting_levels(nested);
    levels.clear();
    for (const Loop& l : nested.loops)
        if (l.around_origin)
            levels.push_back(l.level);
    std::sort(levels.begin(), levels.end());
    CHECK(levels == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("polygon nesting matches the cluster tree") {
    Stream rng(11, 6);
    for (int R : {2, 5, 8}) {
        BoxLattice lat(R);
        for (int i = 0; i < 30; ++i) {
            EdgeConfig c = random_config(lat, 0.3 + 0.4 * (i % 3) / 2.0, rng);
            for (auto bc : {kFree, kWired}) {
                LoopSet set = extract_loops(lat, c, bc);
                std::vector<int> tree;
                for (const Loop& l : set.loops)
                    tree.push_back(l.level);
                nesting_levels(set);
                for (size_t k = 0; k < set.loops.size(); ++k)
                    REQUIRE(set.loops[k].level == tree[k]);
            }
        }
    }
}

TEST_CASE("level parity tells which side the primal cluster is on") {
    // loops keep the primal cluster on their left, so a counterclockwise loop
    // is the outer interface of a primal cluster
    Stream rng(12, 7);
    BoxLattice lat(6);
    for (int i = 0; i < 40; ++i) {
        EdgeConfig c = random_config(lat, 0.5, rng);
        for (const Loop& l : extract_loops(lat, c, kFree).loops)
            REQUIRE((signed_area2(l) > 0) == (l.level % 2 == 1));
        for (const Loop& l : extract_loops(lat, c, kWired).loops)
            REQUIRE((signed_area2(l) > 0) == (l.level % 2 == 0));
    }
}

TEST_CASE("loop count around the origin has the parity of the edge state") {
    Stream rng(13, 8);
    for (int R : {1, 4, 7}) {
        BoxLattice lat(R);
        const EdgeId e = lat.horizontal(0, 0);
        for (int i = 0; i < 60; ++i) {
            EdgeConfig c = random_config(lat, 0.5, rng);
            int lf = loops_around_origin(extract_loops(lat, c, kFree));
            int lw = loops_around_origin(extract_loops(lat, c, kWired));
            CHECK(lf % 2 == (c[e] ? 1 : 0));
            CHECK(lw % 2 == (c[e] ? 0 : 1));
        }
    }
}

TEST_CASE("loop dump") {
    BoxLattice lat(1);
    EdgeConfig c(lat, false);
    c.set(lat.horizontal(0, 0), true);
    LoopSet set = extract_loops(lat, c, kFree);
    std::ostringstream out;
    dump_loops(set, out);
    std::string text = out.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(set.loops.size()));
    CHECK(text.find("0.25,0.25") != std::string::npos);
    CHECK_THROWS_AS(extract_loops(lat, c, BoundaryCondition::Kind::Partition), domain_error);
}

TEST_CASE("event A on sampled critical configurations") {
    BoxLattice lat(10);
    RcmParams params = RcmParams::critical(2.0);
    CoupledChain ch(lat, params, 21, 0);
    AnnulusSpec ann = AnnulusSpec::from_delta(3, 1.0);
    for (int i = 0; i < 100; ++i) {
        ch.sweep();
        REQUIRE(event_A(lat, ch.lower(), ann) == event_A_via_loops(lat, ch.lower(), kFree, ann));
        REQUIRE(event_A(lat, ch.upper(), ann) == event_A_via_loops(lat, ch.upper(), kWired, ann));
    }
}
