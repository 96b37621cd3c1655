#include "fkmix/events.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <utility>

namespace fkmix {

namespace {

constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};
// quadrant q sits between directions q and q+1
constexpr int kSx[4] = {1, -1, -1, 1};
constexpr int kSy[4] = {1, 1, -1, -1};

int norm_inf(int x, int y) { return std::max(std::abs(x), std::abs(y)); }
// twice the sup norm of the face center (a+1/2, b+1/2)
int face_norm2(int a, int b) { return std::max(std::abs(2 * a + 1), std::abs(2 * b + 1)); }

bool edge_open(const BoxLattice& lat, const EdgeConfig& cfg, int x, int y, int d) {
    switch (d) {
    case 0: return cfg[lat.horizontal(x, y)];
    case 1: return cfg[lat.vertical(x, y)];
    case 2: return cfg[lat.horizontal(x - 1, y)];
    default: return cfg[lat.vertical(x, y - 1)];
    }
}

// Primal edge crossed by the dual step from face (a,b) in direction d.
EdgeId crossed(const BoxLattice& lat, int a, int b, int d) {
    switch (d) {
    case 0: return lat.vertical(a + 1, b);
    case 1: return lat.horizontal(a, b + 1);
    case 2: return lat.vertical(a, b);
    default: return lat.horizontal(a, b);
    }
}

// Nodes carry an integer sheet index on the cover cut along a ray from the
// hole; an edge that reaches an already labelled node on a different sheet
// closes a cycle of nonzero winding.
class CoverSearch {
public:
    explicit CoverSearch(int n) : sheet_(n, 0), seen_(n, 0) {}

    template <class Region, class Step>
    bool run(int n, Region in_region, Step step) {
        std::vector<int> queue;
        int nbr[4], wind[4];
        for (int s = 0; s < n; ++s) {
            if (seen_[s] || !in_region(s))
                continue;
            seen_[s] = 1;
            sheet_[s] = 0;
            queue.assign(1, s);
            for (size_t h = 0; h < queue.size(); ++h) {
                int u = queue[h];
                int k = step(u, nbr, wind);
                for (int i = 0; i < k; ++i) {
                    int v = nbr[i];
                    if (!seen_[v]) {
                        seen_[v] = 1;
                        sheet_[v] = sheet_[u] + wind[i];
                        queue.push_back(v);
                    } else if (sheet_[v] != sheet_[u] + wind[i]) {
                        return true;
                    }
                }
            }
        }
        return false;
    }

private:
    std::vector<int> sheet_;
    std::vector<uint8_t> seen_;
};

// Primal circuit in the annulus using vertices accepted by keep.
template <class Keep>
bool primal_circuit(const BoxLattice& lat, const EdgeConfig& cfg, const AnnulusSpec& ann, Keep keep) {
    const int n = lat.num_vertices();
    auto in_region = [&](int v) {
        Point p = lat.point(v);
        return in_annulus_primal(ann, p.x, p.y) && keep(v);
    };
    auto step = [&](int u, int* nbr, int* wind) {
        Point p = lat.point(u);
        int k = 0;
        for (int d = 0; d < 4; ++d) {
            int x = p.x + kDx[d], y = p.y + kDy[d];
            if (!lat.contains(x, y) || !edge_open(lat, cfg, p.x, p.y, d))
                continue;
            int v = lat.vertex(x, y);
            if (!in_region(v))
                continue;
            nbr[k] = v;
            // ray y = 1/2, x > 0
            wind[k] = (p.x > 0 && d == 1 && p.y == 0) ? 1 : (p.x > 0 && d == 3 && p.y == 1) ? -1 : 0;
            ++k;
        }
        return k;
    };
    CoverSearch cs(n);
    return cs.run(n, in_region, step);
}

bool dual_circuit(const BoxLattice& lat, const EdgeConfig& cfg, const AnnulusSpec& ann) {
    const int n = lat.num_dual_vertices();
    auto in_region = [&](int f) {
        Point p = lat.dual_point(f);
        return in_annulus_dual(ann, p.x, p.y);
    };
    auto step = [&](int u, int* nbr, int* wind) {
        Point p = lat.dual_point(u);
        int k = 0;
        for (int d = 0; d < 4; ++d) {
            int a = p.x + kDx[d], b = p.y + kDy[d];
            if (!in_annulus_dual(ann, a, b) || cfg[crossed(lat, p.x, p.y, d)])
                continue;
            nbr[k] = lat.dual_vertex(a, b);
            // ray y = 0, x > 0
            wind[k] = (p.x >= 0 && d == 1 && p.y == -1) ? 1 : (p.x >= 0 && d == 3 && p.y == 0) ? -1 : 0;
            ++k;
        }
        return k;
    };
    CoverSearch cs(n);
    return cs.run(n, in_region, step);
}

// Grid on which loops are traced: the box itself (free) or the box grown by
// one ring whose edges, and the edges joining it to the box, are all open (wired).
struct TraceGrid {
    const BoxLattice& lat;
    const EdgeConfig& cfg;
    int R;
    bool wired;

    int side() const { return 2 * R + 1; }
    int id(int x, int y) const { return (y + R) * side() + (x + R); }
    bool open(int x, int y, int d) const {
        int x2 = x + kDx[d], y2 = y + kDy[d];
        if (norm_inf(x2, y2) > R)
            return false;
        if (wired && (norm_inf(x, y) > lat.R() || norm_inf(x2, y2) > lat.R()))
            return true;
        return edge_open(lat, cfg, x, y, d);
    }
};

void set_bbox(Loop& loop) {
    loop.xmin = loop.xmax = loop.corners[0].x;
    loop.ymin = loop.ymax = loop.corners[0].y;
    for (const Point& c : loop.corners) {
        loop.xmin = std::min(loop.xmin, c.x);
        loop.xmax = std::max(loop.xmax, c.x);
        loop.ymin = std::min(loop.ymin, c.y);
        loop.ymax = std::max(loop.ymax, c.y);
    }
}

bool bbox_contains(const Loop& outer, const Loop& inner) {
    return outer.xmin <= inner.xmin && outer.xmax >= inner.xmax && outer.ymin <= inner.ymin &&
           outer.ymax >= inner.ymax;
}

bool bbox_contains(const Loop& loop, int X, int Y) {
    return X > loop.xmin && X < loop.xmax && Y > loop.ymin && Y < loop.ymax;
}

// The corner's vertex and face, in lattice coordinates.
Point corner_vertex(Point c) {
    int sx = (c.x % 4 + 4) % 4 == 1 ? 1 : -1;
    int sy = (c.y % 4 + 4) % 4 == 1 ? 1 : -1;
    return {(c.x - sx) / 4, (c.y - sy) / 4};
}

Point corner_face(Point c) {
    Point v = corner_vertex(c);
    int sx = c.x - 4 * v.x, sy = c.y - 4 * v.y;
    return {v.x + (sx - 1) / 2, v.y + (sy - 1) / 2};
}

// Levels from the tree of clusters: loops are the edges between the primal
// and dual clusters they separate, rooted at the outer cluster.
void levels_from_clusters(const BoxLattice& lat, const EdgeConfig& cfg, BoundaryCondition::Kind bc,
                          LoopSet& set) {
    const int R = lat.R();
    const bool wired = bc == BoundaryCondition::Kind::Wired;
    int np = 0;
    std::vector<int> plabel =
        cluster_labels(lat, cfg, wired ? BoundaryCondition::wired() : BoundaryCondition::free(), &np);

    const int nf = lat.num_dual_vertices();
    UnionFind uf(nf);
    int outer = -1;
    for (int f = 0; f < nf; ++f) {
        Point p = lat.dual_point(f);
        if (lat.dual_outside(p.x, p.y)) {
            if (!wired) {
                if (outer < 0)
                    outer = f;
                uf.unite(outer, f);
            }
            continue;
        }
        for (int d = 0; d < 4; ++d) {
            int a = p.x + kDx[d], b = p.y + kDy[d];
            if (!cfg[crossed(lat, p.x, p.y, d)])
                uf.unite(f, lat.dual_vertex(a, b));
        }
    }
    std::vector<int> dlabel(nf, -1);
    int nd = 0;
    for (int f = 0; f < nf; ++f) {
        int r = uf.find(f);
        if (dlabel[r] < 0)
            dlabel[r] = nd++;
        dlabel[f] = dlabel[r];
    }

    // primal nodes [0,np), dual nodes [np, np+nd)
    const int nodes = np + nd;
    std::vector<std::vector<std::pair<int, int>>> adj(nodes);
    std::vector<std::pair<int, int>> ends(set.loops.size());
    for (size_t i = 0; i < set.loops.size(); ++i) {
        Point c = set.loops[i].corners[0];
        Point v = corner_vertex(c), f = corner_face(c);
        int pn = norm_inf(v.x, v.y) > R ? plabel[lat.vertex(R, R)] : plabel[lat.vertex(v.x, v.y)];
        int dn = np + dlabel[lat.dual_vertex(f.x, f.y)];
        ends[i] = {pn, dn};
        adj[pn].push_back({dn, static_cast<int>(i)});
        adj[dn].push_back({pn, static_cast<int>(i)});
    }
    int root = wired ? plabel[lat.vertex(R, R)] : np + dlabel[lat.dual_vertex(-R - 1, -R - 1)];
    std::vector<int> depth(nodes, -1);
    std::vector<int> queue{root};
    depth[root] = 0;
    for (size_t h = 0; h < queue.size(); ++h) {
        int u = queue[h];
        for (auto [v, li] : adj[u]) {
            if (depth[v] >= 0)
                continue;
            depth[v] = depth[u] + 1;
            queue.push_back(v);
        }
    }
    for (size_t i = 0; i < set.loops.size(); ++i) {
        int a = depth[ends[i].first], b = depth[ends[i].second];
        if (a < 0 || b < 0 || std::abs(a - b) != 1)
            throw std::logic_error("loop does not separate adjacent clusters");
        set.loops[i].level = std::max(a, b);
    }
}

} // namespace

bool in_annulus_primal(const AnnulusSpec& ann, int x, int y) {
    int n = norm_inf(x, y);
    return n > ann.r_inner && n <= ann.r_outer;
}

bool in_annulus_dual(const AnnulusSpec& ann, int a, int b) {
    int n2 = face_norm2(a, b);
    return n2 > 2 * ann.r_inner && n2 < 2 * ann.r_outer;
}

bool has_horizontal_crossing(const BoxLattice& lat, const EdgeConfig& cfg, const Rect& rect) {
    if (rect.x0 >= rect.x1 || rect.y0 > rect.y1)
        throw domain_error("degenerate crossing rectangle");
    if (!lat.contains(rect.x0, rect.y0) || !lat.contains(rect.x1, rect.y1))
        throw domain_error("crossing rectangle outside the lattice");
    auto inside = [&](int x, int y) { return x >= rect.x0 && x <= rect.x1 && y >= rect.y0 && y <= rect.y1; };
    std::vector<uint8_t> seen(lat.num_vertices(), 0);
    std::vector<int> queue;
    for (int y = rect.y0; y <= rect.y1; ++y) {
        int v = lat.vertex(rect.x0, y);
        seen[v] = 1;
        queue.push_back(v);
    }
    for (size_t h = 0; h < queue.size(); ++h) {
        Point p = lat.point(queue[h]);
        if (p.x == rect.x1)
            return true;
        for (int d = 0; d < 4; ++d) {
            int x = p.x + kDx[d], y = p.y + kDy[d];
            if (!inside(x, y) || !edge_open(lat, cfg, p.x, p.y, d))
                continue;
            int v = lat.vertex(x, y);
            if (!seen[v]) {
                seen[v] = 1;
                queue.push_back(v);
            }
        }
    }
    return false;
}

bool has_noncontractible_circuit(const BoxLattice& lat, const EdgeConfig& cfg, const AnnulusSpec& ann, Side which) {
    check_annulus(lat, ann);
    if (which == Side::Primal)
        return primal_circuit(lat, cfg, ann, [](int) { return true; });
    return dual_circuit(lat, cfg, ann);
}

bool has_primal_circuit_by_dual_crossing(const BoxLattice& lat, const EdgeConfig& cfg, const AnnulusSpec& ann) {
    check_annulus(lat, ann);
    const int lo = 2 * ann.r_inner + 1, hi = 2 * ann.r_outer + 1;
    std::vector<uint8_t> seen(lat.num_dual_vertices(), 0);
    std::vector<int> queue;
    for (int f = 0; f < lat.num_dual_vertices(); ++f) {
        Point p = lat.dual_point(f);
        if (face_norm2(p.x, p.y) == lo) {
            seen[f] = 1;
            queue.push_back(f);
        }
    }
    for (size_t h = 0; h < queue.size(); ++h) {
        Point p = lat.dual_point(queue[h]);
        if (face_norm2(p.x, p.y) == hi)
            return false;
        for (int d = 0; d < 4; ++d) {
            int a = p.x + kDx[d], b = p.y + kDy[d];
            int n2 = face_norm2(a, b);
            if (n2 < lo || n2 > hi || cfg[crossed(lat, p.x, p.y, d)])
                continue;
            int f = lat.dual_vertex(a, b);
            if (!seen[f]) {
                seen[f] = 1;
                queue.push_back(f);
            }
        }
    }
    return true;
}

bool event_A(const BoxLattice& lat, const EdgeConfig& cfg, const AnnulusSpec& ann) {
    check_annulus(lat, ann);
    // Flood from the origin, blocked only by dual-open edges of the dual
    // annulus; the flooded set ends at the innermost dual circuit.
    std::vector<uint8_t> inside(lat.num_vertices(), 0);
    std::vector<int> queue{lat.vertex(0, 0)};
    inside[queue[0]] = 1;
    for (size_t h = 0; h < queue.size(); ++h) {
        Point p = lat.point(queue[h]);
        if (norm_inf(p.x, p.y) >= ann.r_outer)
            return false;
        for (int d = 0; d < 4; ++d) {
            int x = p.x + kDx[d], y = p.y + kDy[d];
            if (!edge_open(lat, cfg, p.x, p.y, d)) {
                // the dual edge separates the two faces on either side of the step
                int a1, b1, a2, b2;
                if (d == 0 || d == 2) {
                    a1 = a2 = std::min(p.x, x);
                    b1 = p.y - 1;
                    b2 = p.y;
                } else {
                    b1 = b2 = std::min(p.y, y);
                    a1 = p.x - 1;
                    a2 = p.x;
                }
                if (in_annulus_dual(ann, a1, b1) && in_annulus_dual(ann, a2, b2))
                    continue;
            }
            int v = lat.vertex(x, y);
            if (!inside[v]) {
                inside[v] = 1;
                queue.push_back(v);
            }
        }
    }
    return primal_circuit(lat, cfg, ann, [&](int v) { return !inside[v]; });
}

LoopSet extract_loops(const BoxLattice& lat, const EdgeConfig& cfg, BoundaryCondition::Kind bc) {
    if (bc == BoundaryCondition::Kind::Partition)
        throw domain_error("extract_loops supports free and wired boundary conditions only");
    const bool wired = bc == BoundaryCondition::Kind::Wired;
    TraceGrid grid{lat, cfg, lat.R() + (wired ? 1 : 0), wired};
    const int R = grid.R, n = grid.side() * grid.side();

    LoopSet set;
    set.corner_count = 4 * n;
    std::vector<uint8_t> used(4 * static_cast<size_t>(n), 0);
    auto emit = [&](Loop& loop, int x, int y, int q) {
        uint8_t& u = used[4 * static_cast<size_t>(grid.id(x, y)) + q];
        if (u)
            throw std::logic_error("medial corner visited twice");
        u = 1;
        loop.corners.push_back({4 * x + kSx[q], 4 * y + kSy[q]});
    };

    for (int y0 = -R; y0 <= R; ++y0) {
        for (int x0 = -R; x0 <= R; ++x0) {
            for (int q0 = 0; q0 < 4; ++q0) {
                if (used[4 * static_cast<size_t>(grid.id(x0, y0)) + q0])
                    continue;
                Loop loop;
                int start = -1;
                for (int k = 0; k < 4 && start < 0; ++k)
                    if (grid.open(x0, y0, (q0 - k + 4) % 4))
                        start = (q0 - k + 4) % 4;
                if (start < 0) {
                    for (int q = 0; q < 4; ++q)
                        emit(loop, x0, y0, q);
                } else {
                    int x = x0, y = y0, din = start;
                    do {
                        int d = din;
                        do {
                            emit(loop, x, y, d);
                            d = (d + 1) % 4;
                        } while (!grid.open(x, y, d));
                        x += kDx[d];
                        y += kDy[d];
                        din = (d + 2) % 4;
                    } while (x != x0 || y != y0 || din != start);
                }
                set_bbox(loop);
                set.loops.push_back(std::move(loop));
            }
        }
    }

    if (wired) {
        // the loop running outside the added ring is not an interface of the box
        const Point mark{4 * -R - 1, 4 * -R - 1};
        auto it = std::find_if(set.loops.begin(), set.loops.end(), [&](const Loop& l) {
            return std::find(l.corners.begin(), l.corners.end(), mark) != l.corners.end();
        });
        set.outer_corners = static_cast<int>(it->corners.size());
        set.loops.erase(it);
    }
    for (Loop& loop : set.loops)
        loop.around_origin = bbox_contains(loop, 2, 0) && polygon_contains(loop, 2, 0);
    levels_from_clusters(lat, cfg, bc, set);
    return set;
}

bool polygon_contains(const Loop& loop, int X, int Y) {
    bool in = false;
    const size_t n = loop.corners.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = loop.corners[i];
        const Point& b = loop.corners[j];
        if ((a.y > Y) != (b.y > Y)) {
            // crossing abscissa compared exactly: a.x + (Y-a.y)(b.x-a.x)/(b.y-a.y) > X
            long long num = static_cast<long long>(Y - a.y) * (b.x - a.x);
            long long den = b.y - a.y;
            long long lhs = static_cast<long long>(a.x - X) * den + num;
            if (den > 0 ? lhs > 0 : lhs < 0)
                in = !in;
        }
    }
    return in;
}

void nesting_levels(LoopSet& set) {
    const size_t n = set.loops.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i)
        order[i] = i;
    // large boxes first so candidate ancestors can stop early
    auto area = [&](size_t i) {
        const Loop& l = set.loops[i];
        return static_cast<long long>(l.xmax - l.xmin) * (l.ymax - l.ymin);
    };
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return area(a) > area(b); });
    for (size_t i = 0; i < n; ++i) {
        Loop& child = set.loops[i];
        const Point p = child.corners.front();
        const Point p2 = child.corners[child.corners.size() / 2];
        int level = 1;
        for (size_t k = 0; k < n; ++k) {
            size_t j = order[k];
            if (area(j) < area(i))
                break;
            if (j == i)
                continue;
            const Loop& anc = set.loops[j];
            if (!bbox_contains(anc, p.x, p.y) && !bbox_contains(anc, p2.x, p2.y))
                continue;
            bool c1 = polygon_contains(anc, p.x, p.y);
            bool c2 = polygon_contains(anc, p2.x, p2.y);
            if (c1 != c2 || (c1 && !bbox_contains(anc, child)))
                throw std::logic_error("crossing loops");
            if (c1)
                ++level;
        }
        child.level = level;
    }
}

bool event_A_via_loops(const LoopSet& set, BoundaryCondition::Kind bc, const AnnulusSpec& ann) {
    const int parity = bc == BoundaryCondition::Kind::Wired ? 1 : 0;
    for (const Loop& loop : set.loops) {
        if (!loop.around_origin || loop.level % 2 != parity)
            continue;
        bool in = std::all_of(loop.corners.begin(), loop.corners.end(), [&](Point c) {
            Point v = corner_vertex(c), f = corner_face(c);
            return in_annulus_primal(ann, v.x, v.y) && in_annulus_dual(ann, f.x, f.y);
        });
        if (in)
            return true;
    }
    return false;
}

bool event_A_via_loops(const BoxLattice& lat, const EdgeConfig& cfg, BoundaryCondition::Kind bc,
                       const AnnulusSpec& ann) {
    check_annulus(lat, ann);
    return event_A_via_loops(extract_loops(lat, cfg, bc), bc, ann);
}

int loops_around_origin(const LoopSet& set) {
    return static_cast<int>(std::count_if(set.loops.begin(), set.loops.end(),
                                          [](const Loop& l) { return l.around_origin; }));
}

int loops_around_point(const LoopSet& set, int X, int Y) {
    if (X % 2 != 0 || Y % 2 != 0)
        throw domain_error("reference point must have even quarter-unit coordinates");
    return static_cast<int>(std::count_if(set.loops.begin(), set.loops.end(), [&](const Loop& l) {
        return bbox_contains(l, X, Y) && polygon_contains(l, X, Y);
    }));
}

void dump_loops(const LoopSet& set, std::ostream& out) {
    for (size_t i = 0; i < set.loops.size(); ++i) {
        const Loop& l = set.loops[i];
        out << i << ' ' << l.level << ' ' << (l.around_origin ? 1 : 0);
        for (const Point& c : l.corners)
            out << ' ' << c.x / 4.0 << ',' << c.y / 4.0;
        out << '\n';
    }
}

} // namespace fkmix
