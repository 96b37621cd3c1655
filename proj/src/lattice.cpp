#include "fkmix/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace fkmix {

BoxLattice::BoxLattice(int R) : R_(R), L_(2 * R + 1), nh_(0) {
    if (R < 1)
        throw domain_error("box half-side must be >= 1, got " + std::to_string(R));
    nh_ = L_ * (L_ - 1);
    for (int v = 0; v < num_vertices(); ++v)
        if (on_boundary(v))
            boundary_.push_back(v);
}

bool BoxLattice::on_boundary(int v) const {
    Point p = point(v);
    return std::abs(p.x) == R_ || std::abs(p.y) == R_;
}

int BoxLattice::degree(int v) const {
    int nbr[4], edge[4];
    return neighbors(v, nbr, edge);
}

std::pair<Point, Point> BoxLattice::ends(EdgeId e) const {
    if (e.v < nh_) {
        Point a{e.v % (L_ - 1) - R_, e.v / (L_ - 1) - R_};
        return {a, {a.x + 1, a.y}};
    }
    int k = e.v - nh_;
    Point a{k % L_ - R_, k / L_ - R_};
    return {a, {a.x, a.y + 1}};
}

std::pair<int, int> BoxLattice::end_ids(EdgeId e) const {
    auto [a, b] = ends(e);
    return {vertex(a), vertex(b)};
}

int BoxLattice::neighbors(int v, int* nbr, int* edge) const {
    Point p = point(v);
    int n = 0;
    if (p.x < R_) {
        nbr[n] = v + 1;
        edge[n++] = horizontal(p.x, p.y).v;
    }
    if (p.x > -R_) {
        nbr[n] = v - 1;
        edge[n++] = horizontal(p.x - 1, p.y).v;
    }
    if (p.y < R_) {
        nbr[n] = v + L_;
        edge[n++] = vertical(p.x, p.y).v;
    }
    if (p.y > -R_) {
        nbr[n] = v - L_;
        edge[n++] = vertical(p.x, p.y - 1).v;
    }
    return n;
}

void BoxLattice::check(EdgeId e) const {
    if (e.v < 0 || e.v >= num_edges())
        throw domain_error("edge index out of range: " + std::to_string(e.v));
}

void BoxLattice::check(DualEdgeId d) const {
    if (d.v < 0 || d.v >= num_edges())
        throw domain_error("dual edge index out of range: " + std::to_string(d.v));
}

DualEdgeId BoxLattice::dual_edge(EdgeId e) const {
    check(e);
    auto [a, b] = ends(e);
    if (e.v < nh_) {
        // crossed by the dual vertical edge (a.x, a.y-1)-(a.x, a.y)
        int da = a.x, db = a.y - 1;
        return {nh_ + (db + R_ + 1) * (L_ - 1) + (da + R_)};
    }
    // crossed by the dual horizontal edge (a.x-1, a.y)-(a.x, a.y)
    int da = a.x - 1, db = a.y;
    return {(db + R_) * L_ + (da + R_ + 1)};
}

EdgeId BoxLattice::dual_edge(DualEdgeId d) const {
    check(d);
    if (d.v < nh_) {
        int da = d.v % L_ - R_ - 1, db = d.v / L_ - R_;
        return vertical(da + 1, db);
    }
    int k = d.v - nh_;
    int da = k % (L_ - 1) - R_, db = k / (L_ - 1) - R_ - 1;
    return horizontal(da, db + 1);
}

std::pair<int, int> BoxLattice::dual_end_ids(DualEdgeId d) const {
    check(d);
    if (d.v < nh_) {
        int da = d.v % L_ - R_ - 1, db = d.v / L_ - R_;
        return {dual_vertex(da, db), dual_vertex(da + 1, db)};
    }
    int k = d.v - nh_;
    int da = k % (L_ - 1) - R_, db = k / (L_ - 1) - R_ - 1;
    return {dual_vertex(da, db), dual_vertex(da, db + 1)};
}

std::pair<int, int> BoxLattice::faces(EdgeId e) const {
    return dual_end_ids(dual_edge(e));
}

int EdgeConfig::open_count() const {
    return static_cast<int>(std::count(bits.begin(), bits.end(), uint8_t{1}));
}

std::vector<uint8_t> dual_config(const BoxLattice& lat, const EdgeConfig& cfg) {
    std::vector<uint8_t> d(lat.num_edges());
    for (int i = 0; i < lat.num_edges(); ++i)
        d[lat.dual_edge(EdgeId{i}).v] = cfg.bits[i] ? 0 : 1;
    return d;
}

EdgeConfig from_dual_config(const BoxLattice& lat, const std::vector<uint8_t>& dual) {
    EdgeConfig c;
    c.bits.assign(lat.num_edges(), 0);
    for (int i = 0; i < lat.num_edges(); ++i)
        c.bits[lat.dual_edge(DualEdgeId{i}).v] = dual[i] ? 0 : 1;
    return c;
}

AnnulusSpec AnnulusSpec::from_delta(int r, double delta) {
    if (!(delta > 0))
        throw domain_error("annulus delta must be positive");
    AnnulusSpec a{r, static_cast<int>(std::floor((1.0 + delta) * r + 1e-12))};
    if (r < 1 || a.r_outer < r + 2)
        throw domain_error("degenerate annulus: r=" + std::to_string(r) + " r_outer=" + std::to_string(a.r_outer) +
                           " (need r_outer >= r + 2)");
    return a;
}

void check_annulus(const BoxLattice& lat, const AnnulusSpec& ann) {
    if (ann.r_inner < 1 || ann.r_outer <= ann.r_inner)
        throw domain_error("annulus needs 1 <= r_inner < r_outer");
    if (ann.r_outer > lat.R())
        throw domain_error("annulus outer radius " + std::to_string(ann.r_outer) + " exceeds box " +
                           std::to_string(lat.R()));
}

BoundaryCondition BoundaryCondition::partition(const BoxLattice& lat, std::vector<std::vector<int>> classes) {
    std::vector<char> seen(lat.num_vertices(), 0);
    for (auto& c : classes)
        for (int v : c) {
            if (v < 0 || v >= lat.num_vertices() || !lat.on_boundary(v))
                throw domain_error("partition class contains a non-boundary vertex");
            if (seen[v])
                throw domain_error("partition classes are not disjoint");
            seen[v] = 1;
        }
    return BoundaryCondition(Kind::Partition, std::move(classes));
}

int BoundaryCondition::class_of(const BoxLattice& lat, int v) const {
    switch (kind_) {
    case Kind::Free:
        return -1;
    case Kind::Wired:
        return lat.on_boundary(v) ? 0 : -1;
    case Kind::Partition:
        for (size_t i = 0; i < classes_.size(); ++i)
            if (std::find(classes_[i].begin(), classes_[i].end(), v) != classes_[i].end())
                return static_cast<int>(i);
        return -1;
    }
    return -1;
}

std::string BoundaryCondition::name() const {
    switch (kind_) {
    case Kind::Free:
        return "free";
    case Kind::Wired:
        return "wired";
    case Kind::Partition:
        return "partition";
    }
    return "?";
}

namespace {

// Graph on vertices plus one virtual node per identification class.
struct Identified {
    const BoxLattice& lat;
    int nv;
    std::vector<int> cls;                  // class per vertex, -1 if none
    std::vector<std::vector<int>> members; // per class

    Identified(const BoxLattice& l, const BoundaryCondition& bc) : lat(l), nv(l.num_vertices()), cls(nv, -1) {
        if (bc.kind() == BoundaryCondition::Kind::Wired) {
            members.push_back(l.boundary());
        } else if (bc.kind() == BoundaryCondition::Kind::Partition) {
            for (auto& c : bc.classes())
                members.push_back(c);
        }
        for (size_t i = 0; i < members.size(); ++i)
            for (int v : members[i])
                cls[v] = static_cast<int>(i);
    }
    int size() const { return nv + static_cast<int>(members.size()); }
};

} // namespace

bool connected(const BoxLattice& lat, const EdgeConfig& cfg, const BoundaryCondition& bc, int u, int v,
               std::optional<EdgeId> excluding) {
    if (u < 0 || v < 0 || u >= lat.num_vertices() || v >= lat.num_vertices())
        throw domain_error("vertex index out of range");
    if (u == v)
        return true;
    Identified g(lat, bc);
    std::vector<char> seen(g.size(), 0);
    std::deque<int> queue{u};
    seen[u] = 1;
    int skip = excluding ? excluding->v : -1;
    auto push = [&](int w) {
        if (!seen[w]) {
            seen[w] = 1;
            queue.push_back(w);
        }
    };
    while (!queue.empty()) {
        int n = queue.front();
        queue.pop_front();
        if (n == v)
            return true;
        if (n >= g.nv) {
            for (int w : g.members[n - g.nv])
                push(w);
            continue;
        }
        if (g.cls[n] >= 0)
            push(g.nv + g.cls[n]);
        int nbr[4], edge[4];
        int k = lat.neighbors(n, nbr, edge);
        for (int i = 0; i < k; ++i)
            if (edge[i] != skip && cfg.bits[edge[i]])
                push(nbr[i]);
    }
    return false;
}

UnionFind::UnionFind(int n) : parent_(n), rank_(n, 0), comps_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
}

int UnionFind::find(int a) {
    while (parent_[a] != a) {
        parent_[a] = parent_[parent_[a]];
        a = parent_[a];
    }
    return a;
}

bool UnionFind::unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b)
        return false;
    if (rank_[a] < rank_[b])
        std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b])
        ++rank_[a];
    --comps_;
    return true;
}

std::vector<int> cluster_labels(const BoxLattice& lat, const EdgeConfig& cfg, const BoundaryCondition& bc,
                                int* count) {
    Identified g(lat, bc);
    UnionFind uf(g.nv);
    for (auto& m : g.members)
        for (size_t i = 1; i < m.size(); ++i)
            uf.unite(m[0], m[i]);
    for (int e = 0; e < lat.num_edges(); ++e)
        if (cfg.bits[e]) {
            auto [a, b] = lat.end_ids(EdgeId{e});
            uf.unite(a, b);
        }
    std::vector<int> label(g.nv, -1), root_label(g.nv, -1);
    int next = 0;
    for (int v = 0; v < g.nv; ++v) {
        int r = uf.find(v);
        if (root_label[r] < 0)
            root_label[r] = next++;
        label[v] = root_label[r];
    }
    if (count)
        *count = next;
    return label;
}

int cluster_count(const BoxLattice& lat, const EdgeConfig& cfg, const BoundaryCondition& bc) {
    int n = 0;
    cluster_labels(lat, cfg, bc, &n);
    return n;
}

int cluster_count_bfs(const BoxLattice& lat, const EdgeConfig& cfg, const BoundaryCondition& bc) {
    Identified g(lat, bc);
    std::vector<char> seen(g.size(), 0);
    int comps = 0;
    std::deque<int> queue;
    for (int s = 0; s < g.nv; ++s) {
        if (seen[s])
            continue;
        ++comps;
        seen[s] = 1;
        queue.push_back(s);
        while (!queue.empty()) {
            int n = queue.front();
            queue.pop_front();
            auto push = [&](int w) {
                if (!seen[w]) {
                    seen[w] = 1;
                    queue.push_back(w);
                }
            };
            if (n >= g.nv) {
                for (int w : g.members[n - g.nv])
                    push(w);
                continue;
            }
            if (g.cls[n] >= 0)
                push(g.nv + g.cls[n]);
            int nbr[4], edge[4];
            int k = lat.neighbors(n, nbr, edge);
            for (int i = 0; i < k; ++i)
                if (cfg.bits[edge[i]])
                    push(nbr[i]);
        }
    }
    return comps;
}

} // namespace fkmix
